//! Seeded random objects for tests, campaigns and oracles.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use rand_distr::StandardNormal;

use crate::fock::{FieldVector, FockOperator, ModeSpace};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream `stream` of `seed`; used for per-sample seeding.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

pub fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Complex Gaussian coefficients.
pub fn random_field<R: Rng + ?Sized>(space: &ModeSpace, rng: &mut R) -> FieldVector {
    FieldVector::new((0..space.mode_count()).map(|_| gaussian(rng)).collect())
}

pub fn random_unit_field<R: Rng + ?Sized>(space: &ModeSpace, rng: &mut R) -> FieldVector {
    let f = random_field(space, rng);
    let n = space.norm(&f);
    f.scaled(Complex64::new(1.0 / n, 0.0))
}

/// Random field supported on the modes of `mask`.
pub fn random_field_on<R: Rng + ?Sized>(space: &ModeSpace, mask: u64, rng: &mut R) -> FieldVector {
    random_field(space, rng).masked(mask)
}

pub fn ginibre<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<Complex64> {
    DMatrix::from_fn(n, n, |_, _| gaussian(rng))
}

/// Haar-distributed unitary in the standard inner product.
pub fn haar_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<Complex64> {
    let qr = ginibre(n, rng).qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Dense operator with Gaussian entries, scaled to O(1) norm.
pub fn random_operator<R: Rng + ?Sized>(modes: usize, rng: &mut R) -> FockOperator {
    let d = 1usize << modes;
    let scale = 1.0 / (2.0 * d as f64).sqrt();
    FockOperator::from_matrix(modes, ginibre(d, rng) * Complex64::new(scale, 0.0))
        .expect("shape matches by construction")
}

/// Positive site weights drawn from [0.5, 2).
pub fn random_weights<R: Rng + ?Sized>(sites: usize, rng: &mut R) -> Vec<f64> {
    (0..sites).map(|_| rng.random_range(0.5..2.0)).collect()
}
