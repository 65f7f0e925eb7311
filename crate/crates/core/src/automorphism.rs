//! Bogoliubov automorphisms `alpha_U` implemented by second quantization,
//! and the quasi-free maps `alpha_R` of one-particle contractions.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{CarError, Result};
use crate::fock::{monomial_operator, FieldVector, FockOperator, ModeSpace, Monomial};

/// Tolerance on `U^* U = 1` and on `|R| <= 1`.
pub const ONE_PARTICLE_TOL: f64 = 1e-10;

/// Converts a matrix on user coordinates to orthonormal coordinates:
/// `J M J^{-1}` with `J = diag(sqrt w)`.
fn to_orthonormal(space: &ModeSpace, mat: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    DMatrix::from_fn(mat.nrows(), mat.ncols(), |i, j| {
        mat[(i, j)] * (space.mode_weight(i) / space.mode_weight(j)).sqrt()
    })
}

fn from_orthonormal(space: &ModeSpace, mat: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    DMatrix::from_fn(mat.nrows(), mat.ncols(), |i, j| {
        mat[(i, j)] * (space.mode_weight(j) / space.mode_weight(i)).sqrt()
    })
}

fn check_square(space: &ModeSpace, mat: &DMatrix<Complex64>) -> Result<()> {
    let m = space.mode_count();
    if mat.nrows() != m || mat.ncols() != m {
        return Err(CarError::DimensionMismatch {
            expected: m,
            found: if mat.nrows() != m { mat.nrows() } else { mat.ncols() },
        });
    }
    Ok(())
}

/// Unitary on the one-particle space (unitary for the weighted inner product).
#[derive(Debug, Clone, PartialEq)]
pub struct OneParticleUnitary {
    space: ModeSpace,
    /// Orthonormal-coordinate matrix.
    ortho: DMatrix<Complex64>,
}

impl OneParticleUnitary {
    /// `mat` acts on coefficient vectors in user coordinates.
    pub fn new(space: &ModeSpace, mat: DMatrix<Complex64>) -> Result<Self> {
        check_square(space, &mat)?;
        Self::from_orthonormal(space, to_orthonormal(space, &mat))
    }

    /// `mat` acts on orthonormal coordinates `sqrt(w_i) f_i`.
    pub fn from_orthonormal(space: &ModeSpace, ortho: DMatrix<Complex64>) -> Result<Self> {
        space.check_dense()?;
        check_square(space, &ortho)?;
        let m = space.mode_count();
        let residual = (ortho.adjoint() * &ortho - DMatrix::identity(m, m))
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        if !(residual <= ONE_PARTICLE_TOL) {
            return Err(CarError::NotUnitary { residual });
        }
        Ok(Self {
            space: space.clone(),
            ortho,
        })
    }

    pub fn identity(space: &ModeSpace) -> Self {
        let m = space.mode_count();
        Self {
            space: space.clone(),
            ortho: DMatrix::identity(m, m),
        }
    }

    /// Global phase `e^{i theta} 1`.
    pub fn phase(space: &ModeSpace, theta: f64) -> Self {
        let m = space.mode_count();
        Self {
            space: space.clone(),
            ortho: DMatrix::identity(m, m) * Complex64::from_polar(1.0, theta),
        }
    }

    /// Diagonal unitary `e^{i theta_i}` on each mode.
    pub fn diagonal_phases(space: &ModeSpace, thetas: &[f64]) -> Result<Self> {
        if thetas.len() != space.mode_count() {
            return Err(CarError::DimensionMismatch {
                expected: space.mode_count(),
                found: thetas.len(),
            });
        }
        let diag: Vec<Complex64> = thetas.iter().map(|&t| Complex64::from_polar(1.0, t)).collect();
        Ok(Self {
            space: space.clone(),
            ortho: DMatrix::from_diagonal(&nalgebra::DVector::from_vec(diag)),
        })
    }

    pub fn space(&self) -> &ModeSpace {
        &self.space
    }

    /// Matrix in user coordinates.
    pub fn matrix(&self) -> DMatrix<Complex64> {
        from_orthonormal(&self.space, &self.ortho)
    }

    pub fn orthonormal_matrix(&self) -> &DMatrix<Complex64> {
        &self.ortho
    }

    pub fn apply(&self, f: &FieldVector) -> Result<FieldVector> {
        self.space.check_field(f)?;
        let coords = nalgebra::DVector::from_vec(self.space.to_orthonormal(f));
        let image = &self.ortho * coords;
        Ok(self.space.from_orthonormal(image.as_slice()))
    }

    /// `self * other`.
    pub fn compose(&self, other: &Self) -> Self {
        Self {
            space: self.space.clone(),
            ortho: &self.ortho * &other.ortho,
        }
    }

    pub fn adjoint(&self) -> Self {
        Self {
            space: self.space.clone(),
            ortho: self.ortho.adjoint(),
        }
    }

    pub fn is_diagonal(&self) -> bool {
        self.ortho
            .iter()
            .enumerate()
            .all(|(k, z)| k % self.ortho.nrows() == k / self.ortho.nrows() || *z == Complex64::new(0.0, 0.0))
    }
}

/// Contraction `|R| <= 1` on the one-particle space.
#[derive(Debug, Clone, PartialEq)]
pub struct OneParticleContraction {
    space: ModeSpace,
    ortho: DMatrix<Complex64>,
}

impl OneParticleContraction {
    pub fn new(space: &ModeSpace, mat: DMatrix<Complex64>) -> Result<Self> {
        check_square(space, &mat)?;
        let ortho = to_orthonormal(space, &mat);
        let norm = ortho
            .clone()
            .singular_values()
            .iter()
            .cloned()
            .fold(0.0, f64::max);
        if !(norm <= 1.0 + ONE_PARTICLE_TOL) {
            return Err(CarError::NotContraction { norm });
        }
        Ok(Self {
            space: space.clone(),
            ortho,
        })
    }

    /// Orthogonal projection onto the modes of `mask`.
    pub fn coordinate_projection(space: &ModeSpace, mask: u64) -> Self {
        let m = space.mode_count();
        Self {
            space: space.clone(),
            ortho: DMatrix::from_fn(m, m, |i, j| {
                if i == j && mask >> i & 1 == 1 {
                    Complex64::new(1.0, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            }),
        }
    }

    pub fn apply(&self, f: &FieldVector) -> Result<FieldVector> {
        self.space.check_field(f)?;
        let coords = nalgebra::DVector::from_vec(self.space.to_orthonormal(f));
        let image = &self.ortho * coords;
        Ok(self.space.from_orthonormal(image.as_slice()))
    }

    pub fn matrix(&self) -> DMatrix<Complex64> {
        from_orthonormal(&self.space, &self.ortho)
    }
}

impl From<&OneParticleUnitary> for OneParticleContraction {
    fn from(u: &OneParticleUnitary) -> Self {
        Self {
            space: u.space.clone(),
            ortho: u.ortho.clone(),
        }
    }
}

/// All bitmasks over `modes` bits with exactly `n` set bits, increasing.
pub(crate) fn subsets_of_size(modes: usize, n: usize) -> Vec<usize> {
    (0..1usize << modes)
        .filter(|k| k.count_ones() as usize == n)
        .collect()
}

fn bits(mut mask: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(mask.count_ones() as usize);
    while mask != 0 {
        let i = mask.trailing_zeros() as usize;
        out.push(i);
        mask &= mask - 1;
    }
    out
}

/// Second quantization `Gamma(U)`: the n-th exterior power of `U` on the
/// n-particle sector, so `Gamma(U)|K> = sum_L det(U[L, K]) |L>`.
pub fn second_quantize(u: &OneParticleUnitary) -> FockOperator {
    let m = u.space.mode_count();
    let d = 1usize << m;
    if u.is_diagonal() {
        // every minor is diagonal: det = product of the occupied phases
        let diag: Vec<Complex64> = (0..d)
            .map(|k| bits(k).into_iter().map(|i| u.ortho[(i, i)]).product())
            .collect();
        return FockOperator::diagonal(m, &diag);
    }
    let mut mat = DMatrix::zeros(d, d);
    mat[(0, 0)] = Complex64::new(1.0, 0.0);
    for n in 1..=m {
        let sector = subsets_of_size(m, n);
        let index: Vec<Vec<usize>> = sector.iter().map(|&k| bits(k)).collect();
        for (col, kbits) in sector.iter().zip(&index) {
            for (row, lbits) in sector.iter().zip(&index) {
                let minor = DMatrix::from_fn(n, n, |a, b| u.ortho[(lbits[a], kbits[b])]);
                let det = minor.determinant();
                if det != Complex64::new(0.0, 0.0) {
                    mat[(*row, *col)] = det;
                }
            }
        }
    }
    FockOperator::from_matrix_unchecked(m, mat)
}

/// `alpha_U(A) = Gamma(U) A Gamma(U)^*`.
pub fn apply_alpha(u: &OneParticleUnitary, a: &FockOperator) -> Result<FockOperator> {
    if a.modes() != u.space.mode_count() {
        return Err(CarError::DimensionMismatch {
            expected: u.space.mode_count(),
            found: a.modes(),
        });
    }
    let g = second_quantize(u);
    if u.is_diagonal() {
        let d = a.dim();
        let phases: Vec<Complex64> = (0..d).map(|k| g.entry(k, k)).collect();
        let mat = DMatrix::from_fn(d, d, |i, j| phases[i] * a.entry(i, j) * phases[j].conj());
        return Ok(FockOperator::from_matrix_unchecked(a.modes(), mat));
    }
    Ok(&(&g * a) * &g.adjoint())
}

/// `alpha_R` on a monomial: every field `h` is replaced by `R h`.
pub fn apply_quasifree(r: &OneParticleContraction, m: &Monomial) -> Result<FockOperator> {
    let mapped = m
        .fields()
        .map(|f| r.apply(f))
        .collect::<Result<Vec<_>>>()?;
    let n = m.creators.len();
    let mut it = mapped.into_iter();
    let creators = it.by_ref().take(n).collect();
    let annihilators = it.collect();
    monomial_operator(&r.space, &Monomial::new(creators, annihilators))
}

/// Permutation of mode labels, `e_i -> e_{image[i]}`.
///
/// Its second quantization is a signed permutation of occupation states, so
/// conjugation costs O(4^m) instead of two dense products.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModePermutation {
    image: Vec<usize>,
}

impl ModePermutation {
    pub fn new(image: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; image.len()];
        for &i in &image {
            if i >= image.len() || seen[i] {
                return Err(CarError::InvalidArgument(format!(
                    "{image:?} is not a permutation"
                )));
            }
            seen[i] = true;
        }
        Ok(Self { image })
    }

    pub fn modes(&self) -> usize {
        self.image.len()
    }

    pub fn image(&self) -> &[usize] {
        &self.image
    }

    /// `Gamma(pi)|K> = sign |pi(K)>`, sign the parity of sorting `pi(k_1), ..., pi(k_n)`.
    pub fn map_state(&self, state: usize) -> (f64, usize) {
        let mut target = 0usize;
        let mut inversions = 0u32;
        for k in bits(state) {
            let p = self.image[k];
            // earlier (smaller k) entries already placed above p are inversions
            inversions += (target >> p).count_ones();
            target |= 1 << p;
        }
        (if inversions % 2 == 0 { 1.0 } else { -1.0 }, target)
    }

    pub fn as_unitary(&self, space: &ModeSpace) -> Result<OneParticleUnitary> {
        let m = self.modes();
        let mat = DMatrix::from_fn(m, m, |i, j| {
            if self.image[j] == i {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        OneParticleUnitary::from_orthonormal(space, mat)
    }

    /// `Gamma(pi) A Gamma(pi)^*`.
    pub fn conjugate(&self, a: &FockOperator) -> FockOperator {
        let d = a.dim();
        let maps: Vec<(f64, usize)> = (0..d).map(|k| self.map_state(k)).collect();
        let mut out = DMatrix::zeros(d, d);
        for col in 0..d {
            let (sc, tc) = maps[col];
            for row in 0..d {
                let (sr, tr) = maps[row];
                out[(tr, tc)] = a.entry(row, col) * (sr * sc);
            }
        }
        FockOperator::from_matrix_unchecked(a.modes(), out)
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.image.len()];
        for (i, &p) in self.image.iter().enumerate() {
            inv[p] = i;
        }
        Self { image: inv }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{mode_number_operator, number_operator, smear};
    use crate::sample;

    fn space(m: usize) -> ModeSpace {
        ModeSpace::uniform(m, 1).unwrap()
    }

    #[test]
    fn identity_quantizes_to_identity() {
        let s = space(3);
        assert!(second_quantize(&OneParticleUnitary::identity(&s)).distance(&FockOperator::identity(3)) < 1e-15);
    }

    #[test]
    fn global_phase_acts_by_particle_number() {
        let s = space(3);
        let theta = 0.7;
        let g = second_quantize(&OneParticleUnitary::phase(&s, theta));
        for k in 0..8usize {
            let expected = Complex64::from_polar(1.0, theta * k.count_ones() as f64);
            assert!((g.entry(k, k) - expected).norm() < 1e-14);
        }
        assert!(g.commutator(&number_operator(3)).max_abs_entry() < 1e-14);
    }

    #[test]
    fn rejects_non_unitary() {
        let s = space(2);
        let m = DMatrix::from_element(2, 2, Complex64::new(1.0, 0.0));
        assert!(matches!(OneParticleUnitary::new(&s, m), Err(CarError::NotUnitary { .. })));
    }

    #[test]
    fn rejects_non_contraction() {
        let s = space(2);
        let m = DMatrix::identity(2, 2) * Complex64::new(1.1, 0.0);
        assert!(matches!(OneParticleContraction::new(&s, m), Err(CarError::NotContraction { .. })));
    }

    #[test]
    fn weighted_unitary_round_trips_coordinates() {
        let mut r = sample::rng(5);
        let s = ModeSpace::new(3, 1, vec![0.5, 2.0, 1.5]).unwrap();
        let u = OneParticleUnitary::from_orthonormal(&s, sample::haar_unitary(3, &mut r)).unwrap();
        let again = OneParticleUnitary::new(&s, u.matrix()).unwrap();
        assert!((again.orthonormal_matrix() - u.orthonormal_matrix()).norm() < 1e-13);
        let f = sample::random_field(&s, &mut r);
        assert!((s.norm(&u.apply(&f).unwrap()) - s.norm(&f)).abs() < 1e-13);
    }

    #[test]
    fn permutation_matches_generic_second_quantization() {
        let s = space(4);
        let p = ModePermutation::new(vec![2, 0, 3, 1]).unwrap();
        let g = second_quantize(&p.as_unitary(&s).unwrap());
        let mut r = sample::rng(1);
        let a = sample::random_operator(4, &mut r);
        let via_gamma = &(&g * &a) * &g.adjoint();
        assert!(p.conjugate(&a).distance(&via_gamma) < 1e-13);
        assert!(p.inverse().conjugate(&p.conjugate(&a)).distance(&a) < 1e-14);
    }

    #[test]
    fn quasifree_identity_and_zero() {
        let s = space(3);
        let mut r = sample::rng(3);
        let m = Monomial::new(
            vec![sample::random_field(&s, &mut r)],
            vec![sample::random_field(&s, &mut r), sample::random_field(&s, &mut r)],
        );
        let one = OneParticleContraction::new(&s, DMatrix::identity(3, 3)).unwrap();
        let zero = OneParticleContraction::new(&s, DMatrix::zeros(3, 3)).unwrap();
        assert!(apply_quasifree(&one, &m).unwrap().distance(&monomial_operator(&s, &m).unwrap()) < 1e-14);
        assert_eq!(apply_quasifree(&zero, &m).unwrap().operator_norm(), 0.0);
        assert_eq!(apply_quasifree(&zero, &Monomial::identity()).unwrap(), FockOperator::identity(3));
    }

    #[test]
    fn quasifree_projection_keeps_inner_monomials() {
        let s = space(4);
        let mut r = sample::rng(8);
        let inner = 0b0011;
        let m = Monomial::new(
            vec![sample::random_field_on(&s, inner, &mut r)],
            vec![sample::random_field_on(&s, inner, &mut r)],
        );
        let p = OneParticleContraction::coordinate_projection(&s, inner);
        assert!(apply_quasifree(&p, &m).unwrap().distance(&monomial_operator(&s, &m).unwrap()) < 1e-14);
    }

    #[test]
    fn alpha_maps_smeared_fields() {
        let mut r = sample::rng(11);
        let s = ModeSpace::new(3, 1, vec![1.0, 0.3, 2.2]).unwrap();
        let u = OneParticleUnitary::from_orthonormal(&s, sample::haar_unitary(3, &mut r)).unwrap();
        let f = sample::random_field(&s, &mut r);
        let lhs = apply_alpha(&u, &smear(&s, &f).unwrap()).unwrap();
        let rhs = smear(&s, &u.apply(&f).unwrap()).unwrap();
        assert!(lhs.distance(&rhs) < 1e-12);
    }

    #[test]
    fn second_quantization_conserves_site_numbers_for_diagonal() {
        let s = space(3);
        let u = OneParticleUnitary::diagonal_phases(&s, &[0.1, 0.2, 0.3]).unwrap();
        let g = second_quantize(&u);
        assert!(g.commutator(&mode_number_operator(3, 0b010)).max_abs_entry() < 1e-15);
    }
}
