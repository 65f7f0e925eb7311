//! Partition conditional expectations `nu_P`: the Haar average of the
//! torus `T = prod_j exp(i R P_j)` acting by Bogoliubov automorphisms.
//!
//! The torus acts on `|K>` by the character `prod_j t_j^{q_j(K)}` where
//! `q_j(K) = |K ∩ block_j|`, so averaging `alpha_t(A)` over `T` keeps exactly
//! the entries `<K|A|L>` with `q(K) = q(L)`. [`twirl`] is that pinching;
//! [`twirl_oracle_roots`] and [`twirl_oracle_mc`] average the action itself.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;

use crate::automorphism::{apply_alpha, OneParticleUnitary};
use crate::error::{CarError, Result};
use crate::fock::{low_bits, smear, FieldVector, FockOperator, ModeSpace, Polynomial};
use crate::sample;

/// Block partition of the modes `{0..m-1}`; block `j` is the coordinate
/// projection `P_j` onto its modes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    modes: usize,
    blocks: Vec<u64>,
}

impl Partition {
    /// Blocks must be nonempty, disjoint and cover every mode.
    pub fn new(modes: usize, blocks: Vec<Vec<usize>>) -> Result<Self> {
        let mut masks = Vec::with_capacity(blocks.len());
        let mut covered = 0u64;
        for (j, block) in blocks.iter().enumerate() {
            if block.is_empty() {
                return Err(CarError::InvalidPartition(format!("block {j} is empty")));
            }
            let mut mask = 0u64;
            for &i in block {
                if i >= modes {
                    return Err(CarError::InvalidPartition(format!(
                        "mode {i} in block {j} is out of range for {modes} modes"
                    )));
                }
                if (covered | mask) >> i & 1 == 1 {
                    return Err(CarError::InvalidPartition(format!("mode {i} appears twice")));
                }
                mask |= 1 << i;
            }
            covered |= mask;
            masks.push(mask);
        }
        let all = low_bits(modes);
        if covered != all {
            return Err(CarError::InvalidPartition(format!(
                "modes {:?} are not covered",
                (0..modes).filter(|i| covered >> i & 1 == 0).collect::<Vec<_>>()
            )));
        }
        Ok(Self {
            modes,
            blocks: masks,
        })
    }

    /// Partition from a block label per mode; labels are renumbered in
    /// order of first appearance.
    pub fn from_labels(labels: &[usize]) -> Result<Self> {
        let mut order: Vec<usize> = Vec::new();
        let mut blocks: Vec<Vec<usize>> = Vec::new();
        for (mode, &label) in labels.iter().enumerate() {
            match order.iter().position(|&l| l == label) {
                Some(j) => blocks[j].push(mode),
                None => {
                    order.push(label);
                    blocks.push(vec![mode]);
                }
            }
        }
        Self::new(labels.len(), blocks)
    }

    /// The trivial partition `{1}`.
    pub fn single_block(modes: usize) -> Self {
        Self {
            modes,
            blocks: vec![low_bits(modes)],
        }
    }

    pub fn singletons(modes: usize) -> Self {
        Self {
            modes,
            blocks: (0..modes).map(|i| 1u64 << i).collect(),
        }
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    pub fn masks(&self) -> &[u64] {
        &self.blocks
    }

    pub fn blocks(&self) -> Vec<Vec<usize>> {
        self.blocks
            .iter()
            .map(|&mask| (0..self.modes).filter(|i| mask >> i & 1 == 1).collect())
            .collect()
    }

    pub fn block_sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.count_ones() as usize).collect()
    }

    /// Block label of each mode.
    pub fn labels(&self) -> Vec<usize> {
        let mut labels = vec![0; self.modes];
        for (j, &mask) in self.blocks.iter().enumerate() {
            for (i, l) in labels.iter_mut().enumerate() {
                if mask >> i & 1 == 1 {
                    *l = j;
                }
            }
        }
        labels
    }

    /// Joint charge vector of a basis state, packed four bits per block.
    pub fn charge_key(&self, state: usize) -> u64 {
        self.blocks
            .iter()
            .enumerate()
            .fold(0, |key, (j, &mask)| key | (((state as u64) & mask).count_ones() as u64) << (4 * j))
    }

    /// `|P_j f|` for every block.
    pub fn block_norms(&self, space: &ModeSpace, f: &FieldVector) -> Vec<f64> {
        self.blocks.iter().map(|&mask| space.norm(&f.masked(mask))).collect()
    }

    /// `max_j |P_j f|`.
    pub fn max_block_norm(&self, space: &ModeSpace, f: &FieldVector) -> f64 {
        self.block_norms(space, f).into_iter().fold(0.0, f64::max)
    }

    /// The projections `P_j` as m x m matrices.
    pub fn projections(&self) -> Vec<DMatrix<Complex64>> {
        self.blocks
            .iter()
            .map(|&mask| {
                DMatrix::from_fn(self.modes, self.modes, |i, k| {
                    if i == k && mask >> i & 1 == 1 {
                        Complex64::new(1.0, 0.0)
                    } else {
                        Complex64::new(0.0, 0.0)
                    }
                })
            })
            .collect()
    }

    /// Every block of `self` lies inside a block of `coarser`.
    pub fn refines(&self, coarser: &Partition) -> bool {
        self.modes == coarser.modes
            && self
                .blocks
                .iter()
                .all(|b| coarser.blocks.iter().any(|c| b & !c == 0))
    }
}

/// Joint charge sectors of a partition: the projectors `Pi_q` onto states
/// with charge vector `q`.
#[derive(Debug, Clone)]
pub struct ChargeSectorDecomposition {
    modes: usize,
    sectors: Vec<(u64, Vec<usize>)>,
}

impl ChargeSectorDecomposition {
    pub fn new(p: &Partition) -> Self {
        let mut map: std::collections::BTreeMap<u64, Vec<usize>> = Default::default();
        for k in 0..1usize << p.modes {
            map.entry(p.charge_key(k)).or_default().push(k);
        }
        Self {
            modes: p.modes,
            sectors: map.into_iter().collect(),
        }
    }

    pub fn sector_count(&self) -> usize {
        self.sectors.len()
    }

    /// Basis states of each sector, keyed by packed charge vector.
    pub fn sectors(&self) -> &[(u64, Vec<usize>)] {
        &self.sectors
    }

    pub fn projector(&self, index: usize) -> FockOperator {
        let d = 1usize << self.modes;
        let mut diag = vec![Complex64::new(0.0, 0.0); d];
        for &k in &self.sectors[index].1 {
            diag[k] = Complex64::new(1.0, 0.0);
        }
        FockOperator::diagonal(self.modes, &diag)
    }
}

fn check_modes(p: &Partition, a: &FockOperator) -> Result<()> {
    if p.modes != a.modes() {
        return Err(CarError::DimensionMismatch {
            expected: p.modes,
            found: a.modes(),
        });
    }
    Ok(())
}

/// `nu_P(A) = sum_q Pi_q A Pi_q`.
pub fn twirl(p: &Partition, a: &FockOperator) -> Result<FockOperator> {
    check_modes(p, a)?;
    let d = a.dim();
    let keys: Vec<u64> = (0..d).map(|k| p.charge_key(k)).collect();
    let mut out = a.clone();
    let mat = out.matrix_mut();
    for (col, kc) in keys.iter().enumerate() {
        for (row, kr) in keys.iter().enumerate() {
            if kr != kc {
                mat[(row, col)] = Complex64::new(0.0, 0.0);
            }
        }
    }
    Ok(out)
}

/// Twirl for the trivial partition: projection onto the gauge-invariant
/// (particle-number preserving) part.
pub fn gicar_project(a: &FockOperator) -> FockOperator {
    twirl(&Partition::single_block(a.modes()), a).expect("same mode count")
}

/// `alpha_t(A)` for the torus point with angle `angles[j]` on block `j`.
pub fn torus_action(
    space: &ModeSpace,
    p: &Partition,
    angles: &[f64],
    a: &FockOperator,
) -> Result<FockOperator> {
    check_modes(p, a)?;
    if angles.len() != p.block_count() {
        return Err(CarError::DimensionMismatch {
            expected: p.block_count(),
            found: angles.len(),
        });
    }
    let labels = p.labels();
    let thetas: Vec<f64> = labels.iter().map(|&j| angles[j]).collect();
    let u = OneParticleUnitary::diagonal_phases(space, &thetas)?;
    apply_alpha(&u, a)
}

/// Exact torus average on the grid of (2m+1)-th roots of unity per block.
/// Charge differences lie in `[-m, m]`, so the grid kills every nontrivial
/// character. Blocks are averaged one circle at a time.
pub fn twirl_oracle_roots(space: &ModeSpace, p: &Partition, a: &FockOperator) -> Result<FockOperator> {
    check_modes(p, a)?;
    let m = p.modes;
    let n = 2 * m + 1;
    let r = p.block_count();
    let mut acc = a.clone();
    for j in 0..r {
        let mut sum = FockOperator::zeros(m);
        for k in 0..n {
            let mut angles = vec![0.0; r];
            angles[j] = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
            sum = &sum + &torus_action(space, p, &angles, &acc)?;
        }
        acc = sum.scale(Complex64::new(1.0 / n as f64, 0.0));
    }
    Ok(acc)
}

/// Monte-Carlo torus average over `samples` uniform points. Sample `k` draws
/// its angles from stream `k` of `seed`, so the result does not depend on
/// the thread count.
pub fn twirl_oracle_mc(
    space: &ModeSpace,
    p: &Partition,
    a: &FockOperator,
    samples: usize,
    seed: u64,
) -> Result<FockOperator> {
    check_modes(p, a)?;
    if samples == 0 {
        return Err(CarError::InvalidArgument("samples must be at least 1".into()));
    }
    const CHUNK: usize = 256;
    let r = p.block_count();
    let d = a.dim();
    let labels = p.labels();
    if space.mode_count() != p.modes {
        return Err(CarError::DimensionMismatch {
            expected: space.mode_count(),
            found: p.modes,
        });
    }
    let partials = (0..samples.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut sum = DMatrix::<Complex64>::zeros(d, d);
            let mut phase = vec![Complex64::new(1.0, 0.0); d];
            for k in c * CHUNK..((c + 1) * CHUNK).min(samples) {
                let mut rng = sample::stream_rng(seed, k as u64);
                let angles: Vec<f64> = (0..r)
                    .map(|_| rng.random_range(0.0..std::f64::consts::TAU))
                    .collect();
                // Gamma(e^{i theta}) is diagonal with the product of the
                // phases of the occupied modes.
                for (state, z) in phase.iter_mut().enumerate() {
                    let total: f64 = (0..p.modes)
                        .filter(|i| state >> i & 1 == 1)
                        .map(|i| angles[labels[i]])
                        .sum();
                    *z = Complex64::from_polar(1.0, total);
                }
                for j in 0..d {
                    let pj = phase[j].conj();
                    for i in 0..d {
                        sum[(i, j)] += phase[i] * pj * a.entry(i, j);
                    }
                }
            }
            Ok(sum)
        })
        .collect::<Result<Vec<_>>>()?;
    let total = partials
        .into_iter()
        .fold(DMatrix::<Complex64>::zeros(d, d), |acc, s| acc + s);
    Ok(FockOperator::from_matrix_unchecked(p.modes, total * Complex64::new(1.0 / samples as f64, 0.0)))
}

/// Tolerance on orthogonality, idempotence and resolution of the identity.
const PROJECTION_TOL: f64 = 1e-10;

/// Brings commuting orthogonal projections (orthogonal for the weighted
/// inner product, summing to 1) to coordinate form. Returns `U` and a block
/// partition with `U P_j U^*` the coordinate projection of block `j`.
pub fn adapt_partition(
    space: &ModeSpace,
    projections: &[DMatrix<Complex64>],
) -> Result<(OneParticleUnitary, Partition)> {
    let m = space.mode_count();
    if projections.is_empty() {
        return Err(CarError::InvalidProjections("empty family".into()));
    }
    let sqrt_w: Vec<f64> = (0..m).map(|i| space.mode_weight(i).sqrt()).collect();
    let ortho: Vec<DMatrix<Complex64>> = projections
        .iter()
        .map(|p| {
            if p.nrows() != m || p.ncols() != m {
                return Err(CarError::DimensionMismatch {
                    expected: m,
                    found: p.nrows(),
                });
            }
            Ok(DMatrix::from_fn(m, m, |i, j| p[(i, j)] * (sqrt_w[i] / sqrt_w[j])))
        })
        .collect::<Result<_>>()?;
    let max_abs = |x: &DMatrix<Complex64>| x.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut sum = DMatrix::<Complex64>::zeros(m, m);
    for (i, p) in ortho.iter().enumerate() {
        if max_abs(&(p - p.adjoint())) > PROJECTION_TOL {
            return Err(CarError::InvalidProjections(format!("P_{i} is not self-adjoint")));
        }
        for (j, q) in ortho.iter().enumerate() {
            let prod = p * q;
            let expected = if i == j { p.clone() } else { DMatrix::zeros(m, m) };
            if max_abs(&(&prod - &expected)) > PROJECTION_TOL {
                return Err(CarError::InvalidProjections(if i == j {
                    format!("P_{i} is not idempotent")
                } else {
                    format!("P_{i} P_{j} != 0 (projections must be mutually orthogonal)")
                }));
            }
        }
        if p.trace().re < 0.5 {
            return Err(CarError::InvalidProjections(format!("P_{i} is zero")));
        }
        sum += p;
    }
    if max_abs(&(&sum - DMatrix::identity(m, m))) > PROJECTION_TOL {
        return Err(CarError::InvalidProjections("projections do not sum to 1".into()));
    }

    let diagonal = ortho.iter().all(|p| {
        p.iter()
            .enumerate()
            .all(|(k, z)| k % m == k / m || z.norm() <= PROJECTION_TOL)
    });
    if diagonal {
        let labels: Vec<usize> = (0..m)
            .map(|i| {
                ortho
                    .iter()
                    .position(|p| p[(i, i)].re > 0.5)
                    .expect("projections resolve the identity")
            })
            .collect();
        let blocks = (0..ortho.len())
            .map(|j| (0..m).filter(|&i| labels[i] == j).collect())
            .collect();
        return Ok((OneParticleUnitary::identity(space), Partition::new(m, blocks)?));
    }

    // Sum_j j P_j has eigenvalue j exactly on ran P_j.
    let mut label_op = DMatrix::<Complex64>::zeros(m, m);
    for (j, p) in ortho.iter().enumerate() {
        label_op += p * Complex64::new(j as f64, 0.0);
    }
    let label_op = (&label_op + label_op.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = label_op.symmetric_eigen();
    let mut order: Vec<(usize, usize)> = eig
        .eigenvalues
        .iter()
        .enumerate()
        .map(|(col, &ev)| (ev.round() as usize, col))
        .collect();
    order.sort();
    let mut basis = DMatrix::<Complex64>::zeros(m, m);
    let mut blocks: Vec<Vec<usize>> = vec![Vec::new(); ortho.len()];
    for (pos, &(label, col)) in order.iter().enumerate() {
        basis.set_column(pos, &eig.eigenvectors.column(col));
        blocks[label].push(pos);
    }
    let u = OneParticleUnitary::from_orthonormal(space, basis.adjoint())?;
    Ok((u, Partition::new(m, blocks)?))
}

/// Twirl for an arbitrary family of commuting projections:
/// `alpha_U^{-1}(nu_P(alpha_U(A)))` with `(U, P)` from [`adapt_partition`].
pub fn twirl_projections(
    space: &ModeSpace,
    projections: &[DMatrix<Complex64>],
    a: &FockOperator,
) -> Result<FockOperator> {
    let (u, p) = adapt_partition(space, projections)?;
    let rotated = apply_alpha(&u, a)?;
    apply_alpha(&u.adjoint(), &twirl(&p, &rotated)?)
}

/// One evaluation of `|[nu_P(A), a(f)]| <= C_A max_l |P_l f|`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub lhs: f64,
    pub c_a: f64,
    pub max_block_norm: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Slack on the commutator bound.
pub const BOUND_SLACK: f64 = 1e-9;

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// `C_A` summed termwise: `|c| n n! prod_i |f_i| |g_i|` for a degree-(n, n)
/// monomial with coefficient `c`. Independent of the partition.
pub fn commutator_constant(space: &ModeSpace, a: &Polynomial) -> Result<f64> {
    a.check_balanced()?;
    let mut total = 0.0;
    for (c, m) in &a.terms {
        let n = m.creators.len();
        let fields: f64 = m.fields().map(|f| space.norm(f)).product();
        total += c.norm() * n as f64 * factorial(n) * fields;
    }
    Ok(total)
}

pub fn commutator_bound_report(
    space: &ModeSpace,
    a: &Polynomial,
    f: &FieldVector,
    p: &Partition,
) -> Result<BoundReport> {
    let c_a = commutator_constant(space, a)?;
    space.check_field(f)?;
    let op = a.to_operator(space)?;
    let twirled = twirl(p, &op)?;
    let af = smear(space, f)?;
    let lhs = twirled.commutator(&af).operator_norm();
    let max_block_norm = p.max_block_norm(space, f);
    let rhs = c_a * max_block_norm;
    Ok(BoundReport {
        lhs,
        c_a,
        max_block_norm,
        rhs,
        holds: lhs <= rhs + BOUND_SLACK,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{elementary_annihilator, monomial_operator, number_operator, Monomial};

    fn space(m: usize) -> ModeSpace {
        ModeSpace::uniform(m, 1).unwrap()
    }

    #[test]
    fn partition_validation() {
        assert!(Partition::new(3, vec![vec![0, 1], vec![2]]).is_ok());
        assert!(matches!(Partition::new(3, vec![vec![0, 1]]), Err(CarError::InvalidPartition(_))));
        assert!(matches!(Partition::new(3, vec![vec![0, 1], vec![1, 2]]), Err(CarError::InvalidPartition(_))));
        assert!(matches!(Partition::new(2, vec![vec![0, 1], vec![]]), Err(CarError::InvalidPartition(_))));
        let p = Partition::from_labels(&[7, 3, 7]).unwrap();
        assert_eq!(p.blocks(), vec![vec![0, 2], vec![1]]);
    }

    #[test]
    fn sectors_resolve_identity() {
        let p = Partition::new(4, vec![vec![0, 3], vec![1, 2]]).unwrap();
        let dec = ChargeSectorDecomposition::new(&p);
        assert_eq!(dec.sector_count(), 9);
        let mut sum = FockOperator::zeros(4);
        for i in 0..dec.sector_count() {
            let pi = dec.projector(i);
            assert!((&pi * &pi).distance(&pi) < 1e-15);
            sum = &sum + &pi;
        }
        assert!(sum.distance(&FockOperator::identity(4)) < 1e-15);
    }

    #[test]
    fn twirl_is_unital_and_kills_fields() {
        let s = space(3);
        let p = Partition::new(3, vec![vec![0], vec![1, 2]]).unwrap();
        assert_eq!(twirl(&p, &FockOperator::identity(3)).unwrap(), FockOperator::identity(3));
        let mut r = sample::rng(2);
        let f = sample::random_field(&s, &mut r);
        assert_eq!(twirl(&p, &smear(&s, &f).unwrap()).unwrap().operator_norm(), 0.0);
    }

    #[test]
    fn single_block_roots_oracle() {
        let s = space(2);
        let p = Partition::single_block(2);
        let a0 = elementary_annihilator(&s, 0).unwrap();
        let n0 = &a0.adjoint() * &a0;
        assert!(twirl_oracle_roots(&s, &p, &n0).unwrap().distance(&n0) < 1e-14);
        assert!(twirl_oracle_roots(&s, &p, &a0.adjoint()).unwrap().operator_norm() < 1e-14);
    }

    #[test]
    fn torus_identity_point() {
        let s = space(3);
        let p = Partition::new(3, vec![vec![0, 2], vec![1]]).unwrap();
        let a = sample::random_operator(3, &mut sample::rng(4));
        assert!(torus_action(&s, &p, &[0.0, 0.0], &a).unwrap().distance(&a) < 1e-15);
    }

    #[test]
    fn gicar_examples() {
        let s = space(3);
        let mut r = sample::rng(6);
        let f = sample::random_field(&s, &mut r);
        let g = sample::random_field(&s, &mut r);
        let hop = monomial_operator(&s, &Monomial::new(vec![f.clone()], vec![g.clone()])).unwrap();
        assert!(gicar_project(&hop).distance(&hop) < 1e-15);
        let pair = monomial_operator(&s, &Monomial::new(vec![], vec![f, g])).unwrap();
        assert_eq!(gicar_project(&pair).operator_norm(), 0.0);
        let a = sample::random_operator(3, &mut r);
        assert!(gicar_project(&a).commutator(&number_operator(3)).max_abs_entry() < 1e-14);
    }

    #[test]
    fn adapt_diagonal_projections() {
        let s = space(3);
        let p = Partition::new(3, vec![vec![1], vec![0, 2]]).unwrap();
        let (u, q) = adapt_partition(&s, &p.projections()).unwrap();
        assert_eq!(u, OneParticleUnitary::identity(&s));
        assert_eq!(q, p);
    }

    #[test]
    fn adapt_rejects_bad_families() {
        let s = space(2);
        let one = DMatrix::<Complex64>::identity(2, 2);
        assert!(adapt_partition(&s, &[one.clone(), one.clone()]).is_err());
        let half = &one * Complex64::new(0.5, 0.0);
        assert!(adapt_partition(&s, &[half.clone(), half]).is_err());
        let e0 = Partition::singletons(2).projections();
        assert!(adapt_partition(&s, &e0[..1]).is_err());
    }

    #[test]
    fn adapt_rotated_rank_one_basis() {
        let s = ModeSpace::new(3, 1, vec![1.0, 2.0, 0.5]).unwrap();
        let mut r = sample::rng(9);
        let v = sample::haar_unitary(3, &mut r);
        // rank-one weighted-orthogonal projections onto the columns of J^{-1} V
        let projections: Vec<DMatrix<Complex64>> = (0..3)
            .map(|k| {
                let col = v.column(k);
                let p = &col * col.adjoint();
                DMatrix::from_fn(3, 3, |i, j| p[(i, j)] * (s.mode_weight(j) / s.mode_weight(i)).sqrt())
            })
            .collect();
        let (u, part) = adapt_partition(&s, &projections).unwrap();
        assert_eq!(part.block_count(), 3);
        assert!(part.block_sizes().iter().all(|&b| b == 1));
        let uo = u.orthonormal_matrix();
        for (j, p) in projections.iter().enumerate() {
            let po = DMatrix::from_fn(3, 3, |i, k| p[(i, k)] * (s.mode_weight(i) / s.mode_weight(k)).sqrt());
            let rotated = uo * po * uo.adjoint();
            let target = &part.projections()[j];
            assert!((rotated - target).iter().all(|z| z.norm() < 1e-10));
        }
    }

    #[test]
    fn degree_one_constant_is_product_of_norms() {
        let s = ModeSpace::new(3, 1, vec![1.0, 0.5, 3.0]).unwrap();
        let mut r = sample::rng(12);
        let f1 = sample::random_field(&s, &mut r);
        let g1 = sample::random_field(&s, &mut r);
        let a = Polynomial::single(Monomial::new(vec![f1.clone()], vec![g1.clone()]));
        let c = commutator_constant(&s, &a).unwrap();
        assert!((c - s.norm(&f1) * s.norm(&g1)).abs() < 1e-12);
        let f = sample::random_field(&s, &mut r);
        let p = Partition::new(3, vec![vec![0, 1], vec![2]]).unwrap();
        assert!(commutator_bound_report(&s, &a, &f, &p).unwrap().holds);
    }
}
