//! The local net `W -> A(W)` over the site lattice and the restriction maps.
//!
//! `nu_W` compresses an operator to `F_W`, the states with no particle
//! outside `W`, and re-embeds it as an element of `A(W)`. A mode permutation
//! that makes `modes(W)` an initial segment turns `A(W)` into `B (x) 1`, so
//! the re-embedding is a tensor product in the permuted frame.

mod expand;
mod fixed;

pub use expand::{
    normal_monomial_operator, normal_order_expand, restrict_oracle, NormalOrderExpansion,
    EXPANSION_MAX_MODES,
};
pub use fixed::{
    balanced_monomials, balanced_monomial_count, fixed_point_algebra, site_phase_generators,
    SITE_PHASE_ANGLE,
};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::automorphism::ModePermutation;
use crate::error::{CarError, Result};
use crate::fock::{FieldOp, FieldKind, FockOperator, ModeSpace};

/// A set of sites; fiber-resolved regions are not supported.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Region {
    site_count: usize,
    sites: Vec<usize>,
    mask: u64,
}

impl Region {
    pub fn new(space: &ModeSpace, sites: &[usize]) -> Result<Self> {
        let mut sorted = sites.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        let mut mask = 0;
        for &s in &sorted {
            if s >= space.site_count() {
                return Err(CarError::UnknownSite {
                    site: s,
                    sites: space.site_count(),
                });
            }
            mask |= space.site_mask(s);
        }
        Ok(Self {
            site_count: space.site_count(),
            sites: sorted,
            mask,
        })
    }

    pub fn all(space: &ModeSpace) -> Self {
        let sites: Vec<usize> = (0..space.site_count()).collect();
        Self::new(space, &sites).expect("sites in range")
    }

    pub fn empty(space: &ModeSpace) -> Self {
        Self::new(space, &[]).expect("no sites")
    }

    pub fn sites(&self) -> &[usize] {
        &self.sites
    }

    /// Bitmask of `modes(W)`.
    pub fn mode_mask(&self) -> u64 {
        self.mask
    }

    pub fn mode_count(&self) -> usize {
        self.mask.count_ones() as usize
    }

    pub fn complement(&self, space: &ModeSpace) -> Self {
        let sites: Vec<usize> = (0..self.site_count)
            .filter(|s| !self.sites.contains(s))
            .collect();
        Self::new(space, &sites).expect("sites in range")
    }

    pub fn is_subset(&self, other: &Region) -> bool {
        self.mask & !other.mask == 0
    }

    /// Mode permutation placing `modes(W)` first, both parts in increasing order.
    fn front_permutation(&self, modes: usize) -> ModePermutation {
        let k = self.mode_count();
        let mut image = vec![0; modes];
        let (mut inside, mut outside) = (0, k);
        for (i, slot) in image.iter_mut().enumerate() {
            if self.mask >> i & 1 == 1 {
                *slot = inside;
                inside += 1;
            } else {
                *slot = outside;
                outside += 1;
            }
        }
        ModePermutation::new(image).expect("bijection by construction")
    }
}

fn check_region(space: &ModeSpace, w: &Region, a: &FockOperator) -> Result<()> {
    if w.site_count != space.site_count() {
        return Err(CarError::InvalidArgument(format!(
            "region built for {} sites, space has {}",
            w.site_count,
            space.site_count()
        )));
    }
    if a.modes() != space.mode_count() {
        return Err(CarError::DimensionMismatch {
            expected: space.mode_count(),
            found: a.modes(),
        });
    }
    Ok(())
}

/// `A` compressed to `F_W`, as an operator on the Fock space of `modes(W)`.
pub fn compress(space: &ModeSpace, a: &FockOperator, w: &Region) -> Result<DMatrix<Complex64>> {
    check_region(space, w, a)?;
    let k = w.mode_count();
    let moved = w.front_permutation(a.modes()).conjugate(a);
    Ok(moved.matrix().view((0, 0), (1 << k, 1 << k)).into_owned())
}

/// The element `B` of `A(W)` acting as `b` on the Fock space of `modes(W)`.
pub fn embed(space: &ModeSpace, b: &DMatrix<Complex64>, w: &Region) -> Result<FockOperator> {
    let m = space.mode_count();
    let k = w.mode_count();
    let local = 1usize << k;
    if b.nrows() != local || b.ncols() != local {
        return Err(CarError::DimensionMismatch {
            expected: local,
            found: b.nrows(),
        });
    }
    let d = 1usize << m;
    let mut mat = DMatrix::zeros(d, d);
    for rest in 0..1usize << (m - k) {
        let off = rest << k;
        mat.view_mut((off, off), (local, local)).copy_from(b);
    }
    let moved = FockOperator::from_matrix_unchecked(m, mat);
    Ok(w.front_permutation(m).inverse().conjugate(&moved))
}

/// The conditional expectation `nu_W` onto `A(W)`.
pub fn restrict(space: &ModeSpace, a: &FockOperator, w: &Region) -> Result<FockOperator> {
    embed(space, &compress(space, a, w)?, w)
}

/// `P_W`-bar: projection onto the states with no particle outside `W`.
pub fn vacuum_projection(space: &ModeSpace, w: &Region) -> FockOperator {
    let outside = !w.mode_mask();
    let diag: Vec<Complex64> = (0..space.fock_dim())
        .map(|k| {
            if k as u64 & outside == 0 {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect();
    FockOperator::diagonal(space.mode_count(), &diag)
}

/// `P A P` with `P` the vacuum projection of `W`.
pub fn nu_tilde(space: &ModeSpace, a: &FockOperator, w: &Region) -> Result<FockOperator> {
    check_region(space, w, a)?;
    let outside = !w.mode_mask();
    let d = a.dim();
    let keep: Vec<bool> = (0..d).map(|k| k as u64 & outside == 0).collect();
    let mat = DMatrix::from_fn(d, d, |i, j| {
        if keep[i] && keep[j] {
            a.entry(i, j)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    Ok(FockOperator::from_matrix_unchecked(a.modes(), mat))
}

/// `|nu_W(A^* A)|`. The compression of `A^* A` to `F_W` only needs the
/// columns of `A` indexed by `F_W`.
pub fn ideal_defect(space: &ModeSpace, a: &FockOperator, w: &Region) -> Result<f64> {
    check_region(space, w, a)?;
    let outside = !w.mode_mask();
    let cols: Vec<usize> = (0..a.dim()).filter(|&k| k as u64 & outside == 0).collect();
    let sub = a.matrix().select_columns(&cols);
    Ok(spectral_norm(&(sub.adjoint() * sub)))
}

fn spectral_norm(m: &DMatrix<Complex64>) -> f64 {
    if m.iter().all(|z| z.norm() == 0.0) {
        return 0.0;
    }
    m.clone().singular_values().iter().cloned().fold(0.0, f64::max)
}

/// Membership in the left ideal `N_{W^c}`: `|nu_W(A^* A)| < tol`.
pub fn ideal_member(space: &ModeSpace, a: &FockOperator, w: &Region, tol: f64) -> Result<bool> {
    if !(tol > 0.0) {
        return Err(CarError::InvalidArgument("tolerance must be positive".into()));
    }
    Ok(ideal_defect(space, a, w)? < tol)
}

/// `A` is a fixed point of `nu_W`, i.e. lies in `A(W)`.
pub fn membership_in_local(space: &ModeSpace, a: &FockOperator, w: &Region, tol: f64) -> Result<bool> {
    if !(tol > 0.0) {
        return Err(CarError::InvalidArgument("tolerance must be positive".into()));
    }
    Ok(restrict(space, a, w)?.distance(a) < tol)
}

/// `A(W)` with its generators and normal-ordered monomial basis.
#[derive(Debug, Clone)]
pub struct LocalAlgebraHandle {
    space: ModeSpace,
    region: Region,
}

impl LocalAlgebraHandle {
    pub fn new(space: &ModeSpace, region: Region) -> Self {
        Self {
            space: space.clone(),
            region,
        }
    }

    pub fn region(&self) -> &Region {
        &self.region
    }

    /// `4^{|modes(W)|}`.
    pub fn dim(&self) -> usize {
        1 << (2 * self.region.mode_count())
    }

    pub fn modes(&self) -> Vec<usize> {
        (0..self.space.mode_count())
            .filter(|i| self.region.mode_mask() >> i & 1 == 1)
            .collect()
    }

    /// The elementary annihilators `a_i`, `i` in `modes(W)`.
    pub fn generators(&self) -> Vec<FockOperator> {
        let m = self.space.mode_count();
        self.modes()
            .into_iter()
            .map(|i| FieldOp::elementary(m, i, FieldKind::Annihilation).to_dense())
            .collect()
    }

    /// `a*_I a_J` for all `I, J` inside `modes(W)`.
    pub fn basis_monomials(&self) -> Vec<FockOperator> {
        let m = self.space.mode_count();
        let mask = self.region.mode_mask() as usize;
        let subsets: Vec<usize> = (0..1usize << m).filter(|s| s & !mask == 0).collect();
        let mut out = Vec::with_capacity(subsets.len() * subsets.len());
        for &i in &subsets {
            for &j in &subsets {
                out.push(normal_monomial_operator(m, i, j));
            }
        }
        out
    }

    pub fn contains(&self, a: &FockOperator, tol: f64) -> Result<bool> {
        membership_in_local(&self.space, a, &self.region, tol)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{monomial_operator, smear, FieldVector, Monomial};
    use crate::sample;

    fn setup() -> (ModeSpace, Region) {
        let s = ModeSpace::new(3, 2, vec![1.0, 0.5, 2.0]).unwrap();
        let w = Region::new(&s, &[0, 2]).unwrap();
        (s, w)
    }

    #[test]
    fn region_masks() {
        let (s, w) = setup();
        assert_eq!(w.mode_mask(), 0b110011);
        assert_eq!(w.complement(&s).mode_mask(), 0b001100);
        assert!(matches!(Region::new(&s, &[3]), Err(CarError::UnknownSite { site: 3, sites: 3 })));
        assert!(Region::empty(&s).is_subset(&w));
    }

    #[test]
    fn inside_fields_fixed_outside_fields_killed() {
        let (s, w) = setup();
        let mut r = sample::rng(1);
        let f = sample::random_field_on(&s, w.mode_mask(), &mut r);
        let c = sample::random_field_on(&s, !w.mode_mask(), &mut r);
        let af = smear(&s, &f).unwrap();
        assert!(restrict(&s, &af, &w).unwrap().distance(&af) < 1e-12);
        assert!(restrict(&s, &smear(&s, &c).unwrap(), &w).unwrap().operator_norm() < 1e-12);
    }

    #[test]
    fn split_field_number_operator() {
        let (s, w) = setup();
        let mut r = sample::rng(2);
        let f = sample::random_field(&s, &mut r);
        let fw = f.masked(w.mode_mask());
        let mono = |g: &FieldVector| monomial_operator(&s, &Monomial::new(vec![g.clone()], vec![g.clone()])).unwrap();
        assert!(restrict(&s, &mono(&f), &w).unwrap().distance(&mono(&fw)) < 1e-12);
    }

    #[test]
    fn empty_and_full_regions() {
        let (s, _) = setup();
        let a = sample::random_operator(6, &mut sample::rng(3));
        assert!(restrict(&s, &a, &Region::all(&s)).unwrap().distance(&a) < 1e-14);
        let vac = restrict(&s, &a, &Region::empty(&s)).unwrap();
        let expected = FockOperator::identity(6).scale(a.entry(0, 0));
        assert!(vac.distance(&expected) < 1e-14);
        assert_eq!(vacuum_projection(&s, &Region::all(&s)), FockOperator::identity(6));
    }

    #[test]
    fn unital_and_idempotent() {
        let (s, w) = setup();
        assert!(restrict(&s, &FockOperator::identity(6), &w).unwrap().distance(&FockOperator::identity(6)) < 1e-15);
        let a = sample::random_operator(6, &mut sample::rng(4));
        let once = restrict(&s, &a, &w).unwrap();
        assert!(restrict(&s, &once, &w).unwrap().distance(&once) < 1e-13);
    }

    #[test]
    fn local_generators_are_members() {
        let (s, w) = setup();
        let h = LocalAlgebraHandle::new(&s, w.clone());
        assert_eq!(h.generators().len(), 4);
        assert_eq!(h.dim(), 256);
        for g in h.generators() {
            assert!(h.contains(&g, 1e-12).unwrap());
        }
        let outside = FieldOp::elementary(6, 2, FieldKind::Annihilation).to_dense();
        assert!(!h.contains(&outside, 1e-6).unwrap());
    }

    #[test]
    fn compression_matches_expansion_route() {
        let s = ModeSpace::new(2, 2, vec![0.7, 1.3]).unwrap();
        let w = Region::new(&s, &[1]).unwrap();
        let a = sample::random_operator(4, &mut sample::rng(6));
        let direct = restrict(&s, &a, &w).unwrap();
        assert!(restrict_oracle(&s, &a, &w).unwrap().distance(&direct) < 1e-12);
    }

    #[test]
    fn ideal_examples() {
        let (s, w) = setup();
        let mut r = sample::rng(5);
        let c = sample::random_field_on(&s, !w.mode_mask(), &mut r);
        let ac = smear(&s, &c).unwrap();
        assert!(ideal_member(&s, &ac, &w, 1e-10).unwrap());
        assert!(!ideal_member(&s, &FockOperator::identity(6), &w, 1e-10).unwrap());
        let b = sample::random_operator(6, &mut r);
        assert!(ideal_member(&s, &(&b * &ac), &w, 1e-10).unwrap());
        assert!(ideal_member(&s, &ac, &w, 0.0).is_err());
    }
}
