//! Joint commutants `{A : V A = A V for all V}` of families of Fock unitaries.
//!
//! Any such `A` commutes with a random Hermitian element `H` of the span of
//! the family, so it is block diagonal over the eigenspaces of `H`. The
//! remaining linear equations only couple eigenspaces that some `V` connects;
//! each connected group is solved by an SVD nullspace.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use crate::error::{CarError, Result};
use crate::fock::FockOperator;
use crate::sample;

/// Largest mode count accepted by the solver (operator space of dimension 4^m).
pub const SOLVER_MAX_MODES: usize = 6;

/// Singular values below this are treated as zero.
pub const NULLSPACE_TOL: f64 = 1e-8;

const EIGEN_CLUSTER_TOL: f64 = 1e-7;

/// Linear subspace of operators with a Hilbert-Schmidt orthonormal basis.
#[derive(Debug, Clone)]
pub struct FixedSpace {
    modes: usize,
    basis: Vec<FockOperator>,
}

impl FixedSpace {
    pub fn from_orthonormal(modes: usize, basis: Vec<FockOperator>) -> Self {
        Self { modes, basis }
    }

    /// Orthonormalized span of `ops` (modified Gram-Schmidt, twice).
    pub fn span(modes: usize, ops: &[FockOperator]) -> Self {
        let mut basis: Vec<FockOperator> = Vec::new();
        for op in ops {
            let mut v = op.clone();
            for _ in 0..2 {
                for b in &basis {
                    let c = b.hs_inner(&v);
                    v = &v - &b.scale(c);
                }
            }
            let n = v.frobenius_norm();
            if n > NULLSPACE_TOL * op.frobenius_norm().max(1.0) {
                basis.push(v.scale(Complex64::new(1.0 / n, 0.0)));
            }
        }
        Self { modes, basis }
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[FockOperator] {
        &self.basis
    }

    /// Hilbert-Schmidt orthogonal projection onto the subspace.
    pub fn project(&self, a: &FockOperator) -> FockOperator {
        let d = a.dim();
        let mut acc = DMatrix::<Complex64>::zeros(d, d);
        for b in &self.basis {
            acc += b.matrix() * b.hs_inner(a);
        }
        FockOperator::from_matrix_unchecked(a.modes(), acc)
    }

    /// `|A - proj(A)|_HS / |A|_HS` (0 for `A = 0`).
    pub fn residual(&self, a: &FockOperator) -> f64 {
        let n = a.frobenius_norm();
        if n == 0.0 {
            return 0.0;
        }
        (a - &self.project(a)).frobenius_norm() / n
    }

    pub fn contains(&self, a: &FockOperator, tol: f64) -> bool {
        self.residual(a) < tol
    }

    /// Largest residual of a basis vector of `other` against `self`.
    pub fn inclusion_residual(&self, other: &FixedSpace) -> f64 {
        other
            .basis
            .iter()
            .map(|b| self.residual(b))
            .fold(0.0, f64::max)
    }

    /// Orthonormal basis of the complement of `sub` inside `self`.
    pub fn complement_of(&self, sub: &FixedSpace) -> FixedSpace {
        let projected: Vec<FockOperator> = self
            .basis
            .iter()
            .map(|b| b - &sub.project(b))
            .collect();
        FixedSpace::span(self.modes, &projected)
    }
}

/// Joint commutant of `unitaries`; `seed` drives the random Hermitian probe.
pub fn commutant(modes: usize, unitaries: &[FockOperator], seed: u64) -> Result<FixedSpace> {
    if modes > SOLVER_MAX_MODES {
        return Err(CarError::CapExceeded {
            modes,
            cap: SOLVER_MAX_MODES,
        });
    }
    for v in unitaries {
        if v.modes() != modes {
            return Err(CarError::DimensionMismatch {
                expected: modes,
                found: v.modes(),
            });
        }
    }
    let d = 1usize << modes;
    if unitaries.is_empty() {
        let basis = (0..d * d)
            .map(|k| {
                let mut m = DMatrix::zeros(d, d);
                m[(k % d, k / d)] = Complex64::new(1.0, 0.0);
                FockOperator::from_matrix_unchecked(modes, m)
            })
            .collect();
        return Ok(FixedSpace::from_orthonormal(modes, basis));
    }

    if unitaries.iter().all(is_diagonal) {
        return Ok(diagonal_commutant(modes, unitaries));
    }

    let mut rng = sample::rng(seed);
    let mut h = DMatrix::<Complex64>::zeros(d, d);
    for v in unitaries {
        let herm = v.matrix() + v.matrix().adjoint();
        let anti = (v.matrix() - v.matrix().adjoint()) * Complex64::new(0.0, 1.0);
        h += herm * Complex64::new(rng.random_range(-1.0..1.0), 0.0);
        h += anti * Complex64::new(rng.random_range(-1.0..1.0), 0.0);
    }
    let h = (&h + h.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = h.symmetric_eigen();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let q = DMatrix::from_fn(d, d, |i, j| eig.eigenvectors[(i, order[j])]);
    let values: Vec<f64> = order.iter().map(|&j| eig.eigenvalues[j]).collect();

    // eigenspaces as contiguous index ranges of the sorted spectrum
    let mut spaces: Vec<(usize, usize)> = Vec::new();
    let mut start = 0;
    for i in 1..=d {
        if i == d || values[i] - values[i - 1] > EIGEN_CLUSTER_TOL {
            spaces.push((start, i));
            start = i;
        }
    }

    let rotated: Vec<DMatrix<Complex64>> = unitaries
        .iter()
        .map(|v| q.adjoint() * v.matrix() * &q)
        .collect();

    // union-find over eigenspaces linked by some V
    let n = spaces.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for v in &rotated {
        for (a, &(ra, ea)) in spaces.iter().enumerate() {
            for (b, &(rb, eb)) in spaces.iter().enumerate().skip(a + 1) {
                let linked = (ra..ea)
                    .any(|i| (rb..eb).any(|j| v[(i, j)].norm() > NULLSPACE_TOL || v[(j, i)].norm() > NULLSPACE_TOL));
                if linked {
                    let (x, y) = (find(&mut parent, a), find(&mut parent, b));
                    parent[x] = y;
                }
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for s in 0..n {
        let root = find(&mut parent, s);
        groups.entry(root).or_default().push(s);
    }

    let mut basis = Vec::new();
    for members in groups.values() {
        let ranges: Vec<(usize, usize)> = members.iter().map(|&s| spaces[s]).collect();
        for block in group_nullspace(&ranges, &rotated) {
            let full = &q * block * q.adjoint();
            basis.push(FockOperator::from_matrix_unchecked(modes, full));
        }
    }
    Ok(FixedSpace::from_orthonormal(modes, basis))
}

fn is_diagonal(v: &FockOperator) -> bool {
    let d = v.dim();
    (0..d).all(|j| (0..d).all(|i| i == j || v.entry(i, j).norm() <= NULLSPACE_TOL))
}

/// For diagonal families the commutant is spanned by the matrix units
/// `E_ij` whose two diagonal entries agree for every `V`.
fn diagonal_commutant(modes: usize, unitaries: &[FockOperator]) -> FixedSpace {
    let d = 1usize << modes;
    let agree = |i: usize, j: usize| {
        unitaries
            .iter()
            .all(|v| (v.entry(i, i) - v.entry(j, j)).norm() <= NULLSPACE_TOL)
    };
    let mut basis = Vec::new();
    for j in 0..d {
        for i in 0..d {
            if agree(i, j) {
                let mut m = DMatrix::zeros(d, d);
                m[(i, j)] = Complex64::new(1.0, 0.0);
                basis.push(FockOperator::from_matrix_unchecked(modes, m));
            }
        }
    }
    FixedSpace::from_orthonormal(modes, basis)
}

/// Nullspace of `A -> V A - A V` over block-diagonal `A` supported on `ranges`,
/// returned as full matrices in the rotated basis.
fn group_nullspace(ranges: &[(usize, usize)], rotated: &[DMatrix<Complex64>]) -> Vec<DMatrix<Complex64>> {
    let d = rotated[0].nrows();
    let mut offsets = Vec::with_capacity(ranges.len());
    let mut unknowns = 0;
    for &(s, e) in ranges {
        offsets.push(unknowns);
        unknowns += (e - s) * (e - s);
    }
    // unknown for entry (i, j) of the block owning both i and j
    let locate = |i: usize| -> (usize, usize) {
        let g = ranges.iter().position(|&(s, e)| s <= i && i < e).expect("index in group");
        (g, i - ranges[g].0)
    };
    let var = |i: usize, j: usize| -> Option<usize> {
        let (gi, li) = locate(i);
        let (gj, lj) = locate(j);
        (gi == gj).then(|| offsets[gi] + li + lj * (ranges[gi].1 - ranges[gi].0))
    };
    let indices: Vec<usize> = ranges.iter().flat_map(|&(s, e)| s..e).collect();

    let mut rows: Vec<Vec<(usize, Complex64)>> = Vec::new();
    for v in rotated {
        for &p in &indices {
            for &qq in &indices {
                // (V A - A V)[p, q]
                let mut row: Vec<(usize, Complex64)> = Vec::new();
                for &s in &indices {
                    if let Some(k) = var(s, qq) {
                        let c = v[(p, s)];
                        if c.norm() > 0.0 {
                            row.push((k, c));
                        }
                    }
                    if let Some(k) = var(p, s) {
                        let c = v[(s, qq)];
                        if c.norm() > 0.0 {
                            row.push((k, -c));
                        }
                    }
                }
                if row.iter().any(|(_, c)| c.norm() > NULLSPACE_TOL * 1e-3) {
                    rows.push(row);
                }
            }
        }
    }

    let to_matrix = |coeffs: &[Complex64]| -> DMatrix<Complex64> {
        let mut m = DMatrix::zeros(d, d);
        for (g, &(s, e)) in ranges.iter().enumerate() {
            let w = e - s;
            for lj in 0..w {
                for li in 0..w {
                    m[(s + li, s + lj)] = coeffs[offsets[g] + li + lj * w];
                }
            }
        }
        m
    };

    let null: Vec<Vec<Complex64>> = if rows.is_empty() {
        (0..unknowns)
            .map(|k| {
                let mut c = vec![Complex64::new(0.0, 0.0); unknowns];
                c[k] = Complex64::new(1.0, 0.0);
                c
            })
            .collect()
    } else {
        // pad to at least square so every right singular vector is returned
        let mut eq = DMatrix::<Complex64>::zeros(rows.len().max(unknowns), unknowns);
        for (r, row) in rows.iter().enumerate() {
            for &(k, c) in row {
                eq[(r, k)] += c;
            }
        }
        let svd = eq.svd(false, true);
        let v_t = svd.v_t.expect("requested V^T");
        svd.singular_values
            .iter()
            .enumerate()
            .filter(|(_, &s)| s < NULLSPACE_TOL)
            .map(|(i, _)| v_t.row(i).iter().map(|z| z.conj()).collect())
            .collect()
    };
    null.iter().map(|c| to_matrix(c)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::mode_number_operator;

    fn phase_unitary(modes: usize, mask: u64, theta: f64) -> FockOperator {
        let diag: Vec<Complex64> = (0..1usize << modes)
            .map(|k| Complex64::from_polar(1.0, theta * ((k as u64 & mask).count_ones() as f64)))
            .collect();
        FockOperator::diagonal(modes, &diag)
    }

    #[test]
    fn empty_family_gives_everything() {
        assert_eq!(commutant(2, &[], 0).unwrap().dim(), 16);
    }

    #[test]
    fn single_mode_grading() {
        let v = phase_unitary(2, 0b10, 1.0);
        let fixed = commutant(2, &[v], 3).unwrap();
        assert_eq!(fixed.dim(), 8);
        assert!(fixed.contains(&mode_number_operator(2, 0b10), 1e-10));
        for b in fixed.basis() {
            assert!(b.commutator(&mode_number_operator(2, 0b10)).max_abs_entry() < 1e-10);
        }
    }

    #[test]
    fn basis_is_orthonormal() {
        let fixed = commutant(3, &[phase_unitary(3, 0b001, 1.0), phase_unitary(3, 0b110, 1.0)], 5).unwrap();
        for (i, a) in fixed.basis().iter().enumerate() {
            for (j, b) in fixed.basis().iter().enumerate() {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((a.hs_inner(b) - Complex64::new(expected, 0.0)).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn non_diagonal_family() {
        use crate::automorphism::ModePermutation;
        let swap = ModePermutation::new(vec![1, 0]).unwrap();
        let v = {
            let d = 4;
            let mut m = DMatrix::zeros(d, d);
            for k in 0..d {
                let (s, t) = swap.map_state(k);
                m[(t, k)] = Complex64::new(s, 0.0);
            }
            FockOperator::from_matrix(2, m).unwrap()
        };
        let fixed = commutant(2, &[v.clone()], 7).unwrap();
        // the signed swap has eigenvalues +1, +1, -1, -1
        assert_eq!(fixed.dim(), 8);
        for b in fixed.basis() {
            assert!(b.commutator(&v).max_abs_entry() < 1e-9);
        }
    }

    #[test]
    fn general_path_matches_diagonal_path() {
        let family = [phase_unitary(3, 0b001, 1.0), phase_unitary(3, 0b110, 0.7)];
        let direct = commutant(3, &family, 1).unwrap();
        // conjugating by a fixed unitary forces the eigenspace solver
        let w = {
            let mut r = sample::rng(8);
            FockOperator::from_matrix(3, sample::haar_unitary(8, &mut r)).unwrap()
        };
        let rotated: Vec<FockOperator> = family.iter().map(|v| &(&w * v) * &w.adjoint()).collect();
        let solved = commutant(3, &rotated, 1).unwrap();
        assert_eq!(solved.dim(), direct.dim());
        for b in direct.basis() {
            let moved = &(&w * b) * &w.adjoint();
            assert!(solved.residual(&moved) < 1e-9);
        }
    }

    #[test]
    fn cap_enforced() {
        assert!(matches!(commutant(7, &[], 0), Err(CarError::CapExceeded { cap: 6, .. })));
    }
}
