//! Jordan-Wigner realization of the CAR generators.
//!
//! Basis state `|K>` is the integer bitmask of the occupied set `K`. The
//! annihilator of mode `i` acts as
//! `a_i |K> = (-1)^{#{j in K : j < i}} |K \ {i}>` when `i` is in `K` and as
//! zero otherwise. Every module shares this convention.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::operator::FockOperator;
use super::space::{FieldVector, ModeSpace};
use crate::error::Result;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Jordan-Wigner sign picked up by an elementary operator on `mode` acting on `state`.
#[inline]
pub fn jw_sign(state: usize, mode: usize) -> f64 {
    if (state & ((1usize << mode) - 1)).count_ones() % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Applies `a_mode` to a basis state; `None` when the mode is empty.
#[inline]
pub fn annihilate(state: usize, mode: usize) -> Option<(f64, usize)> {
    if state >> mode & 1 == 1 {
        Some((jw_sign(state, mode), state & !(1 << mode)))
    } else {
        None
    }
}

/// Applies `a_mode^*` to a basis state; `None` when the mode is occupied.
#[inline]
pub fn create(state: usize, mode: usize) -> Option<(f64, usize)> {
    if state >> mode & 1 == 0 {
        Some((jw_sign(state, mode), state | 1 << mode))
    } else {
        None
    }
}

/// Creation or annihilation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldKind {
    Creation,
    Annihilation,
}

/// Sparse linear combination `sum_i c_i a_i` (or `sum_i c_i a_i^*`) of
/// elementary operators. Products with dense operators cost O(m 4^m).
#[derive(Debug, Clone, PartialEq)]
pub struct FieldOp {
    modes: usize,
    kind: FieldKind,
    coeffs: Vec<Complex64>,
}

impl FieldOp {
    /// `a(f) = sum_i conj(f_i) sqrt(w_i) a_i`.
    pub fn annihilator(space: &ModeSpace, f: &FieldVector) -> Result<Self> {
        space.check_dense()?;
        space.check_field(f)?;
        let coeffs = space.to_orthonormal(f).into_iter().map(|z| z.conj()).collect();
        Ok(Self {
            modes: space.mode_count(),
            kind: FieldKind::Annihilation,
            coeffs,
        })
    }

    /// `a(f)^* = sum_i f_i sqrt(w_i) a_i^*`.
    pub fn creator(space: &ModeSpace, f: &FieldVector) -> Result<Self> {
        Ok(Self::annihilator(space, f)?.adjoint())
    }

    /// Elementary `a_mode` (unweighted).
    pub fn elementary(modes: usize, mode: usize, kind: FieldKind) -> Self {
        let mut coeffs = vec![ZERO; modes];
        coeffs[mode] = Complex64::new(1.0, 0.0);
        Self {
            modes,
            kind,
            coeffs,
        }
    }

    pub fn kind(&self) -> FieldKind {
        self.kind
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    /// Coefficients on the elementary operators.
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn adjoint(&self) -> Self {
        Self {
            modes: self.modes,
            kind: match self.kind {
                FieldKind::Creation => FieldKind::Annihilation,
                FieldKind::Annihilation => FieldKind::Creation,
            },
            coeffs: self.coeffs.iter().map(|z| z.conj()).collect(),
        }
    }

    #[inline]
    fn step(&self, state: usize, mode: usize) -> Option<(f64, usize)> {
        match self.kind {
            FieldKind::Annihilation => annihilate(state, mode),
            FieldKind::Creation => create(state, mode),
        }
    }

    fn active(&self) -> Vec<(usize, Complex64)> {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != ZERO)
            .map(|(i, c)| (i, *c))
            .collect()
    }

    /// `self |state>` as `(target, amplitude)` pairs.
    pub(crate) fn act_on_state(&self, state: usize) -> Vec<(usize, Complex64)> {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != ZERO)
            .filter_map(|(mode, &c)| self.step(state, mode).map(|(sign, t)| (t, c * sign)))
            .collect()
    }

    /// `y += self * x` on a column.
    fn apply_into(&self, active: &[(usize, Complex64)], x: &[Complex64], y: &mut [Complex64]) {
        for (state, xs) in x.iter().enumerate() {
            if *xs == ZERO {
                continue;
            }
            for &(mode, c) in active {
                if let Some((sign, target)) = self.step(state, mode) {
                    y[target] += c * xs * sign;
                }
            }
        }
    }

    pub fn apply(&self, state: &DVector<Complex64>) -> DVector<Complex64> {
        let active = self.active();
        let mut out = DVector::zeros(state.len());
        self.apply_into(&active, state.as_slice(), out.as_mut_slice());
        out
    }

    pub fn to_dense(&self) -> FockOperator {
        let d = 1usize << self.modes;
        let mut mat = DMatrix::zeros(d, d);
        for (mode, c) in self.active() {
            for state in 0..d {
                if let Some((sign, target)) = self.step(state, mode) {
                    mat[(target, state)] += c * sign;
                }
            }
        }
        FockOperator::from_matrix_unchecked(self.modes, mat)
    }

    /// `self * x`.
    pub fn left_mul(&self, x: &FockOperator) -> FockOperator {
        assert_eq!(self.modes, x.modes());
        let d = x.dim();
        let active = self.active();
        let mut out = DMatrix::zeros(d, d);
        for (col_in, mut col_out) in x.matrix().column_iter().zip(out.column_iter_mut()) {
            self.apply_into(&active, col_in.as_slice(), col_out.as_mut_slice());
        }
        FockOperator::from_matrix_unchecked(self.modes, out)
    }

    /// `x * self`.
    pub fn right_mul(&self, x: &FockOperator) -> FockOperator {
        assert_eq!(self.modes, x.modes());
        let d = x.dim();
        let active = self.active();
        let src = x.matrix();
        let mut out = DMatrix::zeros(d, d);
        // column `state` of x*self collects columns `target` of x
        for state in 0..d {
            for &(mode, c) in &active {
                if let Some((sign, target)) = self.step(state, mode) {
                    let factor = c * sign;
                    let (src_col, mut dst_col) = (src.column(target), out.column_mut(state));
                    for (d, s) in dst_col.iter_mut().zip(src_col.iter()) {
                        *d += factor * s;
                    }
                }
            }
        }
        FockOperator::from_matrix_unchecked(self.modes, out)
    }
}

/// Elementary annihilator `a_i` on the Fock space of `space`.
pub fn elementary_annihilator(space: &ModeSpace, mode: usize) -> Result<FockOperator> {
    space.check_dense()?;
    space.check_mode(mode)?;
    Ok(FieldOp::elementary(space.mode_count(), mode, FieldKind::Annihilation).to_dense())
}

/// Smeared annihilator `a(f)`, antilinear in `f`.
pub fn smear(space: &ModeSpace, f: &FieldVector) -> Result<FockOperator> {
    Ok(FieldOp::annihilator(space, f)?.to_dense())
}

/// Smeared creator `a(f)^*`.
pub fn smear_creator(space: &ModeSpace, f: &FieldVector) -> Result<FockOperator> {
    Ok(FieldOp::creator(space, f)?.to_dense())
}

/// Occupation basis vector `|K>` for the listed modes.
pub fn fock_state(space: &ModeSpace, occupied: &[usize]) -> Result<DVector<Complex64>> {
    space.check_dense()?;
    let mut mask = 0usize;
    for &mode in occupied {
        space.check_mode(mode)?;
        mask |= 1 << mode;
    }
    let mut v = DVector::zeros(space.fock_dim());
    v[mask] = Complex64::new(1.0, 0.0);
    Ok(v)
}

/// Total number operator `sum_i a_i^* a_i`.
pub fn number_operator(modes: usize) -> FockOperator {
    mode_number_operator(modes, (1u64 << modes) - 1)
}

/// Number operator counting the modes in `mask`.
pub fn mode_number_operator(modes: usize, mask: u64) -> FockOperator {
    let diag: Vec<Complex64> = (0..1usize << modes)
        .map(|k| Complex64::new(((k as u64) & mask).count_ones() as f64, 0.0))
        .collect();
    FockOperator::diagonal(modes, &diag)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_mode_annihilator() {
        let space = ModeSpace::uniform(1, 1).unwrap();
        let a = elementary_annihilator(&space, 0).unwrap();
        assert_eq!(a.entry(0, 1), Complex64::new(1.0, 0.0));
        assert_eq!(a.entry(1, 0), ZERO);
        assert_eq!(a.entry(0, 0), ZERO);
        assert_eq!(a.entry(1, 1), ZERO);
    }

    #[test]
    fn distinct_modes_anticommute() {
        let space = ModeSpace::uniform(2, 1).unwrap();
        let a0 = elementary_annihilator(&space, 0).unwrap();
        let a1 = elementary_annihilator(&space, 1).unwrap();
        assert_eq!(a0.anticommutator(&a1).operator_norm(), 0.0);
        assert_eq!(a0.anticommutator(&a1.adjoint()).operator_norm(), 0.0);
    }

    #[test]
    fn mode_index_out_of_range() {
        let space = ModeSpace::uniform(2, 1).unwrap();
        assert!(elementary_annihilator(&space, 2).is_err());
        assert!(fock_state(&space, &[5]).is_err());
    }

    #[test]
    fn vacuum_is_annihilated() {
        let space = ModeSpace::uniform(3, 1).unwrap();
        let vac = fock_state(&space, &[]).unwrap();
        for i in 0..3 {
            let a = elementary_annihilator(&space, i).unwrap();
            assert_eq!(a.apply(&vac).norm(), 0.0);
        }
        let one = elementary_annihilator(&space, 0).unwrap().adjoint().apply(&vac);
        assert_eq!(one, fock_state(&space, &[0]).unwrap());
    }

    #[test]
    fn basis_states_orthonormal() {
        let space = ModeSpace::uniform(2, 1).unwrap();
        let sets: [&[usize]; 4] = [&[], &[0], &[1], &[0, 1]];
        for (i, a) in sets.iter().enumerate() {
            for (j, b) in sets.iter().enumerate() {
                let ip = fock_state(&space, a).unwrap().dotc(&fock_state(&space, b).unwrap());
                assert_eq!(ip.re, if i == j { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn sparse_products_match_dense() {
        let space = ModeSpace::new(3, 1, vec![1.0, 2.0, 0.5]).unwrap();
        let f = FieldVector::new(vec![
            Complex64::new(0.3, -1.0),
            Complex64::new(1.2, 0.4),
            Complex64::new(-0.7, 0.1),
        ]);
        let op = FieldOp::annihilator(&space, &f).unwrap();
        let x = &smear(&space, &FieldVector::from_real(&[1.0, -2.0, 0.5])).unwrap().adjoint()
            + &FockOperator::identity(3);
        let dense = op.to_dense();
        assert!(op.left_mul(&x).distance(&(&dense * &x)) < 1e-13);
        assert!(op.right_mul(&x).distance(&(&x * &dense)) < 1e-13);
        let cr = op.adjoint();
        assert!(cr.to_dense().distance(&dense.adjoint()) < 1e-14);
        assert!(cr.left_mul(&x).distance(&(&dense.adjoint() * &x)) < 1e-13);
    }
}
