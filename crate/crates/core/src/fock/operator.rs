use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{CarError, Result};

/// Dense operator on the Fock space of `m` modes, in the occupation basis
/// ordered by bitmask value (mode 0 is the least significant bit).
#[derive(Debug, Clone, PartialEq)]
pub struct FockOperator {
    modes: usize,
    mat: DMatrix<Complex64>,
}

impl FockOperator {
    pub fn identity(modes: usize) -> Self {
        let d = 1 << modes;
        Self {
            modes,
            mat: DMatrix::identity(d, d),
        }
    }

    pub fn zeros(modes: usize) -> Self {
        let d = 1 << modes;
        Self {
            modes,
            mat: DMatrix::zeros(d, d),
        }
    }

    pub fn from_matrix(modes: usize, mat: DMatrix<Complex64>) -> Result<Self> {
        let d = 1 << modes;
        if mat.nrows() != d || mat.ncols() != d {
            return Err(CarError::DimensionMismatch {
                expected: d,
                found: mat.nrows().max(mat.ncols()),
            });
        }
        Ok(Self { modes, mat })
    }

    pub(crate) fn from_matrix_unchecked(modes: usize, mat: DMatrix<Complex64>) -> Self {
        debug_assert_eq!(mat.nrows(), 1 << modes);
        Self { modes, mat }
    }

    /// Diagonal operator with the given entries.
    pub fn diagonal(modes: usize, diag: &[Complex64]) -> Self {
        let d = 1 << modes;
        assert_eq!(diag.len(), d);
        Self {
            modes,
            mat: DMatrix::from_diagonal(&DVector::from_column_slice(diag)),
        }
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.mat
    }

    pub(crate) fn matrix_mut(&mut self) -> &mut DMatrix<Complex64> {
        &mut self.mat
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.mat
    }

    /// Matrix element `<row| A |col>`.
    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.mat[(row, col)]
    }

    pub fn adjoint(&self) -> Self {
        Self {
            modes: self.modes,
            mat: self.mat.adjoint(),
        }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            modes: self.modes,
            mat: &self.mat * s,
        }
    }

    pub fn commutator(&self, other: &Self) -> Self {
        &(self * other) - &(other * self)
    }

    pub fn anticommutator(&self, other: &Self) -> Self {
        &(self * other) + &(other * self)
    }

    pub fn apply(&self, state: &DVector<Complex64>) -> DVector<Complex64> {
        &self.mat * state
    }

    /// Spectral norm (largest singular value).
    pub fn operator_norm(&self) -> f64 {
        if self.mat.iter().all(|z| *z == Complex64::new(0.0, 0.0)) {
            return 0.0;
        }
        self.mat
            .clone()
            .singular_values()
            .iter()
            .cloned()
            .fold(0.0, f64::max)
    }

    /// Schur-test bound `sqrt(|A|_1 |A|_inf) >= |A|`, computed in O(dim^2).
    pub fn norm_bound(&self) -> f64 {
        let d = self.dim();
        let mut row_sums = vec![0.0; d];
        let mut max_col: f64 = 0.0;
        for col in self.mat.column_iter() {
            let mut s = 0.0;
            for (i, z) in col.iter().enumerate() {
                let a = z.norm();
                s += a;
                row_sums[i] += a;
            }
            max_col = max_col.max(s);
        }
        let max_row = row_sums.into_iter().fold(0.0, f64::max);
        (max_col * max_row).sqrt()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.mat.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Hilbert-Schmidt inner product `tr(A^* B)`.
    pub fn hs_inner(&self, other: &Self) -> Complex64 {
        self.mat
            .iter()
            .zip(other.mat.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Spectral norm of `self - other`.
    pub fn distance(&self, other: &Self) -> f64 {
        (self - other).operator_norm()
    }

    /// Largest absolute entry.
    pub fn max_abs_entry(&self) -> f64 {
        self.mat.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        (self - &self.adjoint()).max_abs_entry() <= tol
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_hermitian_eigenvalue(&self) -> f64 {
        let h = (&self.mat + self.mat.adjoint()) * Complex64::new(0.5, 0.0);
        h.symmetric_eigenvalues()
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn trace(&self) -> Complex64 {
        self.mat.trace()
    }

    fn check_same(&self, other: &Self) {
        assert_eq!(
            self.modes, other.modes,
            "operators act on Fock spaces of different mode counts"
        );
    }
}

impl Add for &FockOperator {
    type Output = FockOperator;
    fn add(self, rhs: &FockOperator) -> FockOperator {
        self.check_same(rhs);
        FockOperator {
            modes: self.modes,
            mat: &self.mat + &rhs.mat,
        }
    }
}

impl Sub for &FockOperator {
    type Output = FockOperator;
    fn sub(self, rhs: &FockOperator) -> FockOperator {
        self.check_same(rhs);
        FockOperator {
            modes: self.modes,
            mat: &self.mat - &rhs.mat,
        }
    }
}

impl Mul for &FockOperator {
    type Output = FockOperator;
    fn mul(self, rhs: &FockOperator) -> FockOperator {
        self.check_same(rhs);
        FockOperator {
            modes: self.modes,
            mat: &self.mat * &rhs.mat,
        }
    }
}

impl Mul<Complex64> for &FockOperator {
    type Output = FockOperator;
    fn mul(self, rhs: Complex64) -> FockOperator {
        self.scale(rhs)
    }
}

impl Neg for &FockOperator {
    type Output = FockOperator;
    fn neg(self) -> FockOperator {
        FockOperator {
            modes: self.modes,
            mat: -&self.mat,
        }
    }
}

impl Add for FockOperator {
    type Output = FockOperator;
    fn add(self, rhs: FockOperator) -> FockOperator {
        &self + &rhs
    }
}

impl Sub for FockOperator {
    type Output = FockOperator;
    fn sub(self, rhs: FockOperator) -> FockOperator {
        &self - &rhs
    }
}

impl Mul for FockOperator {
    type Output = FockOperator;
    fn mul(self, rhs: FockOperator) -> FockOperator {
        &self * &rhs
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn identity_has_unit_norm() {
        assert!((FockOperator::identity(3).operator_norm() - 1.0).abs() < 1e-14);
        assert_eq!(FockOperator::zeros(2).operator_norm(), 0.0);
    }

    #[test]
    fn norm_bound_dominates_spectral_norm() {
        let m = DMatrix::from_fn(4, 4, |i, j| c((i * 3 + j) as f64 - 4.0, (i as f64) - (j as f64)));
        let a = FockOperator::from_matrix(2, m).unwrap();
        assert!(a.norm_bound() + 1e-12 >= a.operator_norm());
        assert!(a.frobenius_norm() + 1e-12 >= a.operator_norm());
    }

    #[test]
    fn rejects_wrong_shape() {
        let err = FockOperator::from_matrix(2, DMatrix::zeros(3, 3)).unwrap_err();
        assert_eq!(err, CarError::DimensionMismatch { expected: 4, found: 3 });
    }

    #[test]
    fn adjoint_reverses_products() {
        let a = FockOperator::from_matrix(1, DMatrix::from_row_slice(2, 2, &[c(1.0, 2.0), c(0.0, 1.0), c(3.0, 0.0), c(-1.0, 1.0)])).unwrap();
        let b = FockOperator::from_matrix(1, DMatrix::from_row_slice(2, 2, &[c(0.5, 0.0), c(2.0, -1.0), c(0.0, 0.0), c(1.0, 1.0)])).unwrap();
        let lhs = (&a * &b).adjoint();
        let rhs = &b.adjoint() * &a.adjoint();
        assert!(lhs.distance(&rhs) < 1e-14);
    }
}
