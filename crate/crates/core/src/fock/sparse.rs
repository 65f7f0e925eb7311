use num_complex::Complex64;

use super::field_op::FieldOp;
use super::operator::FockOperator;
use nalgebra::DMatrix;

/// Column-sparse operator on Fock space. Products of a few field operators
/// have at most `m^k` entries per column, so words in `a(f)`, `a(f)^*` stay
/// cheap at the dense cap where a dense product would not.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOperator {
    modes: usize,
    /// Column `k` as `(row, value)` sorted by row, no duplicates.
    cols: Vec<Vec<(usize, Complex64)>>,
}

fn merge(mut entries: Vec<(usize, Complex64)>) -> Vec<(usize, Complex64)> {
    entries.sort_unstable_by_key(|e| e.0);
    let mut out: Vec<(usize, Complex64)> = Vec::with_capacity(entries.len());
    for (row, v) in entries {
        match out.last_mut() {
            Some(last) if last.0 == row => last.1 += v,
            _ => out.push((row, v)),
        }
    }
    out
}

impl SparseOperator {
    pub fn identity(modes: usize) -> Self {
        Self::scalar(modes, Complex64::new(1.0, 0.0))
    }

    pub fn scalar(modes: usize, c: Complex64) -> Self {
        Self {
            modes,
            cols: (0..1usize << modes).map(|k| vec![(k, c)]).collect(),
        }
    }

    pub fn from_field(op: &FieldOp) -> Self {
        Self {
            modes: op.modes(),
            cols: (0..1usize << op.modes()).map(|k| merge(op.act_on_state(k))).collect(),
        }
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    /// `self * other`.
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.modes, other.modes);
        let cols = other
            .cols
            .iter()
            .map(|col| {
                let mut acc = Vec::new();
                for &(mid, x) in col {
                    acc.extend(self.cols[mid].iter().map(|&(row, y)| (row, y * x)));
                }
                merge(acc)
            })
            .collect();
        Self {
            modes: self.modes,
            cols,
        }
    }

    /// `self + c * other`.
    pub fn add_scaled(&self, other: &Self, c: Complex64) -> Self {
        assert_eq!(self.modes, other.modes);
        let cols = self
            .cols
            .iter()
            .zip(&other.cols)
            .map(|(a, b)| {
                let mut acc = a.clone();
                acc.extend(b.iter().map(|&(r, v)| (r, v * c)));
                merge(acc)
            })
            .collect();
        Self {
            modes: self.modes,
            cols,
        }
    }

    /// `{self, other}`.
    pub fn anticommutator(&self, other: &Self) -> Self {
        self.mul(other).add_scaled(&other.mul(self), Complex64::new(1.0, 0.0))
    }

    /// `[self, other]`.
    pub fn commutator(&self, other: &Self) -> Self {
        self.mul(other).add_scaled(&other.mul(self), Complex64::new(-1.0, 0.0))
    }

    pub fn adjoint(&self) -> Self {
        let mut cols: Vec<Vec<(usize, Complex64)>> = vec![Vec::new(); self.cols.len()];
        for (k, col) in self.cols.iter().enumerate() {
            for &(row, v) in col {
                cols[row].push((k, v.conj()));
            }
        }
        Self {
            modes: self.modes,
            cols,
        }
    }

    /// Schur-test bound `sqrt(|A|_1 |A|_inf)`, an upper bound on the spectral norm.
    pub fn norm_bound(&self) -> f64 {
        let mut row_sums = vec![0.0; self.cols.len()];
        let mut max_col: f64 = 0.0;
        for col in &self.cols {
            let mut s = 0.0;
            for &(row, v) in col {
                s += v.norm();
                row_sums[row] += v.norm();
            }
            max_col = max_col.max(s);
        }
        (max_col * row_sums.into_iter().fold(0.0, f64::max)).sqrt()
    }

    /// Spectral norm by power iteration on `A^* A` from a fixed dense start.
    pub fn spectral_norm(&self, iterations: usize) -> f64 {
        let d = self.cols.len();
        let gram = self.adjoint().mul(self);
        let mut x: Vec<Complex64> = (0..d)
            .map(|k| Complex64::new(1.0 + (k as f64 * 0.618).fract(), (k as f64 * 0.414).fract()))
            .collect();
        let mut lambda = 0.0;
        for _ in 0..iterations {
            let norm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm == 0.0 {
                return 0.0;
            }
            x.iter_mut().for_each(|z| *z /= norm);
            let mut y = vec![Complex64::new(0.0, 0.0); d];
            for (k, col) in gram.cols.iter().enumerate() {
                for &(row, v) in col {
                    y[row] += v * x[k];
                }
            }
            let next: f64 = x.iter().zip(&y).map(|(a, b)| (a.conj() * b).re).sum();
            let converged = (next - lambda).abs() <= 1e-15 * next.abs();
            lambda = next;
            x = y;
            if converged {
                break;
            }
        }
        lambda.max(0.0).sqrt()
    }

    pub fn to_dense(&self) -> FockOperator {
        let d = self.cols.len();
        let mut mat = DMatrix::zeros(d, d);
        for (k, col) in self.cols.iter().enumerate() {
            for &(row, v) in col {
                mat[(row, k)] = v;
            }
        }
        FockOperator::from_matrix_unchecked(self.modes, mat)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{ModeSpace, FieldKind};
    use crate::sample;

    #[test]
    fn products_match_dense() {
        let s = ModeSpace::new(2, 2, vec![0.5, 2.0]).unwrap();
        let mut r = sample::rng(1);
        let f = FieldOp::annihilator(&s, &sample::random_field(&s, &mut r)).unwrap();
        let g = FieldOp::creator(&s, &sample::random_field(&s, &mut r)).unwrap();
        let sparse = SparseOperator::from_field(&f).mul(&SparseOperator::from_field(&g));
        let dense = &f.to_dense() * &g.to_dense();
        assert!(sparse.to_dense().distance(&dense) < 1e-14);
        assert!(sparse.adjoint().to_dense().distance(&dense.adjoint()) < 1e-14);
    }

    #[test]
    fn norms() {
        let a = SparseOperator::from_field(&FieldOp::elementary(3, 1, FieldKind::Annihilation));
        assert!((a.spectral_norm(50) - 1.0).abs() < 1e-14);
        assert!(a.norm_bound() >= 1.0);
        let zero = a.add_scaled(&a, Complex64::new(-1.0, 0.0));
        assert_eq!(zero.spectral_norm(50), 0.0);
        assert_eq!(zero.norm_bound(), 0.0);
    }
}
