use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{check_region, Region};
use crate::error::{CarError, Result};
use crate::fock::{annihilate, create, FockOperator, ModeSpace};

/// Largest mode count for the monomial expansion (4^m coefficients).
pub const EXPANSION_MAX_MODES: usize = 8;

/// `a*_I a_J |state>` as `(sign, target)`, where `a*_I` creates in increasing
/// mode order and `a_J = (a*_J)^*`.
fn monomial_action(creators: usize, annihilators: usize, state: usize) -> Option<(f64, usize)> {
    let mut sign = 1.0;
    let mut s = state;
    let mut j = annihilators;
    while j != 0 {
        let mode = j.trailing_zeros() as usize;
        let (sg, next) = annihilate(s, mode)?;
        sign *= sg;
        s = next;
        j &= j - 1;
    }
    let mut i = creators;
    while i != 0 {
        let mode = usize::BITS as usize - 1 - i.leading_zeros() as usize;
        let (sg, next) = create(s, mode)?;
        sign *= sg;
        s = next;
        i &= !(1 << mode);
    }
    Some((sign, s))
}

/// The normal-ordered basis monomial `a*_I a_J` for mode bitmasks `I`, `J`.
pub fn normal_monomial_operator(modes: usize, creators: usize, annihilators: usize) -> FockOperator {
    let d = 1usize << modes;
    let mut mat = DMatrix::zeros(d, d);
    for col in 0..d {
        if let Some((sign, row)) = monomial_action(creators, annihilators, col) {
            mat[(row, col)] = Complex64::new(sign, 0.0);
        }
    }
    FockOperator::from_matrix_unchecked(modes, mat)
}

/// Coefficients `c_{I,J}` of `A = sum c_{I,J} a*_I a_J`.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalOrderExpansion {
    modes: usize,
    coeffs: Vec<Complex64>,
}

impl NormalOrderExpansion {
    pub fn modes(&self) -> usize {
        self.modes
    }

    /// `c_{I,J}` for mode bitmasks `I`, `J`.
    pub fn get(&self, creators: usize, annihilators: usize) -> Complex64 {
        self.coeffs[creators << self.modes | annihilators]
    }

    /// Entries with `|c| > tol` as `(I, J, c)`.
    pub fn nonzero(&self, tol: f64) -> Vec<(usize, usize, Complex64)> {
        let mask = (1usize << self.modes) - 1;
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| c.norm() > tol)
            .map(|(k, &c)| (k >> self.modes, k & mask, c))
            .collect()
    }

    /// Keeps the terms whose creators and annihilators all lie in `mask`.
    pub fn restricted(&self, mask: u64) -> Self {
        let d = 1usize << self.modes;
        let outside = !(mask as usize);
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(k, &c)| {
                let (i, j) = (k / d, k % d);
                if (i | j) & outside == 0 {
                    c
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
            .collect();
        Self {
            modes: self.modes,
            coeffs,
        }
    }

    /// `sum c_{I,J} a*_I a_J`, accumulated entrywise: the term `(I, J)`
    /// contributes to `<I+R|.|J+R>` for every `R` disjoint from `I` and `J`.
    pub fn reconstruct(&self) -> FockOperator {
        let m = self.modes;
        let d = 1usize << m;
        let full = d - 1;
        let mut mat = DMatrix::<Complex64>::zeros(d, d);
        for (i, j, c) in self.nonzero(0.0) {
            let free = full & !(i | j);
            let mut r = free;
            loop {
                let col = j | r;
                if let Some((sign, row)) = monomial_action(i, j, col) {
                    mat[(row, col)] += c * sign;
                }
                if r == 0 {
                    break;
                }
                r = (r - 1) & free;
            }
        }
        FockOperator::from_matrix_unchecked(m, mat)
    }
}

/// Normal-order expansion by a triangular solve over `|K| + |L|`:
/// `<K|A|L> = sum_{R in K∩L} c_{K-R, L-R} <K|a*_{K-R} a_{L-R}|L>`.
pub fn normal_order_expand(a: &FockOperator) -> Result<NormalOrderExpansion> {
    let m = a.modes();
    if m > EXPANSION_MAX_MODES {
        return Err(CarError::CapExceeded {
            modes: m,
            cap: EXPANSION_MAX_MODES,
        });
    }
    let d = 1usize << m;
    let mut pairs: Vec<(usize, usize)> = (0..d).flat_map(|k| (0..d).map(move |l| (k, l))).collect();
    pairs.sort_by_key(|&(k, l)| k.count_ones() + l.count_ones());
    let mut coeffs = vec![Complex64::new(0.0, 0.0); d * d];
    for (k, l) in pairs {
        let common = k & l;
        let mut acc = a.entry(k, l);
        let mut r = common;
        while r != 0 {
            let (i, j) = (k & !r, l & !r);
            let c = coeffs[i << m | j];
            if c != Complex64::new(0.0, 0.0) {
                let (sign, target) = monomial_action(i, j, l).expect("R is disjoint from I and J");
                debug_assert_eq!(target, k);
                acc -= c * sign;
            }
            r = (r - 1) & common;
        }
        let (lead, _) = monomial_action(k, l, l).expect("a*_K a_L maps |L> to |K>");
        coeffs[k << m | l] = acc * lead;
    }
    Ok(NormalOrderExpansion { modes: m, coeffs })
}

/// `nu_W` through the monomial expansion: terms with a creator or
/// annihilator outside `W` are dropped.
pub fn restrict_oracle(space: &ModeSpace, a: &FockOperator, w: &Region) -> Result<FockOperator> {
    check_region(space, w, a)?;
    Ok(normal_order_expand(a)?.restricted(w.mode_mask()).reconstruct())
}
