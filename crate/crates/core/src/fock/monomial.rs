use num_complex::Complex64;

use super::field_op::FieldOp;
use super::operator::FockOperator;
use super::space::{FieldVector, ModeSpace};
use crate::error::{CarError, Result};

/// Normal-ordered monomial `a(f_1)^* ... a(f_n)^* a(g_1) ... a(g_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Monomial {
    pub creators: Vec<FieldVector>,
    pub annihilators: Vec<FieldVector>,
}

impl Monomial {
    pub fn new(creators: Vec<FieldVector>, annihilators: Vec<FieldVector>) -> Self {
        Self {
            creators,
            annihilators,
        }
    }

    /// The empty monomial, represented by the identity.
    pub fn identity() -> Self {
        Self::new(Vec::new(), Vec::new())
    }

    /// `(creators, annihilators)`.
    pub fn degree(&self) -> (usize, usize) {
        (self.creators.len(), self.annihilators.len())
    }

    pub fn is_balanced(&self) -> bool {
        self.creators.len() == self.annihilators.len()
    }

    /// Monomial with every field replaced by `map(field)`.
    pub fn map_fields(&self, mut map: impl FnMut(&FieldVector) -> FieldVector) -> Self {
        Self {
            creators: self.creators.iter().map(&mut map).collect(),
            annihilators: self.annihilators.iter().map(&mut map).collect(),
        }
    }

    pub fn fields(&self) -> impl Iterator<Item = &FieldVector> {
        self.creators.iter().chain(&self.annihilators)
    }
}

/// Linear combination of monomials.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Polynomial {
    pub terms: Vec<(Complex64, Monomial)>,
}

impl Polynomial {
    pub fn new(terms: Vec<(Complex64, Monomial)>) -> Self {
        Self { terms }
    }

    pub fn single(m: Monomial) -> Self {
        Self::new(vec![(Complex64::new(1.0, 0.0), m)])
    }

    /// Fails on the first term whose creator and annihilator counts differ.
    pub fn check_balanced(&self) -> Result<()> {
        for (_, m) in &self.terms {
            if !m.is_balanced() {
                let (creators, annihilators) = m.degree();
                return Err(CarError::UnbalancedMonomial {
                    creators,
                    annihilators,
                });
            }
        }
        Ok(())
    }

    pub fn to_operator(&self, space: &ModeSpace) -> Result<FockOperator> {
        let mut acc = FockOperator::zeros(space.mode_count());
        for (c, m) in &self.terms {
            acc = &acc + &monomial_operator(space, m)?.scale(*c);
        }
        Ok(acc)
    }
}

/// Fock matrix of a normal-ordered monomial; the empty monomial is the identity.
pub fn monomial_operator(space: &ModeSpace, m: &Monomial) -> Result<FockOperator> {
    let ops = m
        .creators
        .iter()
        .map(|f| FieldOp::creator(space, f))
        .chain(m.annihilators.iter().map(|g| FieldOp::annihilator(space, g)))
        .collect::<Result<Vec<_>>>()?;
    let mut acc = FockOperator::identity(space.mode_count());
    for op in ops.iter().rev() {
        acc = op.left_mul(&acc);
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_monomial_is_identity() {
        let space = ModeSpace::uniform(2, 1).unwrap();
        let op = monomial_operator(&space, &Monomial::identity()).unwrap();
        assert_eq!(op, FockOperator::identity(2));
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let space = ModeSpace::uniform(2, 1).unwrap();
        let m = Monomial::new(vec![FieldVector::basis(3, 0)], vec![]);
        assert!(matches!(
            monomial_operator(&space, &m),
            Err(CarError::DimensionMismatch { expected: 2, found: 3 })
        ));
    }

    #[test]
    fn unbalanced_polynomial_rejected() {
        let p = Polynomial::single(Monomial::new(vec![FieldVector::basis(2, 0)], vec![]));
        assert_eq!(
            p.check_balanced(),
            Err(CarError::UnbalancedMonomial { creators: 1, annihilators: 0 })
        );
    }
}
