//! Fock representation of the CAR algebra over a finite mode space.
//!
//! The algebra of `m` modes is the full matrix algebra on the `2^m`
//! dimensional Fock space, so dense matrices represent it faithfully and
//! spectral norms are exact C*-norms.

mod field_op;
mod monomial;
mod operator;
mod space;
mod sparse;

pub use field_op::{
    annihilate, create, elementary_annihilator, fock_state, jw_sign, mode_number_operator,
    number_operator, smear, smear_creator, FieldKind, FieldOp,
};
pub use monomial::{monomial_operator, Monomial, Polynomial};
pub use operator::FockOperator;
pub use sparse::SparseOperator;
pub use space::{low_bits, FieldVector, ModeSpace, DEFAULT_MAX_MODES, HARD_MAX_MODES};

/// Spectral norm of `a`.
pub fn operator_norm(a: &FockOperator) -> f64 {
    a.operator_norm()
}
