//! Numerical lab for the CAR algebra over finite mode spaces.

pub mod automorphism;
pub mod commutant;
pub mod error;
pub mod fock;
pub mod gauge;
pub mod harness;
pub mod localization;
pub mod partition_builder;
pub mod sample;
pub mod twirl;

pub use error::{CarError, Result};
