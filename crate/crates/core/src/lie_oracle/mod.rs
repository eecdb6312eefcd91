//! Finite-dimensional matrix-group oracle for the Magnus-expansion formulas.
//!
//! Here `ad` is the plain commutator `XY − YX`; the vector-field sign
//! convention of [`crate::field_calculus`] does not apply.

mod family;
mod magnus;
mod matrix;

use thiserror::Error;

pub use family::{uniform_grid, FlowFamily, Path};
pub use magnus::{
    composite_velocity, first_order_reference, fluctuation_map, second_order_reference, verify_first_order,
    verify_second_order, EPS_LEVELS, EPS_RATIO,
};
pub use matrix::{ad, bernoulli, dexp_rt, expm, expm_minus_identity, magnus_rhs, AlgebraElement, GroupElement, MAX_CONDITION};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LieError {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("matrix exponential overflowed (1-norm {0:e})")]
    Overflow(f64),
    #[error("non-finite matrix entries")]
    NonFinite,
    #[error("group element is singular or ill-conditioned (condition {0:e})")]
    Singular(f64),
    #[error("Bernoulli index {0} exceeds 20")]
    BernoulliIndex(usize),
    #[error("time index {0} is not interior to the time grid")]
    BoundaryIndex(usize),
    #[error("time grid must be strictly increasing with at least 3 samples")]
    InvalidTimeGrid,
    #[error("step {0} must be positive and finite")]
    InvalidStep(f64),
}
