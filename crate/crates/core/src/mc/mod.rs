//! Monte Carlo checks of the closure: fluctuation ensembles, the Itô
//! martingale property and a stochastic particle flow.

mod ensemble;
mod martingale;
mod particles;

use thiserror::Error;

use crate::correlation::CorrelationError;
use crate::field_calculus::FieldError;

pub use ensemble::{
    bracket_dealiased, compare_with_pde, estimate_f, estimate_mean, step_mean_pde, step_w_ensemble, EnsembleSnapshot,
    EnsembleState, ErrorReport, FEstimate, MeanEstimate, BIAS_PER_DT, SIGMA_BAND,
};
pub use martingale::{martingale_check, Anticipating, BrownianAdapted, Constant, Integrand};
pub use particles::{simulate_particles, ParticleCloud};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum McError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Correlation(#[from] CorrelationError),
    #[error("ensemble needs at least 2 members, got {0}")]
    TooFewMembers(usize),
    #[error("antithetic ensembles need an even member count, got {0}")]
    OddAntithetic(usize),
    #[error("time grids differ: {0}")]
    TimeGridMismatch(String),
    #[error("invalid parameter: {0}")]
    InvalidParams(String),
}
