//! Numerical laboratory for the stochastically averaged Lagrangian fluid model.

pub mod field_calculus;
pub mod convergence;
pub mod lie_oracle;
pub mod rng;
pub mod wick;
pub mod presets;
pub mod correlation;
pub mod lae_solver;
pub mod mc;
pub mod io;
