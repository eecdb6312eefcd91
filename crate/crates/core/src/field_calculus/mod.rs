//! Spectral differential geometry on the flat periodic square.

mod grid;
pub mod identities;
pub mod interp;
pub mod ops;
mod spectral;

use thiserror::Error;

pub use grid::{CovectorField, GridField, GridSpec, ScalarField, Tensor2Field, VectorField};
pub use identities::{advected_expansion, lemma2_check, lemma2_forms};
pub use interp::{interpolate_scalar, interpolate_vector, wrap};
pub use ops::{
    ad_field, c_operator, dealias, directional_derivative, div_tensor, divergence, gradient,
    hessian_contract, inner_product, jacobi_bracket, jacobian, laplacian, leray_project,
    lie_deriv_oneform, lie_deriv_tensor2, partial, scalar_transport, solve_poisson,
};
pub use spectral::Spectrum;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FieldError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("fields live on different grids")]
    GridMismatch,
}

/// Metric flag. Only the flat torus is implemented; curvature terms are
/// dropped on the strength of this flag and nowhere else.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Geometry {
    #[default]
    Flat,
    Curved,
}
