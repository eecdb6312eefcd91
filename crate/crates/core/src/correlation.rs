//! Transport of the fluctuation correlation tensor `F = E[w ⊗ w]`:
//! `∂_t F + L_ū F = Σ ξ_i ⊗ ξ_i`.

use thiserror::Error;

use crate::field_calculus::ops::dealias;
use crate::field_calculus::{divergence, lie_deriv_tensor2, FieldError, GridField, GridSpec, Tensor2Field, VectorField};
use crate::presets;

/// Divergence tolerance for noise fields.
pub const DIV_TOL: f64 = 1e-10;
/// Relative tolerance for the monitored minimum eigenvalue of `F`.
pub const PSD_TOL: f64 = 1e-8;
/// Largest admissible Courant number `dt ‖ū‖_∞ / h`.
pub const CFL_MAX: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CorrelationError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("noise basis is empty")]
    EmptyBasis,
    #[error("noise field {index} has divergence {div:e}")]
    NotDivergenceFree { index: usize, div: f64 },
    #[error("correlation tensor is not symmetric")]
    Asymmetric,
    #[error("time step {dt:e} exceeds the CFL limit {limit:e}")]
    Cfl { dt: f64, limit: f64 },
    #[error("time step {0:e} must be positive and finite")]
    InvalidStep(f64),
}

/// Prescribed, divergence-free, time-constant noise fields `ξ_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseBasis {
    grid: GridSpec,
    xi: Vec<VectorField>,
}

impl NoiseBasis {
    pub fn new(grid: GridSpec, xi: Vec<VectorField>) -> Result<Self, CorrelationError> {
        for (index, f) in xi.iter().enumerate() {
            if f.grid() != grid {
                return Err(FieldError::GridMismatch.into());
            }
            let div = divergence(f).sup_norm();
            if div > DIV_TOL {
                return Err(CorrelationError::NotDivergenceFree { index, div });
            }
        }
        Ok(NoiseBasis { grid, xi })
    }

    pub fn empty(grid: GridSpec) -> Self {
        NoiseBasis { grid, xi: Vec::new() }
    }

    /// `n_noise` random stream-function fields with modes `≤ band`, each
    /// scaled to sup norm `amplitude`. `band` is clipped below `n/4`.
    pub fn random(grid: GridSpec, n_noise: usize, band: i64, amplitude: f64, seed: u64) -> Result<Self, CorrelationError> {
        let band = band.min(grid.n() as i64 / 4 - 1).max(1);
        let mut rng = presets::seeded(seed);
        let xi = (0..n_noise).map(|_| presets::random_div_free(&mut rng, grid, band, amplitude)).collect();
        Self::new(grid, xi)
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn fields(&self) -> &[VectorField] {
        &self.xi
    }

    pub fn len(&self) -> usize {
        self.xi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xi.is_empty()
    }
}

/// `F` at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationState {
    pub f: Tensor2Field,
    pub t: f64,
}

impl CorrelationState {
    /// Fluctuations start at the identity map, so `F₀ = 0`.
    pub fn zero(grid: GridSpec) -> Self {
        CorrelationState { f: Tensor2Field::zeros(grid), t: 0.0 }
    }

    pub fn new(f: Tensor2Field, t: f64) -> Result<Self, CorrelationError> {
        if !f.is_symmetric() {
            return Err(CorrelationError::Asymmetric);
        }
        Ok(CorrelationState { f, t })
    }

    /// Smallest pointwise eigenvalue of `F`.
    pub fn min_eigenvalue(&self) -> f64 {
        self.f.min_eigenvalue().values().iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// `min λ ≥ −PSD_TOL · ‖F‖_∞`.
    pub fn is_psd(&self) -> bool {
        self.min_eigenvalue() >= -PSD_TOL * self.f.sup_norm()
    }

    /// `∫ tr F dμ`
    pub fn trace_integral(&self) -> f64 {
        self.f.trace().integral()
    }
}

/// `Σ ξ_i ⊗ ξ_i`
pub fn forcing(basis: &NoiseBasis) -> Result<Tensor2Field, CorrelationError> {
    let (first, rest) = basis.xi.split_first().ok_or(CorrelationError::EmptyBasis)?;
    let mut f = Tensor2Field::outer(first, first)?;
    for x in rest {
        f = f + Tensor2Field::outer(x, x)?;
    }
    Ok(f)
}

/// `Σ ξ_i ⊗ ξ_i`, or zero for an empty basis.
pub fn forcing_or_zero(basis: &NoiseBasis) -> Tensor2Field {
    forcing(basis).unwrap_or_else(|_| Tensor2Field::zeros(basis.grid))
}

/// `−L_ū F + Σ ξ_i ⊗ ξ_i` without dealiasing.
pub fn f_rhs(ubar: &VectorField, f: &Tensor2Field, basis: &NoiseBasis) -> Result<Tensor2Field, CorrelationError> {
    if basis.grid != f.grid() {
        return Err(FieldError::GridMismatch.into());
    }
    Ok(forcing_or_zero(basis) - lie_deriv_tensor2(ubar, f)?)
}

/// Right-hand side used by the time steppers: the transport term is
/// 2/3-truncated, the forcing is not.
pub fn f_rhs_dealiased(ubar: &VectorField, f: &Tensor2Field, forcing: &Tensor2Field) -> Result<Tensor2Field, CorrelationError> {
    Ok(forcing - &dealias(&lie_deriv_tensor2(ubar, f)?))
}

/// Largest stable step for velocity `u`.
pub fn cfl_limit(u: &VectorField) -> f64 {
    let m = u.sup_norm();
    if m == 0.0 {
        f64::INFINITY
    } else {
        CFL_MAX * u.grid().spacing() / m
    }
}

pub fn check_cfl(dt: f64, u: &VectorField) -> Result<(), CorrelationError> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(CorrelationError::InvalidStep(dt));
    }
    let limit = cfl_limit(u);
    if dt > limit {
        return Err(CorrelationError::Cfl { dt, limit });
    }
    Ok(())
}

/// One classical RK4 step of the `F` equation along a prescribed mean flow.
pub fn step_f(
    state: &CorrelationState,
    ubar_of_t: impl Fn(f64) -> VectorField,
    basis: &NoiseBasis,
    dt: f64,
) -> Result<CorrelationState, CorrelationError> {
    if !state.f.is_symmetric() {
        return Err(CorrelationError::Asymmetric);
    }
    let t = state.t;
    let u0 = ubar_of_t(t);
    check_cfl(dt, &u0)?;
    let uh = ubar_of_t(t + 0.5 * dt);
    let u1 = ubar_of_t(t + dt);
    let g = forcing_or_zero(basis);
    let f = &state.f;
    let k1 = f_rhs_dealiased(&u0, f, &g)?;
    let k2 = f_rhs_dealiased(&uh, &f.plus_scaled(0.5 * dt, &k1), &g)?;
    let k3 = f_rhs_dealiased(&uh, &f.plus_scaled(0.5 * dt, &k2), &g)?;
    let k4 = f_rhs_dealiased(&u1, &f.plus_scaled(dt, &k3), &g)?;
    let mut next = f.clone();
    next.axpy(dt / 6.0, &k1);
    next.axpy(dt / 3.0, &k2);
    next.axpy(dt / 3.0, &k3);
    next.axpy(dt / 6.0, &k4);
    Ok(CorrelationState { f: next, t: t + dt })
}
