//! Forced anisotropic Lagrangian-averaged Euler equations on the flat torus.
//!
//! The state is the mean velocity `ū` together with the correlation tensor
//! `F`. The stepper integrates the resolved form
//!
//! `(1 − ε²C)∂_t ū = −(1 − ε²C)(ū·∇ū) + ε² Σ_j C(ū)_j ∇ū^j + ε² C_{ξ⊗ξ}(ū) − ∇p̃`
//!
//! with `C(q) = div(∇q·F)`, `C_G(q) = div(∇q·G)` and `p̃ = p + |ū|²/2`; the
//! momentum form `∂_t m + L_ū m = −dp`, `m = ū − ε²C(ū)`, serves as a check.

mod commutation;
mod linsolve;
mod stepper;

use thiserror::Error;

use crate::correlation::{CorrelationError, CorrelationState};
use crate::field_calculus::{
    c_operator, inner_product, jacobian, leray_project, CovectorField, FieldError, Geometry, GridField, GridSpec,
    ScalarField, Tensor2Field, VectorField,
};

pub use commutation::verify_commutation;
pub use linsolve::{InertiaOperator, SolveOutcome};
pub use stepper::{ep_residual, resolved_rhs, step_system, LaeSolver, ResolvedRhs};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LaeError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Correlation(#[from] CorrelationError),
    #[error("linear solve did not converge in {iters} iterations (relative residual {residual:e})")]
    LinearSolve { iters: usize, residual: f64 },
    #[error("curved geometry is not supported")]
    CurvedGeometry,
    #[error("invalid parameter: {0}")]
    InvalidParams(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub eps: f64,
    pub grid: GridSpec,
    pub dt: f64,
    pub t_end: f64,
    pub linsolve_tol: f64,
    pub linsolve_maxit: usize,
}

impl ModelParams {
    pub fn new(grid: GridSpec, eps: f64, dt: f64, t_end: f64) -> Result<Self, LaeError> {
        let p = ModelParams { eps, grid, dt, t_end, linsolve_tol: 1e-10, linsolve_maxit: 500 };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), LaeError> {
        let bad = |m: String| Err(LaeError::InvalidParams(m));
        if !(0.0..1.0).contains(&self.eps) {
            return bad(format!("eps = {} must lie in [0, 1)", self.eps));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return bad(format!("dt = {} must be positive", self.dt));
        }
        if !(self.t_end.is_finite() && self.t_end >= 0.0) {
            return bad(format!("t_end = {} must be non-negative", self.t_end));
        }
        if !(self.linsolve_tol > 0.0 && self.linsolve_tol <= 1e-4) {
            return bad(format!("linsolve_tol = {} must lie in (0, 1e-4]", self.linsolve_tol));
        }
        if self.linsolve_maxit == 0 {
            return bad("linsolve_maxit must be positive".into());
        }
        Ok(())
    }
}

/// `(ū, F)` at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowState {
    pub ubar: VectorField,
    pub corr: CorrelationState,
    pub t: f64,
}

impl FlowState {
    /// Projects `ū` and starts `F` at `F₀`.
    pub fn new(ubar: VectorField, f0: Tensor2Field) -> Result<Self, LaeError> {
        if ubar.grid() != f0.grid() {
            return Err(FieldError::GridMismatch.into());
        }
        Ok(FlowState { ubar: leray_project(&ubar), corr: CorrelationState::new(f0, 0.0)?, t: 0.0 })
    }

    pub fn grid(&self) -> GridSpec {
        self.ubar.grid()
    }

    pub fn f(&self) -> &Tensor2Field {
        &self.corr.f
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics {
    pub t: f64,
    pub action: f64,
    pub kinetic: f64,
    pub div_norm: f64,
    /// CG iterations spent in the most recent step.
    pub linsolve_iters: usize,
    pub pressure: ScalarField,
}

/// `m = ū^♭ − ε² C_F(ū)`; the curvature contribution vanishes on the flat torus.
pub fn momentum_map(ubar: &VectorField, f: &Tensor2Field, eps: f64, geometry: Geometry) -> Result<CovectorField, LaeError> {
    if geometry != Geometry::Flat {
        return Err(LaeError::CurvedGeometry);
    }
    let m = if eps == 0.0 { ubar.clone() } else { ubar.plus_scaled(-eps * eps, &c_operator(ubar, f)?) };
    Ok(m.flat())
}

/// Divergence-free `ū` with `P(1 − ε²C)ū = P m^♯`, to relative residual `tol`.
pub fn invert_momentum(m: &CovectorField, f: &Tensor2Field, eps: f64, tol: f64, maxit: usize) -> Result<VectorField, LaeError> {
    if m.grid() != f.grid() {
        return Err(FieldError::GridMismatch.into());
    }
    let op = InertiaOperator { f, eps };
    Ok(op.solve(&m.sharp(), tol, maxit)?.x)
}

/// `½∫|ū|² + ε²/2 ∫ F^{jk} ∂_j ū^i ∂_k ū^i`.
pub fn evaluate_action(ubar: &VectorField, f: &Tensor2Field, eps: f64) -> Result<f64, LaeError> {
    let kinetic = 0.5 * inner_product(ubar, ubar)?;
    if eps == 0.0 {
        return Ok(kinetic);
    }
    if ubar.grid() != f.grid() {
        return Err(FieldError::GridMismatch.into());
    }
    let j = jacobian(ubar);
    let mut dissip = 0.0;
    for i in 0..2 {
        for a in 0..2 {
            for b in 0..2 {
                let (fab, da, db) = (f.component(a, b), j.component(i, a), j.component(i, b));
                dissip += (0..fab.len()).map(|k| fab[k] * da[k] * db[k]).sum::<f64>();
            }
        }
    }
    Ok(kinetic + 0.5 * eps * eps * dissip * ubar.grid().cell_area())
}

/// `½⟨ū, ū⟩ − ε²/2 ⟨C(ū), ū⟩`, equal to [`evaluate_action`] by parts.
pub fn evaluate_action_by_parts(ubar: &VectorField, f: &Tensor2Field, eps: f64) -> Result<f64, LaeError> {
    let c = c_operator(ubar, f)?;
    Ok(0.5 * inner_product(ubar, ubar)? - 0.5 * eps * eps * inner_product(&c, ubar)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field_calculus::{divergence, Spectrum};
    use crate::presets::{random_div_free, random_psd_tensor, seeded, taylor_green};
    use std::f64::consts::PI;

    #[test]
    fn momentum_map_cases() {
        let g = GridSpec::periodic(32).unwrap();
        let mut rng = seeded(1);
        let u = random_div_free(&mut rng, g, 4, 1.0);
        let f = random_psd_tensor(&mut rng, g, 3, 2, 0.5, 0.1);
        assert_eq!(momentum_map(&u, &f, 0.0, Geometry::Flat).unwrap().sharp(), u);
        assert_eq!(momentum_map(&u, &f, 0.1, Geometry::Curved), Err(LaeError::CurvedGeometry));
        let m = momentum_map(&u, &f, 0.3, Geometry::Flat).unwrap();
        assert!(inner_product(&m.sharp(), &u).unwrap() >= inner_product(&u, &u).unwrap());
    }

    #[test]
    fn isotropic_inversion_matches_symbol() {
        let g = GridSpec::periodic(32).unwrap();
        let (alpha2, eps) = (0.4, 0.5);
        let f = Tensor2Field::identity(g, alpha2);
        let m = random_div_free(&mut seeded(5), g, 6, 1.0).flat();
        let x = invert_momentum(&m, &f, eps, 1e-12, 500).unwrap();
        let mut expect = m.sharp();
        for a in expect.arrays_mut() {
            let mut s = Spectrum::forward(g, a);
            s.apply(|kx, ky| {
                let (p, q) = (g.derivative_wavenumber(kx), g.derivative_wavenumber(ky));
                (1.0 / (1.0 + eps * eps * alpha2 * (p * p + q * q))).into()
            });
            a.copy_from_slice(&s.inverse());
        }
        assert!(x.max_abs_diff(&expect) < 1e-10);
        assert!(divergence(&x).sup_norm() < 1e-10);
        let plain = invert_momentum(&m, &f, 0.0, 1e-10, 10).unwrap();
        assert!(plain.max_abs_diff(&leray_project(&m.sharp())) < 1e-15);
    }

    #[test]
    fn maxit_error_carries_residual() {
        let g = GridSpec::periodic(16).unwrap();
        let mut rng = seeded(2);
        let f = random_psd_tensor(&mut rng, g, 3, 3, 1.0, 0.0);
        let m = random_div_free(&mut rng, g, 5, 1.0).flat();
        match invert_momentum(&m, &f, 0.9, 1e-14, 1) {
            Err(LaeError::LinearSolve { iters: 1, residual }) => assert!(residual > 0.0),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn action_cases() {
        let g = GridSpec::periodic(32).unwrap();
        let tg = taylor_green(g);
        let z = Tensor2Field::zeros(g);
        assert!((evaluate_action(&tg, &z, 0.0).unwrap() - PI * PI).abs() < 1e-12);
        assert_eq!(evaluate_action(&VectorField::zeros(g), &z, 0.3).unwrap(), 0.0);
        let alpha2 = 0.25;
        let eps = 0.2;
        let a = evaluate_action(&tg, &Tensor2Field::identity(g, alpha2), eps).unwrap();
        // ∫|∇ū|² = 2∫|ū|² for Taylor–Green
        assert!((a - (PI * PI + eps * eps * alpha2 * 2.0 * PI * PI)).abs() < 1e-11);
        let mut rng = seeded(9);
        let u = random_div_free(&mut rng, g, 4, 1.0);
        let f = random_psd_tensor(&mut rng, g, 3, 2, 0.5, 0.1);
        let (p, q) = (evaluate_action(&u, &f, 0.4).unwrap(), evaluate_action_by_parts(&u, &f, 0.4).unwrap());
        assert!((p - q).abs() < 1e-10 * p.abs().max(1.0));
    }

    #[test]
    fn params_validation() {
        let g = GridSpec::periodic(16).unwrap();
        assert!(ModelParams::new(g, 1.0, 1e-3, 1.0).is_err());
        assert!(ModelParams::new(g, 0.1, 0.0, 1.0).is_err());
        let mut p = ModelParams::new(g, 0.1, 1e-3, 1.0).unwrap();
        p.linsolve_tol = 1e-3;
        assert!(p.validate().is_err());
    }
}
