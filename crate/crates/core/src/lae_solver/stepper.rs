use crate::correlation::{check_cfl, f_rhs_dealiased, forcing_or_zero, CorrelationState, NoiseBasis};
use crate::field_calculus::ops::c_operator_with;
use crate::field_calculus::{
    c_operator, dealias, divergence, jacobian, leray_project, lie_deriv_oneform, solve_poisson, FieldError, GridField,
    ScalarField, Tensor2Field, VectorField,
};

use super::{evaluate_action, Diagnostics, FlowState, InertiaOperator, LaeError, ModelParams};

/// `∂_t ū` from the resolved form with the recovered pressure.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedRhs {
    pub dubar_dt: VectorField,
    /// Zero-mean physical pressure `p = p̃ − |ū|²/2`.
    pub pressure: ScalarField,
    pub linsolve_iters: usize,
}

// `Σ_j v^j J[i][j]`, i.e. `(v·∇)u` given `J = ∇u`.
fn contract_jacobian(v: &VectorField, j: &Tensor2Field) -> VectorField {
    let mut out = VectorField::zeros(v.grid());
    let (v0, v1) = (v.component(0), v.component(1));
    for i in 0..2 {
        let (a, b) = (j.component(i, 0), j.component(i, 1));
        out.component_mut(i).iter_mut().enumerate().for_each(|(k, o)| *o = v0[k] * a[k] + v1[k] * b[k]);
    }
    out
}

// `Σ_j c_j ∂_k u^j`, i.e. `(∇u)ᵀ c`.
fn contract_jacobian_transpose(c: &VectorField, j: &Tensor2Field) -> VectorField {
    let mut out = VectorField::zeros(c.grid());
    let (c0, c1) = (c.component(0), c.component(1));
    for k in 0..2 {
        let (a, b) = (j.component(0, k), j.component(1, k));
        out.component_mut(k).iter_mut().enumerate().for_each(|(p, o)| *o = c0[p] * a[p] + c1[p] * b[p]);
    }
    out
}

pub(crate) fn resolved_rhs_with(
    ubar: &VectorField,
    f: &Tensor2Field,
    forcing: &Tensor2Field,
    params: &ModelParams,
) -> Result<ResolvedRhs, LaeError> {
    if ubar.grid() != f.grid() || f.grid() != forcing.grid() {
        return Err(FieldError::GridMismatch.into());
    }
    let eps2 = params.eps * params.eps;
    let j = jacobian(ubar);
    let adv = dealias(&contract_jacobian(ubar, &j));
    let mut rhs = -&adv;
    if eps2 != 0.0 {
        let cu = c_operator_with(ubar, f, true)?;
        let stretch = dealias(&contract_jacobian_transpose(&cu, &j));
        rhs.axpy(eps2, &c_operator_with(&adv, f, true)?);
        rhs.axpy(eps2, &stretch);
        if forcing.sup_norm() != 0.0 {
            rhs.axpy(eps2, &c_operator_with(ubar, forcing, true)?);
        }
    }
    let op = InertiaOperator { f, eps: params.eps };
    let sol = op.solve(&rhs, params.linsolve_tol, params.linsolve_maxit)?;
    let grad_p = rhs - op.apply_raw(&sol.x)?;
    let p_tilde = solve_poisson(&divergence(&grad_p));
    let mut pressure = p_tilde - ubar.magnitude_sq().scaled(0.5);
    let mean = pressure.mean();
    pressure.values_mut().iter_mut().for_each(|v| *v -= mean);
    Ok(ResolvedRhs { dubar_dt: sol.x, pressure, linsolve_iters: sol.iters })
}

/// Solve the resolved form for `∂_t ū` on the divergence-free subspace.
pub fn resolved_rhs(state: &FlowState, params: &ModelParams, basis: &NoiseBasis) -> Result<ResolvedRhs, LaeError> {
    resolved_rhs_with(&state.ubar, state.f(), &forcing_or_zero(basis), params)
}

/// `‖T P(∂_t m + L_ū m)‖_∞` with `m = ū − ε²C_F(ū)` and
/// `∂_t m = ∂_t ū − ε²C_F(∂_t ū) − ε²C_{∂_t F}(ū)`; `T` keeps the 2/3 band
/// the stepper resolves.
pub fn ep_residual(
    state: &FlowState,
    params: &ModelParams,
    dubar_dt: &VectorField,
    df_dt: &Tensor2Field,
) -> Result<f64, LaeError> {
    let eps2 = params.eps * params.eps;
    let u = &state.ubar;
    let mut m = u.clone();
    let mut mdot = dubar_dt.clone();
    if eps2 != 0.0 {
        m.axpy(-eps2, &c_operator(u, state.f())?);
        mdot.axpy(-eps2, &c_operator(dubar_dt, state.f())?);
        mdot.axpy(-eps2, &c_operator(u, df_dt)?);
    }
    let lie = lie_deriv_oneform(u, &m.flat())?.sharp();
    Ok(dealias(&leray_project(&(mdot + lie))).sup_norm())
}

pub(crate) fn step_with(
    state: &FlowState,
    params: &ModelParams,
    forcing: &Tensor2Field,
) -> Result<(FlowState, usize), LaeError> {
    let dt = params.dt;
    check_cfl(dt, &state.ubar)?;
    let mut iters = 0;
    let mut eval = |u: &VectorField, f: &Tensor2Field| -> Result<(VectorField, Tensor2Field), LaeError> {
        let r = resolved_rhs_with(u, f, forcing, params)?;
        iters += r.linsolve_iters;
        Ok((r.dubar_dt, f_rhs_dealiased(u, f, forcing)?))
    };
    let (u, f) = (&state.ubar, state.f());
    let (a1, g1) = eval(u, f)?;
    let (a2, g2) = eval(&u.plus_scaled(0.5 * dt, &a1), &f.plus_scaled(0.5 * dt, &g1))?;
    let (a3, g3) = eval(&u.plus_scaled(0.5 * dt, &a2), &f.plus_scaled(0.5 * dt, &g2))?;
    let (a4, g4) = eval(&u.plus_scaled(dt, &a3), &f.plus_scaled(dt, &g3))?;
    let mut un = u.clone();
    let mut fnext = f.clone();
    for (w, a, g) in [(1.0, &a1, &g1), (2.0, &a2, &g2), (2.0, &a3, &g3), (1.0, &a4, &g4)] {
        un.axpy(w * dt / 6.0, a);
        fnext.axpy(w * dt / 6.0, g);
    }
    let t = state.t + dt;
    let next = FlowState { ubar: leray_project(&un), corr: CorrelationState { f: fnext, t }, t };
    Ok((next, iters))
}

/// One RK4 step of the coupled `(ū, F)` system.
pub fn step_system(state: &FlowState, params: &ModelParams, basis: &NoiseBasis) -> Result<FlowState, LaeError> {
    Ok(step_with(state, params, &forcing_or_zero(basis))?.0)
}

/// Owns one trajectory of the coupled system.
#[derive(Debug, Clone)]
pub struct LaeSolver {
    params: ModelParams,
    forcing: Tensor2Field,
    state: FlowState,
    last_iters: usize,
}

impl LaeSolver {
    pub fn new(params: ModelParams, basis: &NoiseBasis, state: FlowState) -> Result<Self, LaeError> {
        params.validate()?;
        if basis.grid() != state.grid() || params.grid != state.grid() {
            return Err(FieldError::GridMismatch.into());
        }
        Ok(LaeSolver { params, forcing: forcing_or_zero(basis), state, last_iters: 0 })
    }

    pub fn state(&self) -> &FlowState {
        &self.state
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn step(&mut self) -> Result<(), LaeError> {
        let (next, iters) = step_with(&self.state, &self.params, &self.forcing)?;
        self.state = next;
        self.last_iters = iters;
        Ok(())
    }

    /// Number of steps of size `dt` needed to reach `t_end` from `t = 0`.
    pub fn n_steps(&self) -> usize {
        (self.params.t_end / self.params.dt).round() as usize
    }

    /// Diagnostics of the current state; the pressure is recomputed here.
    pub fn diagnostics(&self) -> Result<Diagnostics, LaeError> {
        let s = &self.state;
        let rhs = resolved_rhs_with(&s.ubar, s.f(), &self.forcing, &self.params)?;
        Ok(Diagnostics {
            t: s.t,
            action: evaluate_action(&s.ubar, s.f(), self.params.eps)?,
            kinetic: evaluate_action(&s.ubar, s.f(), 0.0)?,
            div_norm: divergence(&s.ubar).sup_norm(),
            linsolve_iters: self.last_iters,
            pressure: rhs.pressure,
        })
    }
}
