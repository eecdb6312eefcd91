use crate::convergence::{ladder, ConvergenceReport};
use crate::field_calculus::{c_operator, directional_derivative, GridField, Tensor2Field, VectorField};

use super::LaeError;

/// Refinement levels of the time-step ladder.
pub const H_LEVELS: usize = 6;

/// Checks `[∂_t + ū·∇, C_F] q = C_G(q)` at time `t` along families with
/// `∂_t F + L_ū F = G`, using central differences of step `h_t / 2^i`.
///
/// The residual at each level is
/// `D_h(C_F q) + ū·∇C_F q − C_F(D_h q + ū·∇q) − C_G q`.
pub fn verify_commutation(
    ubar_of_t: impl Fn(f64) -> VectorField,
    f_of_t: impl Fn(f64) -> Tensor2Field,
    g_of_t: impl Fn(f64) -> Tensor2Field,
    q_of_t: impl Fn(f64) -> VectorField,
    t: f64,
    h_t: f64,
) -> Result<ConvergenceReport, LaeError> {
    if !(h_t.is_finite() && h_t > 0.0) {
        return Err(LaeError::InvalidParams(format!("h_t = {h_t} must be positive")));
    }
    let (u, f, q) = (ubar_of_t(t), f_of_t(t), q_of_t(t));
    let cq = c_operator(&q, &f)?;
    let reference = c_operator(&q, &g_of_t(t))?;
    let transport_cq = directional_derivative(&u, &cq)?;
    let uq = directional_derivative(&u, &q)?;
    let steps = ladder(h_t, 0.5, H_LEVELS);
    let mut estimates = Vec::with_capacity(steps.len());
    for &h in &steps {
        let cp = c_operator(&q_of_t(t + h), &f_of_t(t + h))?;
        let cm = c_operator(&q_of_t(t - h), &f_of_t(t - h))?;
        let dcq = (cp - cm).scaled(0.5 / h);
        let dq = (q_of_t(t + h) - q_of_t(t - h)).scaled(0.5 / h);
        let lhs = dcq + transport_cq.clone() - c_operator(&(dq + uq.clone()), &f)?;
        estimates.push(lhs.arrays().concat());
    }
    let target = reference.arrays().concat();
    let residual = |e: &[f64]| e.iter().zip(&target).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    Ok(ConvergenceReport::from_estimates(&steps, &estimates, residual))
}
