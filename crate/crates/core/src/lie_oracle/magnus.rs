//! ε-derivatives of the composite velocity `V^ε = (∂_t Ξ^ε)Ξ^{ε,−1} + Ad_{Ξ^ε} ū`.

use super::family::FlowFamily;
use nalgebra::DMatrix;

use super::matrix::{ad, expm, expm_minus_identity, AlgebraElement, GroupElement};
use super::LieError;
use crate::convergence::{ladder, ConvergenceReport};

/// Levels of the default ε ladder.
pub const EPS_LEVELS: usize = 8;
/// Ratio between consecutive ε levels.
pub const EPS_RATIO: f64 = 0.5;

/// `Ξ^ε(t) = exp(ε w(t) + ε²/2 χ(t))`.
pub fn fluctuation_map(family: &FlowFamily, eps: f64, t: f64) -> Result<GroupElement, LieError> {
    let gen = (family.w)(t).scaled(eps).plus(&(family.chi)(t).scaled(0.5 * eps * eps));
    expm(&gen)
}

fn check_step(h: f64) -> Result<(), LieError> {
    if h.is_finite() && h > 0.0 {
        Ok(())
    } else {
        Err(LieError::InvalidStep(h))
    }
}

fn interior(family: &FlowFamily, t_index: usize) -> Result<f64, LieError> {
    if t_index == 0 || t_index + 1 >= family.t_grid.len() {
        return Err(LieError::BoundaryIndex(t_index));
    }
    Ok(family.t_grid[t_index])
}

/// Composite velocity with a central time difference of step `h_t`.
pub fn composite_velocity(family: &FlowFamily, eps: f64, t_index: usize, h_t: f64) -> Result<AlgebraElement, LieError> {
    let t = interior(family, t_index)?;
    Ok((family.ubar)(t).plus(&velocity_fluctuation(family, eps, t_index, h_t)?))
}

fn offset(family: &FlowFamily, eps: f64, t: f64) -> Result<DMatrix<f64>, LieError> {
    let gen = (family.w)(t).scaled(eps).plus(&(family.chi)(t).scaled(0.5 * eps * eps));
    expm_minus_identity(&gen)
}

// `V^ε − ū`, assembled from `E = Ξ^ε − I` so that rounding scales with ε:
// `Ad_Ξ ū − ū = [E, ū] Ξ⁻¹`.
fn velocity_fluctuation(family: &FlowFamily, eps: f64, t_index: usize, h_t: f64) -> Result<AlgebraElement, LieError> {
    check_step(h_t)?;
    let t = interior(family, t_index)?;
    let e = offset(family, eps, t)?;
    let d = e.nrows();
    let xi_inv = GroupElement(&e + DMatrix::<f64>::identity(d, d)).inverse()?;
    let de = (offset(family, eps, t + h_t)? - offset(family, eps, t - h_t)?) / (2.0 * h_t);
    let ubar = (family.ubar)(t);
    let bracket = &e * &ubar.0 - &ubar.0 * &e;
    Ok(AlgebraElement((de + bracket) * xi_inv.0))
}

fn central(f: impl Fn(f64) -> AlgebraElement, t: f64, h: f64) -> AlgebraElement {
    f(t + h).minus(&f(t - h)).scaled(0.5 / h)
}

/// `V′ = ẇ + ad_w ū`, with `ẇ` taken by the same central difference as
/// [`composite_velocity`].
pub fn first_order_reference(family: &FlowFamily, t_index: usize, h_t: f64) -> Result<AlgebraElement, LieError> {
    check_step(h_t)?;
    let t = interior(family, t_index)?;
    let wdot = central(|s| (family.w)(s), t, h_t);
    Ok(wdot.plus(&ad(&(family.w)(t), &(family.ubar)(t))?))
}

/// `V″ = χ̇′ + ad_{χ′} ū − 2 V′ w` with `χ′ = χ + w²`, the second ε-derivative
/// of `Ξ^ε` at zero.
pub fn second_order_reference(family: &FlowFamily, t_index: usize, h_t: f64) -> Result<AlgebraElement, LieError> {
    check_step(h_t)?;
    let t = interior(family, t_index)?;
    let chi_p = |s: f64| {
        let w = (family.w)(s);
        (family.chi)(s).plus(&AlgebraElement(&w.0 * &w.0))
    };
    let v1 = first_order_reference(family, t_index, h_t)?;
    let w = (family.w)(t);
    let mut out = central(chi_p, t, h_t).plus(&ad(&chi_p(t), &(family.ubar)(t))?);
    out.0 -= &v1.0 * &w.0 * 2.0;
    Ok(out)
}

#[derive(Clone, Copy)]
enum Order {
    First,
    Second,
}

fn verify(family: &FlowFamily, h_eps: f64, h_t: f64, order: Order) -> Result<ConvergenceReport, LieError> {
    check_step(h_eps)?;
    check_step(h_t)?;
    let inner: Vec<usize> = (1..family.t_grid.len() - 1).collect();
    let d = family.dim();
    let mut reference = Vec::with_capacity(inner.len() * d * d);
    for &i in &inner {
        let r = match order {
            Order::First => first_order_reference(family, i, h_t)?,
            Order::Second => second_order_reference(family, i, h_t)?,
        };
        reference.extend_from_slice(r.as_slice());
    }
    let steps = ladder(h_eps, EPS_RATIO, EPS_LEVELS);
    let mut estimates = Vec::with_capacity(steps.len());
    for &h in &steps {
        let mut est = Vec::with_capacity(reference.len());
        for &i in &inner {
            let vp = velocity_fluctuation(family, h, i, h_t)?;
            let vm = velocity_fluctuation(family, -h, i, h_t)?;
            let e = match order {
                Order::First => vp.minus(&vm).scaled(0.5 / h),
                Order::Second => vp.plus(&vm).scaled(1.0 / (h * h)),
            };
            est.extend_from_slice(e.as_slice());
        }
        estimates.push(est);
    }
    let block = d * d;
    let residual = |e: &[f64]| {
        e.chunks(block)
            .zip(reference.chunks(block))
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt())
            .fold(0.0, f64::max)
    };
    Ok(ConvergenceReport::from_estimates(&steps, &estimates, residual))
}

/// Ladder of central-difference estimates of `∂_ε V^ε` at 0 against `ẇ + ad_w ū`,
/// maximised over interior time samples.
pub fn verify_first_order(family: &FlowFamily, h_eps: f64, h_t: f64) -> Result<ConvergenceReport, LieError> {
    verify(family, h_eps, h_t, Order::First)
}

/// Ladder of second differences of `V^ε` at 0 against [`second_order_reference`].
pub fn verify_second_order(family: &FlowFamily, h_eps: f64, h_t: f64) -> Result<ConvergenceReport, LieError> {
    verify(family, h_eps, h_t, Order::Second)
}
