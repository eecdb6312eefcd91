//! Second-order fluctuation identities on the flat torus.

use super::grid::{GridField, ScalarField, Tensor2Field, VectorField};
use super::ops::{ad_field, directional_derivative, hessian_contract, scalar_transport};
use super::FieldError;

/// Both forms of the second-order velocity fluctuation with `dt` stripped,
/// given deterministic rates `ẇ` and `χ̇`.
///
/// Form A: `ad_w ad_w ū + ad_{χ − ∇_w w} ū + χ̇ − ∇_ẇ w − ∇_w ẇ + ad_w ẇ`.
/// Form B: `χ̇ + ad_χ ū − ∇∇ū(w, w) − 2 ∇_w (ẇ + ad_w ū)`.
pub fn lemma2_forms(
    ubar: &VectorField,
    w: &VectorField,
    chi: &VectorField,
    wdot: &VectorField,
    chidot: &VectorField,
) -> Result<(VectorField, VectorField), FieldError> {
    let nabla_w_w = directional_derivative(w, w)?;
    let ad_w_u = ad_field(w, ubar)?;

    let mut a = ad_field(w, &ad_w_u)?;
    a = a + ad_field(&(chi - &nabla_w_w), ubar)?;
    a = a + chidot.clone();
    a = a - directional_derivative(wdot, w)?;
    a = a - directional_derivative(w, wdot)?;
    a = a + ad_field(w, wdot)?;

    let ww = Tensor2Field::outer(w, w)?;
    let mut b = chidot + &ad_field(chi, ubar)?;
    b = b - hessian_contract(ubar, &ww)?;
    b = b - directional_derivative(w, &(wdot + &ad_w_u))? * 2.0;
    Ok((a, b))
}

/// Sup-norm difference between the two forms of [`lemma2_forms`].
pub fn lemma2_check(
    ubar: &VectorField,
    w: &VectorField,
    chi: &VectorField,
    wdot: &VectorField,
    chidot: &VectorField,
) -> Result<f64, FieldError> {
    let (a, b) = lemma2_forms(ubar, w, chi, wdot, chidot)?;
    Ok(a.max_abs_diff(&b))
}

/// Second-order Taylor model of the pushforward of a scalar `ā` under the
/// fluctuation map with generators `w`, `χ`:
/// `ā − ε w·∇ā + ε²/2 (−(χ − ∇_w w)·∇ā + w·∇(w·∇ā))`.
pub fn advected_expansion(
    abar: &ScalarField,
    w: &VectorField,
    chi: &VectorField,
    eps: f64,
) -> Result<ScalarField, FieldError> {
    let lw = scalar_transport(w, abar)?;
    let lwlw = scalar_transport(w, &lw)?;
    let shifted = chi - &directional_derivative(w, w)?;
    let lchi = scalar_transport(&shifted, abar)?;
    let second = lwlw - lchi;
    Ok(abar.plus_scaled(-eps, &lw).plus_scaled(0.5 * eps * eps, &second))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field_calculus::GridSpec;

    #[test]
    fn zero_and_w_free_cases() {
        let g = GridSpec::periodic(32).unwrap();
        let z = VectorField::zeros(g);
        assert_eq!(lemma2_check(&z, &z, &z, &z, &z).unwrap(), 0.0);
        let u = VectorField::from_fn(g, |x, y| [x.sin() * y.cos(), -x.cos() * y.sin()]);
        let chi = VectorField::from_fn(g, |x, y| [(2.0 * y).sin(), (x + y).cos()]);
        let cd = VectorField::from_fn(g, |x, _| [0.0, (3.0 * x).sin()]);
        assert!(lemma2_check(&u, &z, &chi, &z, &cd).unwrap() < 1e-12);
    }

    #[test]
    fn advected_expansion_of_linear_profile() {
        let g = GridSpec::periodic(16).unwrap();
        let a = ScalarField::from_fn(g, |x, _| x.sin());
        let z = VectorField::zeros(g);
        assert_eq!(advected_expansion(&a, &z, &z, 0.3).unwrap(), a);
        let w = VectorField::constant(g, [0.5, 0.0]);
        let e = 0.1;
        let out = advected_expansion(&a, &w, &z, e).unwrap();
        // Taylor polynomial of sin(x − εw) to second order
        let exact = ScalarField::from_fn(g, |x, _| x.sin() - e * 0.5 * x.cos() - 0.5 * e * e * 0.25 * x.sin());
        assert!(out.max_abs_diff(&exact) < 1e-13);
    }
}
