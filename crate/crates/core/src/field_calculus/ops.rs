//! Differential operators of the flat connection on the torus.
//!
//! Derivatives are Fourier-collocation; products are pointwise on the grid.
//! None of these apply dealiasing on their own: callers that time-step
//! nonlinear terms wrap results with [`dealias`].

use rustfft::num_complex::Complex64;

use super::grid::{CovectorField, GridField, GridSpec, ScalarField, Tensor2Field, VectorField};
use super::spectral::Spectrum;
use super::FieldError;

fn same_grid(a: GridSpec, b: GridSpec) -> Result<(), FieldError> {
    if a == b {
        Ok(())
    } else {
        Err(FieldError::GridMismatch)
    }
}

fn grad_arrays(grid: GridSpec, values: &[f64]) -> [Vec<f64>; 2] {
    let s = Spectrum::forward(grid, values);
    [s.derivative(0).inverse(), s.derivative(1).inverse()]
}

/// `∂_x V⁰ + ∂_y V¹` of two arrays, optionally truncated before returning.
fn div_arrays(grid: GridSpec, v0: &[f64], v1: &[f64], truncate: bool) -> Vec<f64> {
    let mut s = Spectrum::forward(grid, v0).derivative(0);
    s.add_scaled(Complex64::new(1.0, 0.0), &Spectrum::forward(grid, v1).derivative(1));
    if truncate {
        s.truncate();
    }
    s.inverse()
}

/// Spectral partial derivative along `axis` (0 = x, 1 = y).
pub fn partial(f: &ScalarField, axis: usize) -> ScalarField {
    let g = f.grid();
    let vals = Spectrum::forward(g, f.values()).derivative(axis).inverse();
    ScalarField::from_values(g, vals).expect("grid-sized array")
}

pub fn gradient(f: &ScalarField) -> VectorField {
    let g = f.grid();
    let [dx, dy] = grad_arrays(g, f.values());
    VectorField::from_components(g, dx, dy).expect("grid-sized arrays")
}

/// `J[i][j] = ∂_j X^i`
pub fn jacobian(x: &VectorField) -> Tensor2Field {
    let g = x.grid();
    let mut out = Tensor2Field::zeros(g);
    for i in 0..2 {
        let [d0, d1] = grad_arrays(g, x.component(i));
        out.component_mut(i, 0).copy_from_slice(&d0);
        out.component_mut(i, 1).copy_from_slice(&d1);
    }
    out
}

pub fn divergence(x: &VectorField) -> ScalarField {
    let g = x.grid();
    ScalarField::from_values(g, div_arrays(g, x.component(0), x.component(1), false))
        .expect("grid-sized array")
}

pub fn laplacian(f: &ScalarField) -> ScalarField {
    let g = f.grid();
    let mut s = Spectrum::forward(g, f.values());
    s.apply(|kx, ky| {
        let (a, b) = (g.derivative_wavenumber(kx), g.derivative_wavenumber(ky));
        Complex64::new(-(a * a + b * b), 0.0)
    });
    ScalarField::from_values(g, s.inverse()).expect("grid-sized array")
}

/// Zero-mean solution of `Δp = rhs`; the mean of `rhs` is discarded.
pub fn solve_poisson(rhs: &ScalarField) -> ScalarField {
    let g = rhs.grid();
    let mut s = Spectrum::forward(g, rhs.values());
    s.apply(|kx, ky| {
        let (a, b) = (g.derivative_wavenumber(kx), g.derivative_wavenumber(ky));
        let k2 = a * a + b * b;
        if k2 == 0.0 {
            Complex64::default()
        } else {
            Complex64::new(-1.0 / k2, 0.0)
        }
    });
    ScalarField::from_values(g, s.inverse()).expect("grid-sized array")
}

/// Directional derivative of a scalar, `X^j ∂_j f`; equals `L_X f`.
pub fn scalar_transport(x: &VectorField, f: &ScalarField) -> Result<ScalarField, FieldError> {
    same_grid(x.grid(), f.grid())?;
    let g = f.grid();
    let [dx, dy] = grad_arrays(g, f.values());
    let (x0, x1) = (x.component(0), x.component(1));
    let vals = (0..g.len()).map(|k| x0[k] * dx[k] + x1[k] * dy[k]).collect();
    ScalarField::from_values(g, vals)
}

/// Flat covariant derivative `(∇_X Y)^i = X^j ∂_j Y^i`.
pub fn directional_derivative(x: &VectorField, y: &VectorField) -> Result<VectorField, FieldError> {
    same_grid(x.grid(), y.grid())?;
    let g = x.grid();
    let (x0, x1) = (x.component(0), x.component(1));
    let mut out = VectorField::zeros(g);
    for i in 0..2 {
        let [d0, d1] = grad_arrays(g, y.component(i));
        out.component_mut(i)
            .iter_mut()
            .enumerate()
            .for_each(|(k, v)| *v = x0[k] * d0[k] + x1[k] * d1[k]);
    }
    Ok(out)
}

/// Jacobi–Lie bracket `[X, Y] = ∇_X Y − ∇_Y X`.
pub fn jacobi_bracket(x: &VectorField, y: &VectorField) -> Result<VectorField, FieldError> {
    Ok(directional_derivative(x, y)? - directional_derivative(y, x)?)
}

/// Adjoint action on vector fields, `ad_X Y = −[X, Y]`.
pub fn ad_field(x: &VectorField, y: &VectorField) -> Result<VectorField, FieldError> {
    Ok(directional_derivative(y, x)? - directional_derivative(x, y)?)
}

/// Lie derivative of a one-form: `u^j ∂_j m_i + (∂_i u^j) m_j`.
pub fn lie_deriv_oneform(u: &VectorField, m: &CovectorField) -> Result<CovectorField, FieldError> {
    same_grid(u.grid(), m.grid())?;
    let g = u.grid();
    let ju = jacobian(u);
    let (u0, u1) = (u.component(0), u.component(1));
    let (m0, m1) = (m.component(0), m.component(1));
    let mut out = CovectorField::zeros(g);
    for i in 0..2 {
        let [d0, d1] = grad_arrays(g, m.component(i));
        let (a, b) = (ju.component(0, i), ju.component(1, i));
        out.component_mut(i).iter_mut().enumerate().for_each(|(k, v)| {
            *v = u0[k] * d0[k] + u1[k] * d1[k] + a[k] * m0[k] + b[k] * m1[k];
        });
    }
    Ok(out)
}

/// Lie derivative of a contravariant 2-tensor:
/// `u^k ∂_k F^{ij} − F^{kj} ∂_k u^i − F^{ik} ∂_k u^j`.
///
/// Symmetric input gives bitwise-symmetric output.
pub fn lie_deriv_tensor2(u: &VectorField, f: &Tensor2Field) -> Result<Tensor2Field, FieldError> {
    same_grid(u.grid(), f.grid())?;
    let g = u.grid();
    let ju = jacobian(u);
    let (u0, u1) = (u.component(0), u.component(1));
    let symmetric = f.is_symmetric();
    let mut out = Tensor2Field::zeros(g);
    for i in 0..2 {
        for j in 0..2 {
            if symmetric && j < i {
                let upper = out.component(j, i).to_vec();
                out.component_mut(i, j).copy_from_slice(&upper);
                continue;
            }
            let [d0, d1] = grad_arrays(g, f.component(i, j));
            let (f0j, f1j) = (f.component(0, j), f.component(1, j));
            let (fi0, fi1) = (f.component(i, 0), f.component(i, 1));
            let (dui0, dui1) = (ju.component(i, 0), ju.component(i, 1));
            let (duj0, duj1) = (ju.component(j, 0), ju.component(j, 1));
            out.component_mut(i, j).iter_mut().enumerate().for_each(|(k, v)| {
                *v = u0[k] * d0[k] + u1[k] * d1[k]
                    - (f0j[k] * dui0[k] + f1j[k] * dui1[k])
                    - (fi0[k] * duj0[k] + fi1[k] * duj1[k]);
            });
        }
    }
    Ok(out)
}

/// Flat Hessian contraction `F^{jk} ∂_j ∂_k u^i`.
pub fn hessian_contract(u: &VectorField, f: &Tensor2Field) -> Result<VectorField, FieldError> {
    same_grid(u.grid(), f.grid())?;
    let g = u.grid();
    let mut out = VectorField::zeros(g);
    for i in 0..2 {
        let s = Spectrum::forward(g, u.component(i));
        let dx = s.derivative(0);
        let dxx = dx.derivative(0).inverse();
        let dxy = dx.derivative(1).inverse();
        let dyy = s.derivative(1).derivative(1).inverse();
        let (fxx, fxy, fyx, fyy) =
            (f.component(0, 0), f.component(0, 1), f.component(1, 0), f.component(1, 1));
        out.component_mut(i).iter_mut().enumerate().for_each(|(k, v)| {
            *v = fxx[k] * dxx[k] + (fxy[k] + fyx[k]) * dxy[k] + fyy[k] * dyy[k];
        });
    }
    Ok(out)
}

/// Divergence on the first index, `(div T)^k = ∂_j T^{jk}`.
pub fn div_tensor(t: &Tensor2Field) -> VectorField {
    let g = t.grid();
    let c0 = div_arrays(g, t.component(0, 0), t.component(1, 0), false);
    let c1 = div_arrays(g, t.component(0, 1), t.component(1, 1), false);
    VectorField::from_components(g, c0, c1).expect("grid-sized arrays")
}

/// `C(q)^i = ∂_j (F^{jk} ∂_k q^i)`, the anisotropic generalisation of `α²Δ`.
pub fn c_operator(q: &VectorField, f: &Tensor2Field) -> Result<VectorField, FieldError> {
    c_operator_with(q, f, false)
}

/// [`c_operator`] with the final divergence optionally 2/3-truncated.
pub(crate) fn c_operator_with(
    q: &VectorField,
    f: &Tensor2Field,
    truncate: bool,
) -> Result<VectorField, FieldError> {
    same_grid(q.grid(), f.grid())?;
    let g = q.grid();
    let n = g.len();
    let mut out = VectorField::zeros(g);
    let (fxx, fxy, fyx, fyy) =
        (f.component(0, 0), f.component(0, 1), f.component(1, 0), f.component(1, 1));
    for i in 0..2 {
        let [d0, d1] = grad_arrays(g, q.component(i));
        let v0: Vec<f64> = (0..n).map(|k| fxx[k] * d0[k] + fxy[k] * d1[k]).collect();
        let v1: Vec<f64> = (0..n).map(|k| fyx[k] * d0[k] + fyy[k] * d1[k]).collect();
        out.component_mut(i).copy_from_slice(&div_arrays(g, &v0, &v1, truncate));
    }
    Ok(out)
}

/// Leray projection onto discretely divergence-free fields; the mean mode is
/// left untouched.
pub fn leray_project(x: &VectorField) -> VectorField {
    let g = x.grid();
    let n = g.n();
    let mut s0 = Spectrum::forward(g, x.component(0));
    let mut s1 = Spectrum::forward(g, x.component(1));
    {
        let (a, b) = (s0.data_mut(), s1.data_mut());
        for ky in 0..n {
            for kx in 0..n {
                let (k0, k1) = (g.derivative_wavenumber(kx), g.derivative_wavenumber(ky));
                let k2 = k0 * k0 + k1 * k1;
                if k2 == 0.0 {
                    continue;
                }
                let idx = ky * n + kx;
                let dot = (a[idx] * k0 + b[idx] * k1) / k2;
                a[idx] -= dot * k0;
                b[idx] -= dot * k1;
            }
        }
    }
    VectorField::from_components(g, s0.inverse(), s1.inverse()).expect("grid-sized arrays")
}

/// 2/3-rule truncation of every component.
pub fn dealias<F: GridField>(f: &F) -> F {
    let g = f.grid();
    let mut out = f.clone();
    for a in out.arrays_mut() {
        let mut s = Spectrum::forward(g, a);
        s.truncate();
        a.copy_from_slice(&s.inverse());
    }
    out
}

/// `∫ g(a, b) dμ` with the flat metric, summed over components.
pub fn inner_product<F: GridField>(a: &F, b: &F) -> Result<f64, FieldError> {
    same_grid(a.grid(), b.grid())?;
    let s: f64 = a
        .arrays()
        .iter()
        .zip(b.arrays())
        .map(|(x, y)| x.iter().zip(y.iter()).map(|(p, q)| p * q).sum::<f64>())
        .sum();
    Ok(s * a.grid().cell_area())
}
