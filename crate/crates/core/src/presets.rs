//! Initial data and random band-limited test fields.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex64;

use crate::field_calculus::{GridField, GridSpec, ScalarField, Spectrum, Tensor2Field, VectorField};

/// Deterministic generator for preset construction.
pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Taylor–Green vortex `(sin x cos y, −cos x sin y)`, steady for 2D Euler.
pub fn taylor_green(grid: GridSpec) -> VectorField {
    let s = 2.0 * std::f64::consts::PI / grid.length();
    VectorField::from_fn(grid, |x, y| [(s * x).sin() * (s * y).cos(), -(s * x).cos() * (s * y).sin()])
}

/// Zero-mean random scalar with Fourier modes `max(|kx|, |ky|) ≤ band`,
/// normalised to unit sup norm.
pub fn random_scalar(rng: &mut impl Rng, grid: GridSpec, band: i64) -> ScalarField {
    let mut spec = Spectrum::zeros(grid);
    let n = grid.n();
    for ky in 0..n {
        for kx in 0..n {
            let (mx, my) = (grid.mode(kx), grid.mode(ky));
            if mx.abs() > band || my.abs() > band || (mx == 0 && my == 0) {
                continue;
            }
            let k2 = (mx * mx + my * my) as f64;
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            spec.data_mut()[ky * n + kx] = Complex64::new(re, im) / (1.0 + k2);
        }
    }
    let f = ScalarField::from_values(grid, spec.inverse()).expect("grid-sized array");
    let s = f.sup_norm();
    if s > 0.0 {
        f.scaled(1.0 / s)
    } else {
        f
    }
}

/// Random vector field, each component from [`random_scalar`].
pub fn random_vector(rng: &mut impl Rng, grid: GridSpec, band: i64) -> VectorField {
    let a = random_scalar(rng, grid, band);
    let b = random_scalar(rng, grid, band);
    VectorField::from_scalars(a, b).expect("same grid")
}

/// Divergence-free random field `(∂_y ψ, −∂_x ψ)` of a random stream
/// function, normalised to sup norm `amplitude`.
pub fn random_div_free(rng: &mut impl Rng, grid: GridSpec, band: i64, amplitude: f64) -> VectorField {
    let psi = random_scalar(rng, grid, band);
    let s = Spectrum::forward(grid, psi.values());
    let minus_dx: Vec<f64> = s.derivative(0).inverse().into_iter().map(|v| -v).collect();
    let u = VectorField::from_components(grid, s.derivative(1).inverse(), minus_dx).expect("grid-sized arrays");
    let m = u.sup_norm();
    if m > 0.0 {
        u.scaled(amplitude / m)
    } else {
        u
    }
}

/// Pointwise positive semidefinite tensor `c·I + Σ v⊗v` with `m` random
/// band-limited fields `v` scaled by `amplitude`.
pub fn random_psd_tensor(rng: &mut impl Rng, grid: GridSpec, band: i64, m: usize, amplitude: f64, c: f64) -> Tensor2Field {
    let mut f = Tensor2Field::identity(grid, c);
    for _ in 0..m {
        let v = random_vector(rng, grid, band).scaled(amplitude);
        f = f + Tensor2Field::outer(&v, &v).expect("same grid");
    }
    f
}
