use crate::correlation::NoiseBasis;
use crate::field_calculus::{directional_derivative, interpolate_vector, wrap, GridField, VectorField};
use crate::rng::CounterNormal;

use super::McError;

/// Lagrangian particles on the torus.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleCloud {
    /// Positions wrapped into `[0, length)²`.
    pub positions: Vec<[f64; 2]>,
    /// Unwrapped displacement since construction.
    pub displacement: Vec<[f64; 2]>,
    pub t: f64,
}

impl ParticleCloud {
    pub fn new(positions: Vec<[f64; 2]>) -> Self {
        let displacement = vec![[0.0; 2]; positions.len()];
        ParticleCloud { positions, displacement, t: 0.0 }
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }
}

/// `dX = (ū + ε²/2 Σ (ξ_i·∇)ξ_i)(X) dt + ε Σ ξ_i(X) dW^i`: the Stratonovich
/// flow written in Itô form. The drift is advanced by RK4, the noise by
/// Euler–Maruyama; fields are sampled by bicubic interpolation.
pub fn simulate_particles(
    cloud: &ParticleCloud,
    ubar: &VectorField,
    basis: &NoiseBasis,
    eps: f64,
    dt: f64,
    n_steps: usize,
    seed: u64,
) -> Result<ParticleCloud, McError> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(McError::InvalidParams(format!("dt = {dt} must be positive")));
    }
    let g = ubar.grid();
    if basis.grid() != g {
        return Err(crate::field_calculus::FieldError::GridMismatch.into());
    }
    let mut drift = ubar.clone();
    if eps != 0.0 {
        for xi in basis.fields() {
            drift.axpy(0.5 * eps * eps, &directional_derivative(xi, xi)?);
        }
    }
    let l = g.length();
    let vel = |p: [f64; 2]| interpolate_vector(&drift, p[0], p[1]);
    let gen = CounterNormal::new(seed);
    let channels = basis.len();
    let mut z = vec![0.0; channels];
    let sq = dt.sqrt();
    let mut out = cloud.clone();
    for step in 0..n_steps as u64 {
        for (k, (pos, disp)) in out.positions.iter_mut().zip(out.displacement.iter_mut()).enumerate() {
            let x = *pos;
            let k1 = vel(x);
            let k2 = vel([x[0] + 0.5 * dt * k1[0], x[1] + 0.5 * dt * k1[1]]);
            let k3 = vel([x[0] + 0.5 * dt * k2[0], x[1] + 0.5 * dt * k2[1]]);
            let k4 = vel([x[0] + dt * k3[0], x[1] + dt * k3[1]]);
            let mut d = [0.0; 2];
            for c in 0..2 {
                d[c] = dt / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
            }
            if eps != 0.0 && channels > 0 {
                gen.fill(k as u64, step * channels as u64, &mut z);
                for (xi, zi) in basis.fields().iter().zip(&z) {
                    let v = interpolate_vector(xi, x[0], x[1]);
                    d[0] += eps * v[0] * sq * zi;
                    d[1] += eps * v[1] * sq * zi;
                }
            }
            *pos = [wrap(x[0] + d[0], l), wrap(x[1] + d[1], l)];
            disp[0] += d[0];
            disp[1] += d[1];
        }
        out.t += dt;
    }
    Ok(out)
}
