use crate::rng::CounterNormal;

use super::McError;

/// Integrand `ζ_s` evaluated on a Brownian path. Adapted integrands must
/// ignore `w_end`.
pub trait Integrand: Sync {
    fn value(&self, s: f64, w_s: f64, w_end: f64) -> f64;
}

/// `ζ ≡ c`
#[derive(Debug, Clone, Copy)]
pub struct Constant(pub f64);

/// `ζ_s = W_s`
#[derive(Debug, Clone, Copy)]
pub struct BrownianAdapted;

/// `ζ_s = W_T`, which looks into the future.
#[derive(Debug, Clone, Copy)]
pub struct Anticipating;

impl Integrand for Constant {
    fn value(&self, _: f64, _: f64, _: f64) -> f64 {
        self.0
    }
}

impl Integrand for BrownianAdapted {
    fn value(&self, _: f64, w_s: f64, _: f64) -> f64 {
        w_s
    }
}

impl Integrand for Anticipating {
    fn value(&self, _: f64, _: f64, w_end: f64) -> f64 {
        w_end
    }
}

impl<F: Fn(f64, f64, f64) -> f64 + Sync> Integrand for F {
    fn value(&self, s: f64, w_s: f64, w_end: f64) -> f64 {
        self(s, w_s, w_end)
    }
}

/// Mean and standard error of the left-point Itô sum `Σ ζ_{s_k} ΔW_k` over
/// `n_paths` independent paths on `[0, t_end]`.
pub fn martingale_check(
    zeta: &impl Integrand,
    n_paths: usize,
    dt: f64,
    t_end: f64,
    seed: u64,
) -> Result<(f64, f64), McError> {
    if n_paths < 2 {
        return Err(McError::InvalidParams(format!("n_paths = {n_paths} must be at least 2")));
    }
    if !(dt > 0.0 && t_end > 0.0 && dt.is_finite() && t_end.is_finite()) {
        return Err(McError::InvalidParams(format!("dt = {dt} and t_end = {t_end} must be positive")));
    }
    let steps = (t_end / dt).round().max(1.0) as usize;
    let h = t_end / steps as f64;
    let sq = h.sqrt();
    let gen = CounterNormal::new(seed);
    let mut dw = vec![0.0; steps];
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for p in 0..n_paths {
        gen.fill(p as u64, 0, &mut dw);
        dw.iter_mut().for_each(|z| *z *= sq);
        let w_end: f64 = dw.iter().sum();
        let (mut w, mut integral) = (0.0, 0.0);
        for (k, d) in dw.iter().enumerate() {
            integral += zeta.value(k as f64 * h, w, w_end) * d;
            w += d;
        }
        sum += integral;
        sum_sq += integral * integral;
    }
    let n = n_paths as f64;
    let mean = sum / n;
    let var = ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0);
    Ok((mean, (var / n).sqrt()))
}
