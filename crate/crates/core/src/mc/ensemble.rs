use rayon::prelude::*;

use crate::correlation::{check_cfl, NoiseBasis};
use crate::field_calculus::{dealias, jacobian, GridField, GridSpec, Tensor2Field, VectorField};
use crate::rng::CounterNormal;

use super::McError;

/// Multiples of the predicted standard error tolerated by [`compare_with_pde`].
pub const SIGMA_BAND: f64 = 4.0;
/// Bias allowance per unit `dt` in [`compare_with_pde`] (weak order one).
pub const BIAS_PER_DT: f64 = 10.0;

/// Realisations `w⁽ᵏ⁾` of the fluctuation field.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleState {
    pub members: Vec<VectorField>,
    pub t: f64,
    pub rng_seed: u64,
    pub dt: f64,
    /// Steps taken so far; addresses the noise counter.
    pub step: u64,
    /// Odd members reuse the negated increments of their even partner.
    pub antithetic: bool,
}

impl EnsembleState {
    pub fn new(w0: &VectorField, n_members: usize, seed: u64, dt: f64, antithetic: bool) -> Result<Self, McError> {
        if n_members < 2 {
            return Err(McError::TooFewMembers(n_members));
        }
        if antithetic && n_members % 2 == 1 {
            return Err(McError::OddAntithetic(n_members));
        }
        if !(dt.is_finite() && dt > 0.0) {
            return Err(McError::InvalidParams(format!("dt = {dt} must be positive")));
        }
        Ok(EnsembleState { members: vec![w0.clone(); n_members], t: 0.0, rng_seed: seed, dt, step: 0, antithetic })
    }

    pub fn grid(&self) -> GridSpec {
        self.members[0].grid()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// One Euler–Maruyama step `w ← w + dt·T[w, ū] + Σ_i ξ_i ΔW_i`.
    pub fn advance(&mut self, ubar: &VectorField, basis: &NoiseBasis) -> Result<(), McError> {
        let grid = self.grid();
        if ubar.grid() != grid || basis.grid() != grid {
            return Err(crate::field_calculus::FieldError::GridMismatch.into());
        }
        check_cfl(self.dt, ubar)?;
        let dt = self.dt;
        let moving = ubar.sup_norm() != 0.0;
        let ju = jacobian(ubar);
        let gen = CounterNormal::new(self.rng_seed);
        let channels = basis.len();
        let start = self.step * channels as u64;
        let sqdt = dt.sqrt();
        let antithetic = self.antithetic;
        self.members.par_iter_mut().enumerate().for_each(|(k, w)| {
            let mut incr = if moving { bracket_with(w, ubar, &ju).scaled(dt) } else { VectorField::zeros(grid) };
            if channels > 0 {
                let mut z = vec![0.0; channels];
                let (stream, sign) = if antithetic { ((k / 2) as u64, if k % 2 == 0 { 1.0 } else { -1.0 }) } else { (k as u64, 1.0) };
                gen.fill(stream, start, &mut z);
                for (xi, zi) in basis.fields().iter().zip(&z) {
                    incr.axpy(sign * sqdt * zi, xi);
                }
            }
            *w = &*w + &incr;
        });
        self.step += 1;
        self.t += dt;
        Ok(())
    }
}

fn bracket_with(w: &VectorField, u: &VectorField, ju: &Tensor2Field) -> VectorField {
    let jw = jacobian(w);
    let mut out = VectorField::zeros(w.grid());
    let (w0, w1, u0, u1) = (w.component(0), w.component(1), u.component(0), u.component(1));
    for i in 0..2 {
        let (a0, a1, b0, b1) = (ju.component(i, 0), ju.component(i, 1), jw.component(i, 0), jw.component(i, 1));
        out.component_mut(i).iter_mut().enumerate().for_each(|(k, o)| {
            *o = w0[k] * a0[k] + w1[k] * a1[k] - (u0[k] * b0[k] + u1[k] * b1[k]);
        });
    }
    dealias(&out)
}

/// 2/3-truncated Jacobi–Lie bracket `[w, ū] = w·∇ū − ū·∇w`.
pub fn bracket_dealiased(w: &VectorField, ubar: &VectorField) -> VectorField {
    bracket_with(w, ubar, &jacobian(ubar))
}

/// Functional form of [`EnsembleState::advance`].
pub fn step_w_ensemble(ens: &EnsembleState, ubar: &VectorField, basis: &NoiseBasis) -> Result<EnsembleState, McError> {
    let mut next = ens.clone();
    next.advance(ubar, basis)?;
    Ok(next)
}

/// RK4 step of the mean equation `∂_t w̄ = T[w̄, ū]`.
pub fn step_mean_pde(w: &VectorField, ubar: &VectorField, dt: f64) -> VectorField {
    let ju = jacobian(ubar);
    let k1 = bracket_with(w, ubar, &ju);
    let k2 = bracket_with(&w.plus_scaled(0.5 * dt, &k1), ubar, &ju);
    let k3 = bracket_with(&w.plus_scaled(0.5 * dt, &k2), ubar, &ju);
    let k4 = bracket_with(&w.plus_scaled(dt, &k3), ubar, &ju);
    let mut out = w.clone();
    out.axpy(dt / 6.0, &k1);
    out.axpy(dt / 3.0, &k2);
    out.axpy(dt / 3.0, &k3);
    out.axpy(dt / 6.0, &k4);
    out
}

/// Pointwise ensemble mean and per-point sample variance of one draw.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanEstimate {
    pub mean: VectorField,
    pub variance: VectorField,
    pub n: usize,
}

/// Uncentred second moment `E[w ⊗ w]` and per-point sample variance.
#[derive(Debug, Clone, PartialEq)]
pub struct FEstimate {
    pub f: Tensor2Field,
    pub variance: Tensor2Field,
    pub n: usize,
}

// Mean and unbiased variance of per-member samples, summed in member order.
fn moments<F: GridField>(template: F, n: usize, mut sample: impl FnMut(usize, &mut [Vec<f64>])) -> (F, F) {
    let arrays = template.arrays().len();
    let len = template.grid().len();
    let mut sum = vec![vec![0.0; len]; arrays];
    let mut sum_sq = vec![vec![0.0; len]; arrays];
    let mut buf = vec![vec![0.0; len]; arrays];
    for k in 0..n {
        sample(k, &mut buf);
        for c in 0..arrays {
            for p in 0..len {
                let v = buf[c][p];
                sum[c][p] += v;
                sum_sq[c][p] += v * v;
            }
        }
    }
    let nf = n as f64;
    let mut mean = template.clone();
    let mut var = template;
    for (c, (m, v)) in mean.arrays_mut().into_iter().zip(var.arrays_mut()).enumerate() {
        for p in 0..len {
            let mu = sum[c][p] / nf;
            m[p] = mu;
            v[p] = ((sum_sq[c][p] - nf * mu * mu) / (nf - 1.0)).max(0.0);
        }
    }
    (mean, var)
}

pub fn estimate_mean(ens: &EnsembleState) -> MeanEstimate {
    let g = ens.grid();
    let (mean, variance) = moments(VectorField::zeros(g), ens.len(), |k, buf| {
        for (c, b) in buf.iter_mut().enumerate() {
            b.copy_from_slice(ens.members[k].component(c));
        }
    });
    MeanEstimate { mean, variance, n: ens.len() }
}

pub fn estimate_f(ens: &EnsembleState) -> FEstimate {
    let g = ens.grid();
    let (f, variance) = moments(Tensor2Field::zeros(g), ens.len(), |k, buf| {
        let w = &ens.members[k];
        for i in 0..2 {
            for j in 0..2 {
                let (a, b) = (w.component(i), w.component(j));
                buf[2 * i + j].iter_mut().enumerate().for_each(|(p, o)| *o = a[p] * b[p]);
            }
        }
    });
    FEstimate { f, variance, n: ens.len() }
}

/// Estimates recorded at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSnapshot {
    pub t: f64,
    pub mean: MeanEstimate,
    pub f: FEstimate,
}

impl EnsembleSnapshot {
    pub fn of(ens: &EnsembleState) -> Self {
        EnsembleSnapshot { t: ens.t, mean: estimate_mean(ens), f: estimate_f(ens) }
    }
}

/// Relative L² errors of the ensemble estimates against the PDE solutions.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    pub times: Vec<f64>,
    pub e_mean: Vec<f64>,
    pub e_f: Vec<f64>,
    /// Predicted standard errors on the same (relative) scale.
    pub se_mean: Vec<f64>,
    pub se_f: Vec<f64>,
    pub bias_allowance: f64,
    pub passed: bool,
}

// (‖est − exact‖, sqrt(Σ var / N)) relative to ‖exact‖ when that is nonzero.
fn rel_error<F: GridField>(est: &F, var: &F, n: usize, exact: &F) -> (f64, f64) {
    let diff = est.clone().plus_scaled(-1.0, exact);
    let var_sum: f64 = var.arrays().iter().map(|a| a.iter().sum::<f64>()).sum::<f64>() * var.grid().cell_area();
    let (e, se) = (diff.norm_sq().sqrt(), (var_sum / n as f64).sqrt());
    let scale = exact.norm_sq().sqrt();
    if scale > 0.0 {
        (e / scale, se / scale)
    } else {
        (e, se)
    }
}

/// Pass iff every error is within `SIGMA_BAND` predicted standard errors plus
/// a bias allowance of `BIAS_PER_DT · dt`.
pub fn compare_with_pde(
    ens_series: &[EnsembleSnapshot],
    pde_mean_series: &[(f64, VectorField)],
    pde_f_series: &[(f64, Tensor2Field)],
    dt: f64,
) -> Result<ErrorReport, McError> {
    if ens_series.len() != pde_mean_series.len() || ens_series.len() != pde_f_series.len() {
        return Err(McError::TimeGridMismatch(format!(
            "{} ensemble snapshots, {} mean and {} F samples",
            ens_series.len(),
            pde_mean_series.len(),
            pde_f_series.len()
        )));
    }
    let tol = 1e-9 * dt.max(1e-300);
    let bias_allowance = BIAS_PER_DT * dt;
    let mut r = ErrorReport {
        times: Vec::new(),
        e_mean: Vec::new(),
        e_f: Vec::new(),
        se_mean: Vec::new(),
        se_f: Vec::new(),
        bias_allowance,
        passed: true,
    };
    for ((s, (tm, m)), (tf, f)) in ens_series.iter().zip(pde_mean_series).zip(pde_f_series) {
        if (s.t - tm).abs() > tol || (s.t - tf).abs() > tol {
            return Err(McError::TimeGridMismatch(format!("snapshot at t = {} vs PDE at {tm} / {tf}", s.t)));
        }
        let (em, sm) = rel_error(&s.mean.mean, &s.mean.variance, s.mean.n, m);
        let (ef, sf) = rel_error(&s.f.f, &s.f.variance, s.f.n, f);
        r.passed &= em <= SIGMA_BAND * sm + bias_allowance && ef <= SIGMA_BAND * sf + bias_allowance;
        r.times.push(s.t);
        r.e_mean.push(em);
        r.e_f.push(ef);
        r.se_mean.push(sm);
        r.se_f.push(sf);
    }
    Ok(r)
}
