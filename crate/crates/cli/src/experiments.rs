//! Experiment drivers behind each subcommand.

use std::path::{Path, PathBuf};

use anyhow::{ensure, Result};
use lae_core::convergence::ConvergenceReport;
use lae_core::correlation::{forcing, step_f, CorrelationState, NoiseBasis};
use lae_core::field_calculus::{
    dealias, divergence, lemma2_check, lie_deriv_tensor2, GridField, GridSpec, Tensor2Field, VectorField,
};
use lae_core::io::{write_snapshot, Cell, CsvTable};
use lae_core::lae_solver::{verify_commutation, FlowState, LaeSolver, ModelParams};
use lae_core::lie_oracle::{uniform_grid, verify_first_order, verify_second_order, FlowFamily};
use lae_core::mc::{compare_with_pde, step_mean_pde, EnsembleSnapshot, EnsembleState, ErrorReport};
use lae_core::presets::{random_div_free, random_psd_tensor, random_vector, seeded, taylor_green};
use lae_core::wick::{expectation, mc_expectation, mc_mean, sample, wick_product, ChaosExpansion, MultiIndex};

use crate::config::{Config, Preset};

/// Result of one experiment.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub passed: bool,
    pub outputs: Vec<PathBuf>,
    pub summary: String,
}

pub const STEADY_TOL: f64 = 1e-8;
pub const DIV_TOL: f64 = 1e-10;
pub const LEMMA2_TOL: f64 = 1e-8;
pub const ORDER_MIN: f64 = 1.9;
pub const EXTRAPOLATED_TOL: f64 = 1e-8;
pub const FROZEN_TOL: f64 = 1e-8;
pub const LINEAR_F_TOL: f64 = 1e-10;
pub const WICK_TOL: f64 = 1e-12;

pub fn noise_basis(cfg: &Config) -> Result<NoiseBasis> {
    let g = cfg.grid_spec();
    let m = &cfg.model;
    if m.n_noise == 0 {
        return Ok(NoiseBasis::empty(g));
    }
    Ok(NoiseBasis::random(g, m.n_noise, m.noise_band, m.noise_amplitude, m.xi_seed)?)
}

pub fn initial_velocity(cfg: &Config) -> VectorField {
    let g = cfg.grid_spec();
    match cfg.model.preset {
        Preset::TaylorGreen => taylor_green(g),
        Preset::Random => random_div_free(&mut seeded(cfg.model.xi_seed.wrapping_add(1)), g, 3, 1.0),
        Preset::Zero => VectorField::zeros(g),
    }
}

fn csv(dir: &Path, name: &str, table: &CsvTable, outputs: &mut Vec<PathBuf>) -> Result<()> {
    let p = dir.join(name);
    table.write(&p)?;
    outputs.push(p);
    Ok(())
}

fn snapshot<F: GridField>(dir: &Path, name: String, field: &F, outputs: &mut Vec<PathBuf>) -> Result<()> {
    let p = dir.join(name);
    write_snapshot(field, &p)?;
    outputs.push(p);
    Ok(())
}

/// Integrate the coupled system, logging diagnostics and snapshots.
pub fn run_lae(cfg: &Config, dir: &Path) -> Result<Outcome> {
    let g = cfg.grid_spec();
    let basis = noise_basis(cfg)?;
    let f0 = Tensor2Field::identity(g, cfg.model.alpha * cfg.model.alpha);
    let params = ModelParams::new(g, cfg.model.eps, cfg.time.dt, cfg.time.t_end)?;
    let mut solver = LaeSolver::new(params, &basis, FlowState::new(initial_velocity(cfg), f0)?)?;
    let u_init = solver.state().ubar.clone();
    let steps = solver.n_steps();
    let every = cfg.time.snapshot_every;

    let mut diag = CsvTable::new(&["t", "action", "kinetic", "div_norm", "linsolve_iters"]);
    let mut corr = CsvTable::new(&["t", "trace_integral", "min_eigenvalue"]);
    let mut outputs = Vec::new();
    let mut record = |solver: &LaeSolver, k: usize, outputs: &mut Vec<PathBuf>| -> Result<f64> {
        let d = solver.diagnostics()?;
        diag.push(vec![d.t.into(), d.action.into(), d.kinetic.into(), d.div_norm.into(), d.linsolve_iters.into()]);
        let s = solver.state();
        corr.push(vec![s.t.into(), s.corr.trace_integral().into(), s.corr.min_eigenvalue().into()]);
        snapshot(dir, format!("ubar_{k:06}.laef"), &s.ubar, outputs)?;
        snapshot(dir, format!("F_{k:06}.laef"), s.f(), outputs)?;
        Ok(d.kinetic)
    };

    let e0 = record(&solver, 0, &mut outputs)?;
    let (mut max_div, mut drift, mut e_end) = (divergence(&u_init).sup_norm(), 0.0_f64, e0);
    for k in 1..=steps {
        solver.step()?;
        let s = solver.state();
        ensure!(s.ubar.is_finite() && s.f().is_finite(), "non-finite state at t = {}", s.t);
        max_div = max_div.max(divergence(&s.ubar).sup_norm());
        drift = drift.max(s.ubar.max_abs_diff(&u_init));
        if k % every == 0 || k == steps {
            e_end = record(&solver, k, &mut outputs)?;
        }
    }
    csv(dir, "diagnostics.csv", &diag, &mut outputs)?;
    csv(dir, "correlation.csv", &corr, &mut outputs)?;

    let energy_drift = if e0 > 0.0 { (e_end - e0).abs() / e0 } else { e_end.abs() };
    let steady_case = cfg.model.preset == Preset::TaylorGreen && cfg.model.eps == 0.0;
    let steady_ok = !steady_case || (drift <= STEADY_TOL && energy_drift <= STEADY_TOL);
    let passed = max_div <= DIV_TOL && steady_ok;
    let mut summary = format!("run-lae: {steps} steps, max div {max_div:.3e}, kinetic drift {energy_drift:.3e}");
    if steady_case {
        summary += &format!(", steady drift {drift:.3e}");
    }
    Ok(Outcome { passed, outputs, summary })
}

/// Ensemble of fluctuation fields against the mean and `F` equations in a
/// frozen mean flow.
pub fn run_mc(cfg: &Config, dir: &Path) -> Result<Outcome> {
    let g = cfg.grid_spec();
    let basis = noise_basis(cfg)?;
    let u = initial_velocity(cfg);
    let mc = &cfg.mc;
    let steps = ((mc.t_end / mc.dt).round() as usize).max(1);
    let every = (steps / 10).max(1);
    let zero = VectorField::zeros(g);
    let mut ens = EnsembleState::new(&zero, mc.n_members, mc.seed, mc.dt, mc.antithetic)?;
    let mut wbar = zero.clone();
    let mut f = CorrelationState::zero(g);
    let (mut snaps, mut means, mut fs) = (Vec::new(), Vec::new(), Vec::new());
    for k in 1..=steps {
        ens.advance(&u, &basis)?;
        wbar = step_mean_pde(&wbar, &u, mc.dt);
        f = step_f(&f, |_| u.clone(), &basis, mc.dt)?;
        if k % every == 0 || k == steps {
            snaps.push(EnsembleSnapshot::of(&ens));
            means.push((ens.t, wbar.clone()));
            fs.push((ens.t, f.f.clone()));
        }
    }
    let rep = compare_with_pde(&snaps, &means, &fs, mc.dt)?;

    let mut outputs = Vec::new();
    let mut by_t = CsvTable::new(&["t", "e_mean", "se_mean", "e_F", "se_F"]);
    for i in 0..rep.times.len() {
        by_t.push(vec![rep.times[i].into(), rep.e_mean[i].into(), rep.se_mean[i].into(), rep.e_f[i].into(), rep.se_f[i].into()]);
    }
    csv(dir, "error_vs_time.csv", &by_t, &mut outputs)?;

    let mut by_n = CsvTable::new(&["n_members", "e_F", "se_F"]);
    for (n, r) in error_vs_members(&ens, &wbar, &f.f)? {
        by_n.push(vec![n.into(), r.e_f[0].into(), r.se_f[0].into()]);
    }
    csv(dir, "error_vs_n.csv", &by_n, &mut outputs)?;
    let last = snaps.last().expect("at least one snapshot");
    snapshot(dir, "F_hat.laef".into(), &last.f.f, &mut outputs)?;
    snapshot(dir, "mean_hat.laef".into(), &last.mean.mean, &mut outputs)?;

    let i = rep.times.len() - 1;
    let summary = format!(
        "run-mc: N = {}, t = {:.4}, e_F = {:.3e} (se {:.3e}), e_mean = {:.3e} (se {:.3e})",
        mc.n_members, rep.times[i], rep.e_f[i], rep.se_f[i], rep.e_mean[i], rep.se_mean[i]
    );
    Ok(Outcome { passed: rep.passed, outputs, summary })
}

/// Errors of the leading `N/100`, `N/10` and `N` members at the final time.
pub fn error_vs_members(ens: &EnsembleState, wbar: &VectorField, f: &Tensor2Field) -> Result<Vec<(usize, ErrorReport)>> {
    let mut out: Vec<(usize, ErrorReport)> = Vec::new();
    for d in [100, 10, 1] {
        let mut n = ens.len() / d;
        if ens.antithetic {
            n -= n % 2;
        }
        if n < 2 || out.iter().any(|(m, _)| *m == n) {
            continue;
        }
        let sub = EnsembleState { members: ens.members[..n].to_vec(), ..ens.clone() };
        let r = compare_with_pde(&[EnsembleSnapshot::of(&sub)], &[(ens.t, wbar.clone())], &[(ens.t, f.clone())], ens.dt)?;
        out.push((n, r));
    }
    Ok(out)
}

/// First- and second-order Magnus checks on the generic so(3) family.
pub fn magnus_reports() -> Result<(ConvergenceReport, ConvergenceReport)> {
    let fam = FlowFamily::so3_generic(uniform_grid(0.0, 2.0, 9))?;
    Ok((verify_first_order(&fam, 1e-2, 1e-2)?, verify_second_order(&fam, 1e-2, 1e-2)?))
}

pub fn verify_magnus(_cfg: &Config, dir: &Path) -> Result<Outcome> {
    let (r1, r2) = magnus_reports()?;
    let order = r1.observed_order.min(r2.observed_order);
    let mut t = CsvTable::new(&["h_eps", "residual_first", "residual_second", "observed_order"]);
    for i in 0..r1.steps.len() {
        t.push(vec![r1.steps[i].into(), r1.residuals[i].into(), r2.residuals[i].into(), order.into()]);
    }
    let mut outputs = Vec::new();
    csv(dir, "magnus.csv", &t, &mut outputs)?;
    let passed = [&r1, &r2].iter().all(|r| r.observed_order >= ORDER_MIN && r.extrapolated_residual <= EXTRAPOLATED_TOL);
    let summary = format!(
        "verify-magnus: orders {:.3} / {:.3}, extrapolated {:.3e} / {:.3e}",
        r1.observed_order, r2.observed_order, r1.extrapolated_residual, r2.extrapolated_residual
    );
    Ok(Outcome { passed, outputs, summary })
}

/// Sup-norm gaps between the two second-order forms on random fields.
pub fn lemma2_trials(grid: GridSpec, trials: usize, seed: u64) -> Result<Vec<f64>> {
    let band = (grid.n() as i64 / 8).max(1);
    let mut rng = seeded(seed);
    (0..trials)
        .map(|_| {
            let mut f = || random_vector(&mut rng, grid, band);
            let (u, w, chi, wd, cd) = (f(), f(), f(), f(), f());
            Ok(lemma2_check(&u, &w, &chi, &wd, &cd)?)
        })
        .collect()
}

pub fn verify_lemma2(cfg: &Config, dir: &Path) -> Result<Outcome> {
    let gaps = lemma2_trials(cfg.grid_spec(), 100, cfg.mc.seed)?;
    let mut t = CsvTable::new(&["trial", "sup_diff"]);
    for (i, d) in gaps.iter().enumerate() {
        t.push(vec![i.into(), (*d).into()]);
    }
    let mut outputs = Vec::new();
    csv(dir, "lemma2.csv", &t, &mut outputs)?;
    let worst = gaps.iter().copied().fold(0.0, f64::max);
    Ok(Outcome { passed: worst <= LEMMA2_TOL, outputs, summary: format!("verify-lemma2: worst gap {worst:.3e}") })
}

/// One random Wick trial.
#[derive(Debug, Clone)]
pub struct WickTrial {
    pub e_s: f64,
    pub e_t: f64,
    pub e_st: f64,
    pub mc: Option<(f64, f64)>,
}

#[derive(Debug, Clone)]
pub struct WickSummary {
    pub trials: Vec<WickTrial>,
    pub max_factor_error: f64,
    pub deterministic_exact: bool,
    pub mc_within: usize,
    pub mc_total: usize,
    /// `E[W²] − E[W◇W]` by sampling, with its standard error.
    pub gap: (f64, f64),
}

impl WickSummary {
    pub fn passed(&self) -> bool {
        self.max_factor_error <= WICK_TOL
            && self.deterministic_exact
            && self.mc_within == self.mc_total
            && (self.gap.0 - 1.0).abs() <= 4.0 * self.gap.1
    }
}

/// Random expansions of order ≤ 6 in ≤ 4 coordinates. The first
/// `mc_trials` products are also sampled with `samples` draws.
pub fn wick_suite(seed: u64, trials: usize, mc_trials: usize, samples: usize) -> Result<WickSummary> {
    let mut rng = seeded(seed);
    let mut out = WickSummary {
        trials: Vec::with_capacity(trials),
        max_factor_error: 0.0,
        deterministic_exact: true,
        mc_within: 0,
        mc_total: 0,
        gap: (0.0, 0.0),
    };
    for i in 0..trials {
        let dim = 1 + i % 4;
        let s = plus(&ChaosExpansion::random(&mut rng, dim, 6, 6), &ChaosExpansion::random(&mut rng, 1, 0, 1))?;
        let t = plus(&ChaosExpansion::random(&mut rng, dim, 6, 6), &ChaosExpansion::random(&mut rng, 1, 0, 1))?;
        let st = wick_product(&s, &t)?;
        let (e_s, e_t, e_st) = (expectation(&s), expectation(&t), expectation(&st));
        out.max_factor_error = out.max_factor_error.max((e_st - e_s * e_t).abs());
        let c = ChaosExpansion::constant(1, e_s + 0.5);
        out.deterministic_exact &= wick_product(&c, &t)? == t.scaled(e_s + 0.5);
        let mc = if i < mc_trials {
            let (m, se) = mc_expectation(&st, samples, seed.wrapping_add(i as u64))?;
            out.mc_total += 1;
            if (m - e_st).abs() <= 4.0 * se {
                out.mc_within += 1;
            }
            Some((m, se))
        } else {
            None
        };
        out.trials.push(WickTrial { e_s, e_t, e_st, mc });
    }
    let w = ChaosExpansion::hermite(1, MultiIndex::single(0, 1), 1.0)?;
    let ww = wick_product(&w, &w)?;
    let (sq, se_sq) = mc_mean(|x| x[0] * x[0], 1, samples, seed ^ 0x5eed)?;
    let (wk, se_wk) = mc_mean(|x| sample(&ww, x).expect("one coordinate"), 1, samples, seed ^ 0xface)?;
    out.gap = (sq - wk, se_sq.hypot(se_wk));
    Ok(out)
}

fn plus(a: &ChaosExpansion, b: &ChaosExpansion) -> Result<ChaosExpansion> {
    let terms = a.coeffs.iter().chain(&b.coeffs).map(|(k, c)| (k.clone(), *c));
    Ok(ChaosExpansion::from_terms(a.dim.max(b.dim), terms)?)
}

pub fn verify_wick(cfg: &Config, dir: &Path) -> Result<Outcome> {
    let s = wick_suite(cfg.mc.seed, 1000, 20, 20_000)?;
    let mut t = CsvTable::new(&["trial", "E_S", "E_T", "E_ST", "mc_mean", "mc_stderr"]);
    for (i, tr) in s.trials.iter().enumerate() {
        let (m, se) = tr.mc.unwrap_or((f64::NAN, f64::NAN));
        t.push(vec![i.into(), tr.e_s.into(), tr.e_t.into(), tr.e_st.into(), Cell::Real(m), Cell::Real(se)]);
    }
    let mut outputs = Vec::new();
    csv(dir, "wick.csv", &t, &mut outputs)?;
    let summary = format!(
        "verify-wick: max |E[S◇T] − E[S]E[T]| = {:.3e}, MC {}/{} within 4 se, W² gap {:.4} ± {:.4}",
        s.max_factor_error, s.mc_within, s.mc_total, s.gap.0, s.gap.1
    );
    Ok(Outcome { passed: s.passed(), outputs, summary })
}

/// Frozen-`F`, constant-`G` and generic commutation checks.
pub fn commutation_reports(grid: GridSpec, seed: u64) -> Result<[ConvergenceReport; 3]> {
    let g = grid;
    let tg = taylor_green(g);
    let q0 = VectorField::from_fn(g, |x, y| [(2.0 * y).sin(), (x - y).cos()]);
    let q1 = VectorField::from_fn(g, |x, y| [x.cos() * y.sin(), 0.5 * (2.0 * x).sin()]);
    let q = |t: f64| q0.plus_scaled(t, &q1);

    let fu = Tensor2Field::outer(&tg, &tg)?;
    let frozen = verify_commutation(|_| tg.clone(), |_| fu.clone(), |_| Tensor2Field::zeros(g), q, 0.3, 1e-2)?;

    let b = NoiseBasis::random(g, 2, 3.min(g.n() as i64 / 4 - 1), 1.0, seed)?;
    let gg = forcing(&b)?;
    let f0 = Tensor2Field::identity(g, 0.3);
    let zero = VectorField::zeros(g);
    let linear = verify_commutation(|_| zero.clone(), |t| f0.plus_scaled(t, &gg), |_| gg.clone(), q, 0.2, 1e-2)?;

    let mut rng = seeded(seed.wrapping_add(11));
    let u = dealias(&random_div_free(&mut rng, g, 2, 1.0));
    let fa = random_psd_tensor(&mut rng, g, 2, 1, 0.5, 0.2);
    let fb = random_psd_tensor(&mut rng, g, 2, 1, 0.5, 0.0);
    let ff = |t: f64| fa.plus_scaled(t.sin(), &fb);
    let gfun = |t: f64| fb.scaled(t.cos()) + lie_deriv_tensor2(&u, &ff(t)).expect("same grid");
    let qg = |t: f64| q0.scaled(t.cos()) + q1.scaled((2.0 * t).sin());
    let generic = verify_commutation(|_| u.clone(), ff, gfun, qg, 0.4, 0.1)?;
    Ok([frozen, linear, generic])
}

pub fn verify_commutation_cmd(cfg: &Config, dir: &Path) -> Result<Outcome> {
    let g = GridSpec::periodic(cfg.grid.n.min(32))?;
    let [frozen, linear, generic] = commutation_reports(g, cfg.mc.seed)?;
    let mut t = CsvTable::new(&["case", "h_t", "residual"]);
    for (name, r) in [("frozen", &frozen), ("constant_g", &linear), ("generic", &generic)] {
        for (h, res) in r.steps.iter().zip(&r.residuals) {
            t.push(vec![name.into(), (*h).into(), (*res).into()]);
        }
    }
    let mut outputs = Vec::new();
    csv(dir, "commutation.csv", &t, &mut outputs)?;
    let passed = frozen.max_residual() <= FROZEN_TOL
        && linear.max_residual() <= LINEAR_F_TOL
        && generic.observed_order >= ORDER_MIN;
    let summary = format!(
        "verify-commutation: frozen {:.3e}, constant G {:.3e}, generic order {:.3}",
        frozen.max_residual(),
        linear.max_residual(),
        generic.observed_order
    );
    Ok(Outcome { passed, outputs, summary })
}
