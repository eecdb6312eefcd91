//! Acceptance suite: one line per criterion on stderr, then the assertion.

use std::io::Write;
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use lae_cli::experiments::{commutation_reports, lemma2_trials, wick_suite};
use lae_cli::{dispatch, Config, RunManifest, EXIT_PASS};
use lae_core::convergence::{ladder, ConvergenceReport};
use lae_core::correlation::{f_rhs, forcing, step_f, CorrelationState, NoiseBasis};
use lae_core::field_calculus::{
    c_operator, divergence, inner_product, leray_project, Geometry, GridField, GridSpec, Spectrum, Tensor2Field,
    VectorField,
};
use lae_core::lae_solver::{
    ep_residual, invert_momentum, momentum_map, step_system, FlowState, LaeSolver, ModelParams,
};
use lae_core::lie_oracle::{uniform_grid, verify_first_order, verify_second_order, AlgebraElement, FlowFamily};
use lae_core::mc::{
    compare_with_pde, estimate_f, martingale_check, Anticipating, BrownianAdapted, Constant, EnsembleSnapshot,
    EnsembleState,
};
use lae_core::presets::{random_div_free, random_psd_tensor, random_vector, seeded, taylor_green};
use rustfft::num_complex::Complex64;

// Criteria run one at a time so that runtime budgets are not shared.
static SERIAL: Mutex<()> = Mutex::new(());

fn report(id: u32, name: &str, passed: bool, detail: &str) {
    let line = format!("acceptance {id:>2} [{}] {name}: {detail}\n", if passed { "PASS" } else { "FAIL" });
    // Written past the test harness capture so the line always shows.
    let _ = std::io::stderr().lock().write_all(line.as_bytes());
    assert!(passed, "criterion {id} failed: {detail}");
}

fn within(start: Instant, budget: u64) -> (bool, Duration) {
    let e = start.elapsed();
    (e <= Duration::from_secs(budget), e)
}

fn lock() -> std::sync::MutexGuard<'static, ()> {
    SERIAL.lock().unwrap_or_else(|p| p.into_inner())
}

#[test]
fn criterion_01_magnus() {
    let _g = lock();
    let start = Instant::now();
    let t_grid = uniform_grid(0.0, 2.0, 9);
    let mut rng = seeded(101);
    let mut r = || AlgebraElement::random_so3(&mut rng, 0.6);
    let (a0, a1, b0, b1, c0, c1) = (r(), r(), r(), r(), r(), r());
    let random = FlowFamily::new(
        Arc::new(move |t: f64| a0.plus(&a1.scaled((1.7 * t).sin()))),
        Arc::new(move |t: f64| b0.plus(&b1.scaled((0.8 * t).cos()))),
        Arc::new(move |t: f64| c0.plus(&c1.scaled(t))),
        t_grid.clone(),
    )
    .unwrap();
    let families = [FlowFamily::so3_generic(t_grid).unwrap(), random];
    let mut ok = true;
    let mut detail = Vec::new();
    for fam in &families {
        for (label, rep) in [
            ("first", verify_first_order(fam, 1e-2, 1e-2).unwrap()),
            ("second", verify_second_order(fam, 1e-2, 1e-2).unwrap()),
        ] {
            ok &= rep.observed_order >= 1.9 && rep.extrapolated_residual <= 1e-8;
            detail.push(format!("{label} order {:.3} extrap {:.1e}", rep.observed_order, rep.extrapolated_residual));
        }
    }
    let (fast, e) = within(start, 10);
    report(1, "Magnus expansion", ok && fast, &format!("{} in {e:.2?}", detail.join(", ")));
}

#[test]
fn criterion_02_lemma2() {
    let _g = lock();
    let start = Instant::now();
    let gaps = lemma2_trials(GridSpec::periodic(64).unwrap(), 100, 2024).unwrap();
    let worst = gaps.iter().copied().fold(0.0, f64::max);
    let (fast, e) = within(start, 30);
    report(2, "second-order forms agree", gaps.len() == 100 && worst <= 1e-8 && fast, &format!("worst sup gap {worst:.2e} over 100 trials in {e:.2?}"));
}

#[test]
fn criterion_03_f_equation_vs_monte_carlo() {
    let _g = lock();
    let start = Instant::now();
    let g = GridSpec::periodic(16).unwrap();
    let basis = NoiseBasis::random(g, 2, 2, 1.0, 31).unwrap();
    let zero = VectorField::zeros(g);

    // (a) ū = 0: F̂(t) against t Σ ξ⊗ξ.
    let (dt, steps, reps) = (0.05, 10, 20u64);
    let exact = forcing(&basis).unwrap().scaled(dt * steps as f64);
    let sizes = [100usize, 1000, 10_000];
    let mut errs = Vec::new();
    for (i, &n) in sizes.iter().enumerate() {
        let mut acc = 0.0;
        for r in 0..reps {
            let mut ens = EnsembleState::new(&zero, n, 10_000 * i as u64 + r, dt, false).unwrap();
            for _ in 0..steps {
                ens.advance(&zero, &basis).unwrap();
            }
            acc += (estimate_f(&ens).f - exact.clone()).l2_norm() / exact.l2_norm();
        }
        errs.push(acc / reps as f64);
    }
    let x: Vec<f64> = sizes.iter().map(|&n| (n as f64).ln()).collect();
    let y: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
    let (mx, my) = (x.iter().sum::<f64>() / 3.0, y.iter().sum::<f64>() / 3.0);
    let slope = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum::<f64>()
        / x.iter().map(|a| (a - mx) * (a - mx)).sum::<f64>();
    let ok_a = (slope + 0.5).abs() <= 0.1;

    // (b) steady Taylor–Green ū, N = 10⁴, dt = 1e-3, t = 0.5.
    let u = taylor_green(g);
    let dt = 1e-3;
    let mut ens = EnsembleState::new(&zero, 10_000, 7, dt, false).unwrap();
    let mut f = CorrelationState::zero(g);
    for _ in 0..500 {
        ens.advance(&u, &basis).unwrap();
        f = step_f(&f, |_| u.clone(), &basis, dt).unwrap();
    }
    let rep = compare_with_pde(&[EnsembleSnapshot::of(&ens)], &[(ens.t, zero.clone())], &[(ens.t, f.f.clone())], dt).unwrap();
    let ok_b = rep.e_f[0] <= 0.1 && rep.passed && (ens.t - 0.5).abs() < 1e-12;

    let (fast, e) = within(start, 300);
    report(
        3,
        "F equation vs Monte Carlo",
        ok_a && ok_b && fast,
        &format!(
            "slope {slope:.3} (errors {:.2e}, {:.2e}, {:.2e}); TG e_F(0.5) = {:.3e}, 4 se + 10 dt = {:.3e}; {e:.2?}",
            errs[0],
            errs[1],
            errs[2],
            rep.e_f[0],
            4.0 * rep.se_f[0] + rep.bias_allowance
        ),
    );
}

#[test]
fn criterion_04_euler_reduction() {
    let _g = lock();
    let start = Instant::now();
    let g = GridSpec::periodic(64).unwrap();
    let params = ModelParams::new(g, 0.0, 1e-3, 1.0).unwrap();
    let mut solver =
        LaeSolver::new(params, &NoiseBasis::empty(g), FlowState::new(taylor_green(g), Tensor2Field::zeros(g)).unwrap()).unwrap();
    let u0 = solver.state().ubar.clone();
    let e0 = 0.5 * inner_product(&u0, &u0).unwrap();
    let (mut drift, mut energy, mut div) = (0.0_f64, 0.0_f64, divergence(&u0).sup_norm());
    for _ in 0..solver.n_steps() {
        solver.step().unwrap();
        let u = &solver.state().ubar;
        drift = drift.max(u.max_abs_diff(&u0));
        energy = energy.max((0.5 * inner_product(u, u).unwrap() - e0).abs() / e0);
        div = div.max(divergence(u).sup_norm());
    }
    let t = solver.state().t;
    let (fast, e) = within(start, 60);
    report(
        4,
        "Euler reduction",
        drift <= 1e-8 && energy <= 1e-8 && div <= 1e-10 && (t - 1.0).abs() < 1e-9 && fast,
        &format!("state drift {drift:.2e}, energy drift {energy:.2e}, max div {div:.2e} to t = {t:.3} in {e:.2?}"),
    );
}

#[test]
fn criterion_05_operator_algebra() {
    let _g = lock();
    let g = GridSpec::periodic(32).unwrap();
    let mut rng = seeded(55);
    let (eps, alpha2, tol) = (0.3, 0.4, 1e-10);

    // Isotropic F: û = P m̂ / (1 + ε²α²|k|²).
    let m = random_vector(&mut rng, g, 10);
    let u = invert_momentum(&m.flat(), &Tensor2Field::identity(g, alpha2), eps, tol, 500).unwrap();
    let pm = leray_project(&m);
    let symbol = |c: usize| {
        let mut s = Spectrum::forward(g, pm.component(c));
        s.apply(|kx, ky| {
            let k2 = g.derivative_wavenumber(kx).powi(2) + g.derivative_wavenumber(ky).powi(2);
            Complex64::new(1.0 / (1.0 + eps * eps * alpha2 * k2), 0.0)
        });
        s.inverse()
    };
    let closed = VectorField::from_components(g, symbol(0), symbol(1)).unwrap();
    let iso = u.max_abs_diff(&closed);

    // Anisotropic round trip.
    let f = random_psd_tensor(&mut rng, g, 3, 2, 0.5, 0.1);
    let v = random_div_free(&mut rng, g, 6, 1.0);
    let mv = momentum_map(&v, &f, eps, Geometry::Flat).unwrap();
    let back = invert_momentum(&mv, &f, eps, tol, 500).unwrap();
    let round = (&back - &v).l2_norm() / v.l2_norm();

    // Self-adjointness and sign of C.
    let (p, q) = (random_vector(&mut rng, g, 8), random_vector(&mut rng, g, 8));
    let (cp, cq) = (c_operator(&p, &f).unwrap(), c_operator(&q, &f).unwrap());
    let lhs = inner_product(&cq, &p).unwrap();
    let adj = (lhs - inner_product(&q, &cp).unwrap()).abs() / lhs.abs().max(1.0);
    let neg = inner_product(&cq, &q).unwrap() / inner_product(&q, &q).unwrap();

    report(
        5,
        "operator algebra",
        iso <= 1e-10 && round <= tol && adj <= 1e-10 && neg <= 1e-10,
        &format!("isotropic {iso:.2e}, round trip {round:.2e}, adjointness {adj:.2e}, <Cq,q>/<q,q> = {neg:.3}"),
    );
}

#[test]
fn criterion_06_commutation() {
    let _g = lock();
    let [frozen, linear, generic] = commutation_reports(GridSpec::periodic(32).unwrap(), 6).unwrap();
    report(
        6,
        "commutation relation",
        generic.observed_order >= 1.9 && frozen.max_residual() <= 1e-8 && linear.max_residual() <= 1e-10,
        &format!(
            "generic order {:.3}, frozen F {:.2e}, constant G {:.2e}",
            generic.observed_order,
            frozen.max_residual(),
            linear.max_residual()
        ),
    );
}

#[test]
fn criterion_07_cross_form_consistency() {
    let _g = lock();
    let g = GridSpec::periodic(64).unwrap();
    let mut rng = seeded(77);
    let u0 = random_div_free(&mut rng, g, 3, 1.0);
    let f0 = random_psd_tensor(&mut rng, g, 3, 2, 0.5, 0.2);
    let basis = NoiseBasis::random(g, 2, 2, 0.5, 9).unwrap();
    let t_mid = 0.04;
    let steps = ladder(0.02, 0.5, 4);
    let residuals: Vec<f64> = steps
        .iter()
        .map(|&dt| {
            let p = ModelParams::new(g, 0.4, dt, t_mid + dt).unwrap();
            let mut s = FlowState::new(u0.clone(), f0.clone()).unwrap();
            let n = (t_mid / dt).round() as usize;
            for _ in 0..n - 1 {
                s = step_system(&s, &p, &basis).unwrap();
            }
            let before = s.clone();
            let mid = step_system(&before, &p, &basis).unwrap();
            let after = step_system(&mid, &p, &basis).unwrap();
            let du = (&after.ubar - &before.ubar).scaled(0.5 / dt);
            let df = (after.f().clone() - before.f().clone()).scaled(0.5 / dt);
            ep_residual(&mid, &p, &du, &df).unwrap()
        })
        .collect();
    let rep = ConvergenceReport::from_residuals(&steps, residuals.clone(), 0.0);
    // Sanity: the exact resolved rates leave only a roundoff-level residual.
    let s = FlowState::new(u0, f0).unwrap();
    let p = ModelParams::new(g, 0.4, 1e-3, 1.0).unwrap();
    let rhs = lae_core::lae_solver::resolved_rhs(&s, &p, &basis).unwrap();
    let floor = ep_residual(&s, &p, &rhs.dubar_dt, &f_rhs(&s.ubar, s.f(), &basis).unwrap()).unwrap();
    report(
        7,
        "cross-form consistency",
        rep.observed_order >= 1.8 && rep.monotone,
        &format!(
            "order {:.3}, residuals {}, exact-rate floor {floor:.1e}",
            rep.observed_order,
            residuals.iter().map(|r| format!("{r:.2e}")).collect::<Vec<_>>().join(" ")
        ),
    );
}

#[test]
fn criterion_08_wick() {
    let _g = lock();
    let s = wick_suite(88, 1000, 20, 20_000).unwrap();
    report(
        8,
        "Wick calculus",
        s.passed() && s.trials.len() == 1000,
        &format!(
            "max |E[S◇T] − E[S]E[T]| = {:.1e}, deterministic exact {}, MC {}/{} within 4 se, E[W²] − E[W◇W] = {:.4} ± {:.4}",
            s.max_factor_error, s.deterministic_exact, s.mc_within, s.mc_total, s.gap.0, s.gap.1
        ),
    );
}

#[test]
fn criterion_09_martingale() {
    let _g = lock();
    let (paths, dt, t) = (2000, 0.01, 1.0);
    let (mut adapted_ok, mut control_fail) = (0, 0);
    let mut worst = 0.0_f64;
    for seed in 0..20u64 {
        for z in [
            martingale_check(&Constant(1.0), paths, dt, t, seed).unwrap(),
            martingale_check(&BrownianAdapted, paths, dt, t, seed).unwrap(),
            martingale_check(&|s: f64, w: f64, _: f64| s * w.sin(), paths, dt, t, seed).unwrap(),
        ] {
            worst = worst.max(z.0.abs() / z.1);
            adapted_ok += (z.0.abs() <= 4.0 * z.1) as usize;
        }
        let (m, se) = martingale_check(&Anticipating, paths, dt, t, seed).unwrap();
        control_fail += (m.abs() > 4.0 * se) as usize;
    }
    report(
        9,
        "martingale property",
        adapted_ok == 60 && control_fail == 20,
        &format!("adapted {adapted_ok}/60 pass (worst |mean|/se {worst:.2}), anticipating control fails {control_fail}/20"),
    );
}

fn outputs(dir: &std::path::Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "csv" || x == "laef"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect();
    v.sort();
    v
}

#[test]
fn criterion_10_reproducibility() {
    let _g = lock();
    let mut cfg = Config::default();
    cfg.grid.n = 16;
    cfg.model.eps = 0.3;
    cfg.model.alpha = 0.2;
    cfg.time.dt = 0.01;
    cfg.time.t_end = 0.05;
    cfg.time.snapshot_every = 2;
    cfg.mc.n_members = 64;
    cfg.mc.dt = 0.01;
    cfg.mc.t_end = 0.1;
    let mut same = true;
    let mut files = 0;
    for cmd in ["run-lae", "run-mc"] {
        let mut runs = Vec::new();
        for threads in ["1", "3"] {
            let d = tempfile::tempdir().unwrap();
            cfg.output.dir = d.path().to_path_buf();
            std::env::set_var("LAE_LAB_THREADS", threads);
            assert_eq!(dispatch(cmd, &cfg), EXIT_PASS);
            let m = RunManifest::read(d.path()).unwrap();
            runs.push((m.config_hash, m.seed, outputs(d.path())));
        }
        std::env::remove_var("LAE_LAB_THREADS");
        same &= runs[0] == runs[1] && runs[0].2.iter().any(|(n, _)| n.ends_with(".laef"));
        files += runs[0].2.len();
    }
    report(10, "reproducibility", same, &format!("{files} CSV/LAEF files bitwise identical across two runs"));
}
