use lae_core::correlation::{f_rhs, forcing, NoiseBasis};
use lae_core::field_calculus::{
    c_operator, dealias, directional_derivative, laplacian, leray_project, lie_deriv_tensor2, GridField, GridSpec,
    ScalarField, Tensor2Field, VectorField,
};
use lae_core::lae_solver::{
    ep_residual, resolved_rhs, step_system, verify_commutation, FlowState, LaeSolver, ModelParams,
};
use lae_core::presets::{random_div_free, random_psd_tensor, seeded, taylor_green};

fn params(n: usize, eps: f64, dt: f64) -> ModelParams {
    ModelParams::new(GridSpec::periodic(n).unwrap(), eps, dt, 1.0).unwrap()
}

fn vlaplacian(u: &VectorField) -> VectorField {
    VectorField::from_scalars(laplacian(&u.scalar(0)), laplacian(&u.scalar(1))).unwrap()
}

#[test]
fn taylor_green_is_a_fixed_point() {
    for eps in [0.0, 0.3] {
        let p = params(32, eps, 1e-3);
        let g = p.grid;
        let s = FlowState::new(taylor_green(g), Tensor2Field::identity(g, 0.5 * eps)).unwrap();
        let r = resolved_rhs(&s, &p, &NoiseBasis::empty(g)).unwrap();
        assert!(r.dubar_dt.sup_norm() < 1e-10, "{eps}: {}", r.dubar_dt.sup_norm());
    }
}

#[test]
fn zero_velocity_stays_zero() {
    let p = params(16, 0.2, 1e-2);
    let g = p.grid;
    let b = NoiseBasis::random(g, 2, 2, 1.0, 4).unwrap();
    let mut s = FlowState::new(VectorField::zeros(g), Tensor2Field::zeros(g)).unwrap();
    assert_eq!(resolved_rhs(&s, &p, &b).unwrap().dubar_dt.sup_norm(), 0.0);
    for _ in 0..5 {
        s = step_system(&s, &p, &b).unwrap();
    }
    assert_eq!(s.ubar.sup_norm(), 0.0);
    assert!(s.f().max_abs_diff(&forcing(&b).unwrap().scaled(s.t)) < 1e-13);
}

#[test]
fn euler_reduction_matches_projected_advection() {
    let p = params(32, 0.0, 1e-3);
    let g = p.grid;
    let u = random_div_free(&mut seeded(3), g, 4, 1.0);
    let s = FlowState::new(u.clone(), Tensor2Field::zeros(g)).unwrap();
    let r = resolved_rhs(&s, &p, &NoiseBasis::empty(g)).unwrap();
    let expect = -leray_project(&directional_derivative(&u, &u).unwrap());
    assert!(r.dubar_dt.max_abs_diff(&expect) < 1e-12);
    assert!(ep_residual(&s, &p, &r.dubar_dt, &Tensor2Field::zeros(g)).unwrap() < 1e-9);
}

#[test]
fn isotropic_rhs_differs_from_euler_alpha_by_the_commutator() {
    // With F = α²I the resolved form carries −ε² C_{∂_t F} ū relative to
    // Euler-α; by the commutation relation that is ε²α²[Δ, ū·∇]ū.
    let (eps, alpha2) = (0.3, 0.4);
    let p = params(32, eps, 1e-3);
    let g = p.grid;
    let u = random_div_free(&mut seeded(8), g, 4, 1.0);
    let f = Tensor2Field::identity(g, alpha2);
    let s = FlowState::new(u.clone(), f.clone()).unwrap();
    let a = resolved_rhs(&s, &p, &NoiseBasis::empty(g)).unwrap().dubar_dt;
    let e2 = eps * eps * alpha2;
    // Euler-α: (1 − e2 Δ)a = −ū·∇v − (∇ū)ᵀv + ∇(·), v = (1 − e2 Δ)ū
    let v = u.plus_scaled(-e2, &vlaplacian(&u));
    let lie = lae_core::field_calculus::lie_deriv_oneform(&u, &v.flat()).unwrap().sharp();
    let lhs_ours = a.plus_scaled(-e2, &vlaplacian(&a));
    let comm = vlaplacian(&directional_derivative(&u, &u).unwrap()) - directional_derivative(&u, &vlaplacian(&u)).unwrap();
    let diff = leray_project(&(lhs_ours + lie - comm.scaled(e2)));
    assert!(diff.sup_norm() < 1e-9, "{}", diff.sup_norm());
}

#[test]
fn ep_residual_of_exact_rhs_is_small() {
    let p = params(64, 0.4, 1e-3);
    let g = p.grid;
    let mut rng = seeded(21);
    let u = random_div_free(&mut rng, g, 3, 1.0);
    let f = random_psd_tensor(&mut rng, g, 3, 2, 0.5, 0.2);
    let b = NoiseBasis::random(g, 2, 2, 0.5, 5).unwrap();
    let s = FlowState::new(u, f).unwrap();
    let r = resolved_rhs(&s, &p, &b).unwrap();
    assert!(r.linsolve_iters > 0);
    let fdot = f_rhs(&s.ubar, s.f(), &b).unwrap();
    let res = ep_residual(&s, &p, &r.dubar_dt, &fdot).unwrap();
    assert!(res < 1e-6, "{res}");
    let z = FlowState::new(VectorField::zeros(g), Tensor2Field::zeros(g)).unwrap();
    assert_eq!(ep_residual(&z, &p, &VectorField::zeros(g), &Tensor2Field::zeros(g)).unwrap(), 0.0);
}

#[test]
fn pressure_of_taylor_green() {
    // Steady Euler: ∇p = −ū·∇ū with p = (cos 2x + cos 2y)/4.
    let p = params(32, 0.0, 1e-3);
    let g = p.grid;
    let s = FlowState::new(taylor_green(g), Tensor2Field::zeros(g)).unwrap();
    let r = resolved_rhs(&s, &p, &NoiseBasis::empty(g)).unwrap();
    // The momentum-form pressure is the Euler pressure minus |ū|²/2.
    let mut exact = ScalarField::from_fn(g, |x, y| {
        let (u, v) = (x.sin() * y.cos(), -x.cos() * y.sin());
        0.25 * ((2.0 * x).cos() + (2.0 * y).cos()) - 0.5 * (u * u + v * v)
    });
    let mean = exact.mean();
    exact.values_mut().iter_mut().for_each(|v| *v -= mean);
    assert!(r.pressure.max_abs_diff(&exact) < 1e-12);
}

#[test]
fn coupled_step_self_convergence() {
    let g = GridSpec::periodic(16).unwrap();
    let mut rng = seeded(13);
    let u0 = random_div_free(&mut rng, g, 2, 0.5);
    let f0 = random_psd_tensor(&mut rng, g, 2, 1, 0.5, 0.1);
    let b = NoiseBasis::random(g, 1, 2, 0.5, 2).unwrap();
    let run = |steps: usize| {
        let p = ModelParams::new(g, 0.3, 0.2 / steps as f64, 0.2).unwrap();
        let mut solver = LaeSolver::new(p, &b, FlowState::new(u0.clone(), f0.clone()).unwrap()).unwrap();
        for _ in 0..steps {
            solver.step().unwrap();
        }
        solver.state().clone()
    };
    let (a, bb, c) = (run(2), run(4), run(8));
    let order = (a.ubar.max_abs_diff(&bb.ubar) / bb.ubar.max_abs_diff(&c.ubar)).log2();
    assert!(order >= 3.8, "{order}");
    assert!(c.f().is_symmetric());
    assert!(lae_core::field_calculus::divergence(&c.ubar).sup_norm() < 1e-10);
}

#[test]
fn solver_diagnostics() {
    let g = GridSpec::periodic(16).unwrap();
    let p = ModelParams::new(g, 0.2, 1e-2, 0.05).unwrap();
    let b = NoiseBasis::random(g, 1, 2, 0.5, 2).unwrap();
    let mut solver = LaeSolver::new(p, &b, FlowState::new(taylor_green(g), Tensor2Field::zeros(g)).unwrap()).unwrap();
    assert_eq!(solver.n_steps(), 5);
    solver.step().unwrap();
    let d = solver.diagnostics().unwrap();
    assert!(d.div_norm < 1e-10);
    assert!(d.linsolve_iters > 0);
    assert!(d.action >= d.kinetic);
    assert!(d.pressure.mean().abs() < 1e-14);
}

#[test]
fn commutation_cases() {
    let g = GridSpec::periodic(32).unwrap();
    let tg = taylor_green(g);
    let q0 = VectorField::from_fn(g, |x, y| [(2.0 * y).sin(), (x - y).cos()]);
    let q1 = VectorField::from_fn(g, |x, y| [x.cos() * y.sin(), 0.5 * (2.0 * x).sin()]);
    let q = |t: f64| q0.plus_scaled(t, &q1);

    // Frozen correlation: F = ū⊗ū is transported by the steady ū, G = 0.
    let fu = Tensor2Field::outer(&tg, &tg).unwrap();
    let r = verify_commutation(|_| tg.clone(), |_| fu.clone(), |_| Tensor2Field::zeros(g), &q, 0.3, 1e-2).unwrap();
    assert!(r.max_residual() <= 1e-8, "{r:?}");

    // ū = 0, F linear in t with constant G.
    let b = NoiseBasis::random(g, 2, 3, 1.0, 6).unwrap();
    let gg = forcing(&b).unwrap();
    let f0 = Tensor2Field::identity(g, 0.3);
    let zero = VectorField::zeros(g);
    let r = verify_commutation(|_| zero.clone(), |t| f0.plus_scaled(t, &gg), |_| gg.clone(), &q, 0.2, 1e-2).unwrap();
    assert!(r.max_residual() <= 1e-10, "{r:?}");

    // Generic: G := ∂_t F + L_ū F for a smooth prescribed F(t).
    let mut rng = seeded(17);
    let u = dealias(&random_div_free(&mut rng, g, 2, 1.0));
    let fa = random_psd_tensor(&mut rng, g, 2, 1, 0.5, 0.2);
    let fb = random_psd_tensor(&mut rng, g, 2, 1, 0.5, 0.0);
    let ff = |t: f64| fa.plus_scaled(t.sin(), &fb);
    let gfun = |t: f64| fb.scaled(t.cos()) + lie_deriv_tensor2(&u, &ff(t)).unwrap();
    let qg = |t: f64| q0.scaled(t.cos()) + q1.scaled((2.0 * t).sin());
    let r = verify_commutation(|_| u.clone(), ff, gfun, qg, 0.4, 0.1).unwrap();
    assert!(r.observed_order >= 1.9, "{r:?}");
    assert!(c_operator(&q0, &fa).unwrap().is_finite());
}
