use lae_core::presets::seeded;
use lae_core::wick::*;
use proptest::prelude::*;

fn pair(seed: u64) -> (ChaosExpansion, ChaosExpansion, ChaosExpansion) {
    let mut rng = seeded(seed);
    let s = ChaosExpansion::random(&mut rng, 4, 4, 6);
    let t = ChaosExpansion::random(&mut rng, 3, 3, 5);
    let u = ChaosExpansion::random(&mut rng, 4, 3, 4);
    (s, t, u)
}

fn close(a: &ChaosExpansion, b: &ChaosExpansion, tol: f64) -> bool {
    a.coeffs.keys().chain(b.coeffs.keys()).all(|k| (a.coeff(k) - b.coeff(k)).abs() <= tol)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn product_is_commutative_and_associative(seed in any::<u64>()) {
        let (s, t, u) = pair(seed);
        prop_assert!(close(&wick_product(&s, &t).unwrap(), &wick_product(&t, &s).unwrap(), 1e-14));
        let l = wick_product(&wick_product(&s, &t).unwrap(), &u).unwrap();
        let r = wick_product(&s, &wick_product(&t, &u).unwrap()).unwrap();
        prop_assert!(close(&l, &r, 1e-12));
    }

    #[test]
    fn expectation_factorises(seed in any::<u64>()) {
        let (s, t, _) = pair(seed);
        let st = wick_product(&s, &t).unwrap();
        prop_assert!((expectation(&st) - expectation(&s) * expectation(&t)).abs() <= 1e-12);
    }

    #[test]
    fn deterministic_factor_is_ordinary_scaling(seed in any::<u64>(), c in -3.0f64..3.0) {
        let (s, _, _) = pair(seed);
        let p = wick_product(&ChaosExpansion::constant(1, c), &s).unwrap();
        prop_assert!(close(&p, &s.scaled(c), 0.0));
        let mut omega = [0.3, -1.2, 0.8, 2.0];
        omega.rotate_left((seed % 4) as usize);
        prop_assert!((sample(&p, &omega).unwrap() - c * sample(&s, &omega).unwrap()).abs() < 1e-10);
    }
}

#[test]
fn white_noise_square_renormalisation() {
    let w = ChaosExpansion::hermite(1, MultiIndex::single(0, 1), 1.0).unwrap();
    let ww = wick_product(&w, &w).unwrap();
    assert_eq!(expectation(&ww), 0.0);
    assert_eq!(ww.coeff(&MultiIndex::single(0, 2)), 1.0);
    let (m, se) = mc_mean(|x| x[0] * x[0] - sample(&ww, x).unwrap(), 1, 20_000, 4).unwrap();
    assert!((m - 1.0).abs() <= 4.0 * se.max(1e-15), "{m} {se}");
}

#[test]
fn sampling_brackets_symbolic_expectation() {
    let mut rng = seeded(17);
    for k in 0..10u64 {
        let s = ChaosExpansion::random(&mut rng, 3, 3, 5);
        let t = ChaosExpansion::random(&mut rng, 3, 3, 5);
        let st = wick_product(&s, &t).unwrap();
        let (m, se) = mc_expectation(&st, 20_000, k).unwrap();
        assert!((m - expectation(&st)).abs() <= 4.0 * se + 1e-12, "{k}: {m} {se}");
    }
}

#[test]
fn order_overflow_is_reported() {
    let mut a = ChaosExpansion::hermite(1, MultiIndex::single(0, 10), 1.0).unwrap();
    a.max_order = 12;
    assert!(matches!(wick_product(&a, &a), Err(WickError::OrderOverflow { .. })));
}
