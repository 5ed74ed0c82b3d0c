use dualkit_core::gpt::{load_system, make_classical, make_square_bit, to_json};
use dualkit_core::monotones::{
    schur_convexity_check, BuiltinMonotone, ConvexScalarFn, MeasurementSet,
    MonotoneContext, MonotoneError,
};
use dualkit_core::sampling;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn classical_square_purity_is_sum_of_squares(seed in any::<u64>(), n in 2usize..=5) {
        let sys = make_classical(n).unwrap();
        let ctx = MonotoneContext::new(&sys).unwrap();
        let mut rng = sampling::rng(seed, 0);
        let p = sampling::random_probability(&mut rng, n);
        let v = ctx
            .evaluate(&BuiltinMonotone::FPurity(ConvexScalarFn::Square), &sys.state_from_slice(&p).unwrap())
            .unwrap()
            .value;
        prop_assert!((v - p.iter().map(|x| x * x).sum::<f64>()).abs() <= 1e-9);
    }

    #[test]
    fn custom_convex_function_is_monotone(seed in any::<u64>()) {
        let sys = make_square_bit();
        let ctx = MonotoneContext::new(&sys).unwrap();
        let f = ConvexScalarFn::custom("x^4", true, |x| x.powi(4));
        let m = BuiltinMonotone::FPurity(f);
        let rep = schur_convexity_check(|r| Ok(ctx.evaluate(&m, r)?.value), &sys, 50, seed).unwrap();
        prop_assert!(rep.violations.is_empty());
    }
}

#[test]
fn concave_function_can_violate_monotonicity() {
    let sys = make_classical(3).unwrap();
    let ctx = MonotoneContext::new(&sys).unwrap();
    let f = ConvexScalarFn::custom("-x^2", false, |x| -x * x);
    assert!(!f.check_convexity(200, 1));
    let m = BuiltinMonotone::FPurity(f);
    let rep = schur_convexity_check(|r| Ok(ctx.evaluate(&m, r)?.value), &sys, 200, 3).unwrap();
    assert!(!rep.violations.is_empty());
}

#[test]
fn two_norm_and_square_purity_order_square_bit_states_differently() {
    let sq = make_square_bit();
    let ctx = MonotoneContext::new(&sq).unwrap();
    let eval = |m: &BuiltinMonotone, v: [f64; 3]| ctx.evaluate(m, &sq.state_from_slice(&v).unwrap()).unwrap().value;
    let two = BuiltinMonotone::TwoNorm;
    let sqr = BuiltinMonotone::FPurity(ConvexScalarFn::Square);
    let (a, b) = ([0.5, 0.5, 1.0], [0.6, 0.0, 1.0]);
    // 2-norm purity is 1 + x² + y²; x²-purity is (1 + max(x², y²)) / 2
    assert!((eval(&two, a) - 1.5).abs() < 1e-9 && (eval(&two, b) - 1.36).abs() < 1e-9);
    assert!((eval(&sqr, a) - 0.625).abs() < 1e-9 && (eval(&sqr, b) - 0.68).abs() < 1e-9);
    assert!(eval(&two, a) > eval(&two, b) && eval(&sqr, a) < eval(&sqr, b));
}

#[test]
fn truncated_enumeration_reports_a_bound() {
    let sq = make_square_bit();
    let partial = MeasurementSet::enumerate_bounded(&sq, 200).unwrap();
    assert!(partial.truncated);
    let full = MeasurementSet::enumerate(&sq).unwrap();
    assert!(!full.truncated && full.measurements.len() >= partial.measurements.len());
    let center = sq.state_from_slice(&[0.0, 0.0, 1.0]).unwrap();
    match dualkit_core::monotones::f_purity(&center, &ConvexScalarFn::Square, &partial) {
        Err(MonotoneError::Partial { best, lower_bound }) => {
            assert!(lower_bound);
            let exact = dualkit_core::monotones::f_purity(&center, &ConvexScalarFn::Square, &full).unwrap();
            assert!(best.value <= exact.value + 1e-12);
        }
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn systems_round_trip_through_json() {
    for sys in [make_classical(3).unwrap(), make_square_bit()] {
        let back = load_system(&to_json(&sys)).unwrap();
        assert_eq!(back.dim, sys.dim);
        assert_eq!(back.group.len(), sys.group.len());
        assert_eq!(back.pure_states, sys.pure_states);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// No sampled rank-1 measurement beats the eigenbasis.
    #[test]
    fn eigenbasis_minimizes_entropy_over_sampled_rank_one_povms(seed in any::<u64>(), d in 2usize..=4, extra in 0usize..=3) {
        let mut rng = sampling::rng(seed, 0);
        let rho = sampling::random_density(&mut rng, d, d);
        let best = dualkit_core::monotones::measurement_entropy_quantum(&rho).unwrap().value;
        let m = d + extra;
        let u = sampling::random_unitary(&mut rng, m);
        let v = u.columns(0, d).into_owned();
        let out = &v * rho.matrix() * v.adjoint();
        let p: Vec<f64> = (0..m).map(|i| out[(i, i)].re.max(0.0)).collect();
        prop_assert!(dualkit_core::quantum::shannon_bits(&p) >= best - 1e-9);
    }
}
