use dualkit_core::gpt::{make_classical, make_square_bit};
use dualkit_core::mixedness::{
    birkhoff_rare_synthesis, equally_mixed, majorizes, more_mixed, orbit_hull, sorted_desc,
};
use dualkit_core::monotones::random_gpt_state;
use dualkit_core::sampling;
use dualkit_core::GptState;
use nalgebra::DVector;
use proptest::prelude::*;

fn prob(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..1.0, n).prop_filter_map("zero vector", |v| {
        let s: f64 = v.iter().sum();
        (s > 1e-3).then(|| v.iter().map(|x| x / s).collect())
    })
}

fn pair() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (2usize..=5).prop_flat_map(|n| (prob(n), prob(n)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn majorization_agrees_with_orbit_lp((p, q) in pair()) {
        let sys = make_classical(p.len()).unwrap();
        let rho = sys.state_from_slice(&p).unwrap();
        let sigma = sys.state_from_slice(&q).unwrap();
        let lp = more_mixed(&rho, &sigma).unwrap().is_feasible();
        let mj = majorizes(&p, &q).unwrap();
        // decisions only disagree on near-ties
        if lp != mj {
            let (a, b) = (sorted_desc(&p), sorted_desc(&q));
            let gap = (1..=a.len())
                .map(|k| a[..k].iter().sum::<f64>() - b[..k].iter().sum::<f64>())
                .fold(f64::INFINITY, f64::min);
            prop_assert!(gap.abs() < 1e-7, "disagreement with gap {gap}");
        }
    }

    #[test]
    fn birkhoff_channel_reproduces_target((p, _q) in pair(), mix in 0.0f64..1.0) {
        let n = p.len();
        // a target that is always majorized: mix towards uniform then permute
        let mut q: Vec<f64> = p.iter().map(|x| mix * x + (1.0 - mix) / n as f64).collect();
        q.rotate_left(1);
        let (channel, terms) = birkhoff_rare_synthesis(&p, &q).unwrap();
        prop_assert!(terms.len() <= (n - 1) * (n - 1) + 1);
        let sys = make_classical(n).unwrap();
        let out = channel.apply(&sys.state_from_slice(&p).unwrap());
        let err = (out.vec - DVector::from_vec(q)).amax();
        prop_assert!(err <= 1e-9, "residual {err}");
    }

    #[test]
    fn feasible_weights_reconstruct((p, q) in pair()) {
        let sys = make_classical(p.len()).unwrap();
        let rho = sys.state_from_slice(&p).unwrap();
        let sigma = sys.state_from_slice(&q).unwrap();
        let cert = more_mixed(&rho, &sigma).unwrap();
        if let Some(w) = &cert.weights {
            prop_assert!(w.iter().all(|x| *x >= -1e-12));
            prop_assert!((w.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
            let mut acc = DVector::zeros(p.len());
            for (wi, g) in w.iter().zip(&sys.group) {
                acc += g * &rho.vec * *wi;
            }
            prop_assert!((acc - &sigma.vec).amax() <= 1e-8);
        }
    }

    #[test]
    fn permuted_states_are_equally_mixed(p in (2usize..=5).prop_flat_map(prob), shift in 0usize..5) {
        let sys = make_classical(p.len()).unwrap();
        let mut q = p.clone();
        q.rotate_left(shift % p.len());
        let r = equally_mixed(&sys.state_from_slice(&p).unwrap(), &sys.state_from_slice(&q).unwrap()).unwrap();
        prop_assert!(r.equally_mixed);
        let g = r.witness.expect("a permutation maps p to q");
        let image = &sys.group[g] * DVector::from_vec(p);
        prop_assert!((image - DVector::from_vec(q)).amax() <= 1e-9);
    }
}

#[test]
fn more_mixed_is_reflexive_and_transitive_on_square_bit() {
    let sq = make_square_bit();
    let mut rng = sampling::rng(11, 0);
    let states: Vec<_> = (0..12)
        .map(|_| GptState::new(&sq, random_gpt_state(&mut rng, &sq)).unwrap())
        .collect();
    let rel = |a: &GptState, b: &GptState| more_mixed(a, b).unwrap().is_feasible();
    for a in &states {
        assert!(rel(a, a));
        for b in &states {
            for c in &states {
                if rel(a, b) && rel(b, c) {
                    assert!(rel(a, c));
                }
            }
        }
    }
}

#[test]
fn orbit_hull_of_center_is_a_point() {
    let sq = make_square_bit();
    let hull = orbit_hull(&sq.state_from_slice(&[0.0, 0.0, 1.0]).unwrap()).unwrap();
    assert_eq!(hull.len(), 1);
}

#[test]
fn vertices_are_least_mixed() {
    let sq = make_square_bit();
    let vertex = GptState::new(&sq, sq.pure_states[0].clone()).unwrap();
    let inner = sq.state_from_slice(&[0.3, -0.1, 1.0]).unwrap();
    assert!(more_mixed(&vertex, &inner).unwrap().is_feasible());
    assert!(!more_mixed(&inner, &vertex).unwrap().is_feasible());
}
