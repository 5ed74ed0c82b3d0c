use dualkit_core::harness::{self, duality_input, replay, Tolerances};
use dualkit_core::{Counterexample, PureBipartiteState, TrialConfig};

#[test]
fn replay_accepts_valid_duality_input() {
    let psi = PureBipartiteState::maximally_entangled(3);
    let target = PureBipartiteState::from_schmidt(&[0.7, 0.2, 0.1]).unwrap();
    let cx = Counterexample {
        dim: 3,
        trial: 0,
        reason: String::new(),
        input: duality_input(&psi, &target),
    };
    assert_eq!(replay("duality", &cx, &Tolerances::default()).unwrap(), None);
    assert!(replay("nonexistent", &cx, &Tolerances::default()).is_err());
}

#[test]
fn reports_serialize_and_compare() {
    let cfg = TrialConfig::new(5, vec![2], 20);
    let rep = harness::run_suite("max-ent", &cfg).unwrap();
    let back: dualkit_core::SuiteReport = serde_json::from_str(&rep.to_json()).unwrap();
    assert_eq!(back, rep);
    assert_eq!(rep.csv_header().split(',').count(), rep.csv_row().split(',').count());
    assert!(!rep.deterministic_json().contains("wall_time"));
}

#[test]
fn different_seeds_sample_different_states() {
    let a = harness::run_suite("duality", &TrialConfig::new(1, vec![3], 30)).unwrap();
    let b = harness::run_suite("duality", &TrialConfig::new(2, vec![3], 30)).unwrap();
    assert!(a.passed() && b.passed());
    assert_ne!(a.deterministic_json(), b.deterministic_json());
}

#[test]
fn invalid_configs_rejected() {
    assert!(harness::run_suite("duality", &TrialConfig::new(1, vec![9], 5)).is_err());
    assert!(harness::run_suite("duality", &TrialConfig::new(1, vec![], 5)).is_err());
}
