//! Seeded cross-validation suites with machine-readable reports.
//!
//! Each trial draws its inputs from its own ChaCha stream, so trials run in
//! parallel and the report only depends on the configuration. Inputs of
//! failing trials are stored in full and can be replayed with [`replay`].

use std::collections::BTreeMap;
use std::time::Instant;

use nalgebra::DVector;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::gpt::{make_classical, MAX_CLASSICAL};
use crate::mixedness::{birkhoff_rare_synthesis, majorizes_unchecked, more_mixed, PROB_TOL};
use crate::monotones::random_rare;
use crate::quantum::{
    c, catalytic_erasure_possible, lu_equivalent, marginals, nielsen_convertible,
    one_way_locc_from_rare, rare_synthesis_quantum, CMatrix, DensityMatrix, PureBipartiteState,
    QuantumError,
};
use crate::sampling;

/// Suites stop after this many counterexamples.
pub const COUNTEREXAMPLE_BUDGET: usize = 10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("unknown suite `{0}`")]
    UnknownSuite(String),
    #[error("counterexample input does not match the suite: {0}")]
    BadReplay(String),
}

pub type Result<T> = std::result::Result<T, HarnessError>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Reconstruction residual of synthesized RaRe decompositions.
    pub witness: f64,
    /// Protocol invariants of one-way LOCC constructions.
    pub protocol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            witness: 1e-9,
            protocol: 1e-8,
        }
    }
}

/// Trials are run for every entry of `dims`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialConfig {
    pub seed: u64,
    pub dims: Vec<usize>,
    pub trials: usize,
    pub tolerances: Tolerances,
}

impl TrialConfig {
    pub fn new(seed: u64, dims: Vec<usize>, trials: usize) -> Self {
        Self {
            seed,
            dims,
            trials,
            tolerances: Tolerances::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(HarnessError::InvalidConfig("trial count must be at least 1".into()));
        }
        if self.dims.is_empty() || self.dims.contains(&0) {
            return Err(HarnessError::InvalidConfig("dimensions must be positive".into()));
        }
        let t = self.tolerances;
        if !(t.witness > 0.0 && t.protocol > 0.0) {
            return Err(HarnessError::InvalidConfig("tolerances must be positive".into()));
        }
        Ok(())
    }

    fn check_dims(&self, lo: usize, hi: usize) -> Result<()> {
        match self.dims.iter().find(|d| **d < lo || **d > hi) {
            Some(d) => Err(HarnessError::InvalidConfig(format!(
                "dimension {d} outside the supported range {lo}..={hi}"
            ))),
            None => Ok(()),
        }
    }
}

/// A failing trial with everything needed to replay it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Counterexample {
    pub dim: usize,
    pub trial: usize,
    pub reason: String,
    pub input: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub config: TrialConfig,
    pub trials: usize,
    pub agreements: usize,
    pub counterexamples: Vec<Counterexample>,
    /// Set when the counterexample budget stopped the suite early.
    pub stopped_early: bool,
    /// Summary statistics, e.g. largest residuals.
    pub stats: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_secs: Option<f64>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.counterexamples.is_empty()
    }

    /// JSON without the wall time, identical across runs with equal config.
    pub fn deterministic_json(&self) -> String {
        let mut copy = self.clone();
        copy.wall_time_secs = None;
        serde_json::to_string_pretty(&copy).expect("report serializes")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn csv_header(&self) -> String {
        let mut cols = vec!["suite", "trials", "agreements", "counterexamples"];
        cols.extend(self.stats.keys().map(String::as_str));
        cols.join(",")
    }

    pub fn csv_row(&self) -> String {
        let mut cells = vec![
            self.suite.clone(),
            self.trials.to_string(),
            self.agreements.to_string(),
            self.counterexamples.len().to_string(),
        ];
        cells.extend(self.stats.iter().map(|(k, v)| {
            if k.starts_with("count_") {
                format!("{v}")
            } else {
                format!("{v:.6e}")
            }
        }));
        cells.join(",")
    }
}

/// Outcome of one trial.
struct Trial {
    failure: Option<String>,
    input: Value,
    stats: Vec<(&'static str, f64)>,
}

fn merge_stat(stats: &mut BTreeMap<String, f64>, key: &str, value: f64) {
    let slot = stats.entry(key.to_string()).or_insert(0.0);
    if key.starts_with("count_") {
        *slot += value;
    } else {
        *slot = slot.max(value);
    }
}

/// Run `trial(dim, index)` for every dimension and index, in parallel, and
/// fold the outcomes in order until the counterexample budget is spent.
fn run<F>(suite: &str, cfg: &TrialConfig, trial: F) -> SuiteReport
where
    F: Fn(usize, usize) -> Trial + Sync,
{
    let start = Instant::now();
    let jobs: Vec<(usize, usize)> = cfg
        .dims
        .iter()
        .flat_map(|&d| (0..cfg.trials).map(move |i| (d, i)))
        .collect();
    let outcomes: Vec<Trial> = jobs.par_iter().map(|&(d, i)| trial(d, i)).collect();
    let mut report = SuiteReport {
        suite: suite.into(),
        config: cfg.clone(),
        trials: 0,
        agreements: 0,
        counterexamples: Vec::new(),
        stopped_early: false,
        stats: BTreeMap::new(),
        wall_time_secs: None,
    };
    for ((d, i), t) in jobs.into_iter().zip(outcomes) {
        report.trials += 1;
        for (k, v) in t.stats {
            merge_stat(&mut report.stats, k, v);
        }
        match t.failure {
            None => report.agreements += 1,
            Some(reason) => {
                report.counterexamples.push(Counterexample {
                    dim: d,
                    trial: i,
                    reason,
                    input: t.input,
                });
                if report.counterexamples.len() >= COUNTEREXAMPLE_BUDGET {
                    report.stopped_early = true;
                    break;
                }
            }
        }
    }
    report.wall_time_secs = Some(start.elapsed().as_secs_f64());
    report
}

/// Per-trial stream: dimension in the high bits, trial index in the low bits.
fn trial_rng(seed: u64, dim: usize, trial: usize) -> rand_chacha::ChaCha8Rng {
    sampling::rng(seed, ((dim as u64) << 32) | trial as u64)
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("input serializes")
}

// --- duality -------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct DualityInput {
    psi: PureBipartiteState,
    target: PureBipartiteState,
}

fn spectral_majorization(rho: &DensityMatrix, rho_p: &DensityMatrix) -> bool {
    let clip = |v: Vec<f64>| v.into_iter().map(|x| if x > 1e-12 { x } else { 0.0 }).collect::<Vec<_>>();
    majorizes_unchecked(&clip(rho_p.spectrum()), &clip(rho.spectrum()), 1e-10)
}

/// Both sides of the duality for one ordered pair, plus witnesses when the
/// conversion is possible. Returns the failure reason, if any.
fn duality_direction(
    psi: &PureBipartiteState,
    target: &PureBipartiteState,
    tol: &Tolerances,
    stats: &mut Vec<(&'static str, f64)>,
) -> std::result::Result<bool, String> {
    let entangled_side = nielsen_convertible(psi, target);
    let (rho, _) = marginals(psi).map_err(|e| e.to_string())?;
    let (rho_p, _) = marginals(target).map_err(|e| e.to_string())?;
    let mixed_side = spectral_majorization(&rho, &rho_p);
    if entangled_side != mixed_side {
        return Err(format!(
            "convertibility {entangled_side} but marginal majorization {mixed_side}"
        ));
    }
    if !entangled_side {
        return Ok(false);
    }
    let rare = rare_synthesis_quantum(&rho, &rho_p).map_err(|e| format!("RaRe synthesis failed: {e}"))?;
    let res = rare.residual(&rho_p, &rho);
    stats.push(("max_rare_residual", res));
    if res > tol.witness {
        return Err(format!("RaRe residual {res:.3e} exceeds {:.1e}", tol.witness));
    }
    let proto = one_way_locc_from_rare(psi, target, &rare).map_err(|e| format!("protocol construction failed: {e}"))?;
    let check = proto.check(psi, target).map_err(|e| e.to_string())?;
    stats.push(("max_protocol_residual", check.max()));
    if check.max() > tol.protocol {
        return Err(format!("protocol residual {:.3e} exceeds {:.1e}", check.max(), tol.protocol));
    }
    Ok(true)
}

fn duality_check(input: &DualityInput, tol: &Tolerances) -> (Option<String>, Vec<(&'static str, f64)>) {
    let mut stats = Vec::new();
    let forward = duality_direction(&input.psi, &input.target, tol, &mut stats);
    let backward = duality_direction(&input.target, &input.psi, tol, &mut stats);
    let outcome = match (forward, backward) {
        (Err(e), _) => Some(format!("forward: {e}")),
        (_, Err(e)) => Some(format!("backward: {e}")),
        (Ok(f), Ok(b)) => {
            stats.push(("count_convertible", (f as u8 + b as u8) as f64));
            // two-way convertibility must coincide with local-unitary equivalence
            match lu_equivalent(&input.psi, &input.target) {
                Ok(lu) if lu == (f && b) => None,
                Ok(lu) => Some(format!("two-way convertible {} but LU-equivalent {lu}", f && b)),
                Err(e) => Some(e.to_string()),
            }
        }
    };
    (outcome, stats)
}

/// Nielsen convertibility against marginal majorization on random pure
/// states of `d ⊗ d`, with explicit witnesses for convertible pairs.
pub fn run_duality_suite(cfg: &TrialConfig) -> Result<SuiteReport> {
    cfg.validate()?;
    cfg.check_dims(1, MAX_CLASSICAL)?;
    Ok(run("duality", cfg, |d, i| {
        let mut rng = trial_rng(cfg.seed, d, i);
        let psi = sampling::random_pure_bipartite(&mut rng, d, d);
        let target = sampling::random_pure_bipartite(&mut rng, d, d);
        let input = DualityInput { psi, target };
        let (failure, stats) = duality_check(&input, &cfg.tolerances);
        Trial {
            failure,
            input: to_value(&input),
            stats,
        }
    }))
}

// --- classical agreement -------------------------------------------------

#[derive(Serialize, Deserialize)]
struct ClassicalInput {
    p: Vec<f64>,
    q: Vec<f64>,
}

fn classical_check(input: &ClassicalInput, tol: &Tolerances) -> (Option<String>, Vec<(&'static str, f64)>) {
    let n = input.p.len();
    let mut stats = Vec::new();
    let sys = match make_classical(n) {
        Ok(s) => s,
        Err(e) => return (Some(e.to_string()), stats),
    };
    let run_dir = |a: &[f64], b: &[f64], stats: &mut Vec<(&'static str, f64)>| -> std::result::Result<(), String> {
        let ra = sys.state_from_slice(a).map_err(|e| e.to_string())?;
        let rb = sys.state_from_slice(b).map_err(|e| e.to_string())?;
        let lp = more_mixed(&ra, &rb).map_err(|e| e.to_string())?.is_feasible();
        let maj = majorizes_unchecked(a, b, PROB_TOL);
        if lp != maj {
            return Err(format!("LP feasibility {lp} but majorization {maj}"));
        }
        if maj {
            stats.push(("count_comparable", 1.0));
            let (rare, _) = birkhoff_rare_synthesis(a, b).map_err(|e| e.to_string())?;
            let out = rare.apply(&ra);
            let res = (out.vec - DVector::from_column_slice(b)).amax();
            stats.push(("max_birkhoff_residual", res));
            if res > tol.witness {
                return Err(format!("Birkhoff residual {res:.3e} exceeds {:.1e}", tol.witness));
            }
        }
        Ok(())
    };
    let outcome = run_dir(&input.p, &input.q, &mut stats)
        .and_then(|_| run_dir(&input.q, &input.p, &mut stats))
        .err();
    (outcome, stats)
}

/// LP group-majorization against partial-sum majorization on classical
/// systems. Half the pairs are RaRe images, so both outcomes are exercised.
pub fn run_classical_agreement_suite(cfg: &TrialConfig) -> Result<SuiteReport> {
    cfg.validate()?;
    cfg.check_dims(1, MAX_CLASSICAL)?;
    let systems: BTreeMap<usize, _> = cfg
        .dims
        .iter()
        .map(|&n| (n, make_classical(n).expect("checked range")))
        .collect();
    Ok(run("classical-agreement", cfg, |n, i| {
        let mut rng = trial_rng(cfg.seed, n, i);
        let p = sampling::random_probability(&mut rng, n);
        let q = if i % 2 == 0 {
            let sys = &systems[&n];
            let mut q = vec![0.0; n];
            for (w, g) in random_rare(&mut rng, sys) {
                let moved = &sys.group[g] * DVector::from_column_slice(&p);
                for (qi, mi) in q.iter_mut().zip(moved.iter()) {
                    *qi += w * mi;
                }
            }
            q
        } else {
            sampling::random_probability(&mut rng, n)
        };
        let input = ClassicalInput { p, q };
        let (failure, stats) = classical_check(&input, &cfg.tolerances);
        Trial {
            failure,
            input: to_value(&input),
            stats,
        }
    }))
}

// --- maximal entanglement ------------------------------------------------

#[derive(Serialize, Deserialize)]
struct MaxEntInput {
    psi: PureBipartiteState,
}

fn max_ent_check(input: &MaxEntInput) -> (Option<String>, Vec<(&'static str, f64)>) {
    let (d, _) = input.psi.dims();
    let phi = PureBipartiteState::maximally_entangled(d);
    let mut stats = Vec::new();
    if !nielsen_convertible(&phi, &input.psi) {
        return (Some("maximally entangled state does not reach the sample".into()), stats);
    }
    let to_phi = nielsen_convertible(&input.psi, &phi);
    let lu = match lu_equivalent(&input.psi, &phi) {
        Ok(lu) => lu,
        Err(e) => return (Some(e.to_string()), stats),
    };
    stats.push(("count_lu_equivalent", lu as u8 as f64));
    let outcome = (to_phi != lu).then(|| format!("converts to the maximally entangled state {to_phi} but LU-equivalent {lu}"));
    (outcome, stats)
}

/// Only states locally equivalent to the maximally entangled state convert
/// to it. Every fifth sample is a local-unitary image of it.
pub fn run_maximal_entanglement_suite(cfg: &TrialConfig) -> Result<SuiteReport> {
    cfg.validate()?;
    cfg.check_dims(2, 8)?;
    Ok(run("max-ent", cfg, |d, i| {
        let mut rng = trial_rng(cfg.seed, d, i);
        let psi = if i % 5 == 0 {
            let u = sampling::random_unitary(&mut rng, d);
            let v = sampling::random_unitary(&mut rng, d);
            let m = &u * PureBipartiteState::maximally_entangled(d).coefficient_matrix() * v.transpose();
            // renormalize away rounding so the unit-norm check cannot trip
            let n = m.norm();
            PureBipartiteState::from_coefficient_matrix(&(m / c(n, 0.0))).expect("unitary image is normalized")
        } else {
            sampling::random_pure_bipartite(&mut rng, d, d)
        };
        let input = MaxEntInput { psi };
        let (failure, stats) = max_ent_check(&input);
        Trial {
            failure,
            input: to_value(&input),
            stats,
        }
    }))
}

// --- catalyst ------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct CatalystInput {
    rho: DensityMatrix,
    catalyst: DensityMatrix,
    /// A random state used to probe 2-norm monotonicity.
    probe: DensityMatrix,
    /// Seed of the random RaRe channels tried on `ρ ⊗ γ`.
    sample_seed: u64,
}

fn pure_zero(d: usize) -> DensityMatrix {
    let mut p = vec![0.0; d];
    p[0] = 1.0;
    DensityMatrix::from_diagonal(&p).expect("basis state")
}

fn catalyst_check(input: &CatalystInput) -> (Option<String>, Vec<(&'static str, f64)>) {
    let mut stats = Vec::new();
    let fail = |s: String, stats: Vec<(&'static str, f64)>| (Some(s), stats);
    let cert = match catalytic_erasure_possible(&input.rho) {
        Ok(c) => c,
        Err(e) => return fail(e.to_string(), stats),
    };
    let d = input.rho.dim();
    let joint = input.rho.kron(&input.catalyst);
    let erased = pure_zero(d).kron(&input.catalyst);
    let gap = erased.purity() - joint.purity();
    let product_err = (joint.purity() - input.rho.purity() * input.catalyst.purity()).abs();
    stats.push(("max_product_rule_error", product_err));
    if product_err > 1e-12 {
        return fail(format!("Tr((ρ⊗γ)²) differs from Tr(ρ²)Tr(γ²) by {product_err:.3e}"), stats);
    }
    if cert.erasable {
        stats.push(("count_pure", 1.0));
        if cert.margin != 0.0 || gap.abs() > 1e-9 {
            return fail(format!("pure input with margin {} and gap {gap:.3e}", cert.margin), stats);
        }
        return (None, stats);
    }
    if cert.margin <= 0.0 {
        return fail(format!("mixed input with margin {}", cert.margin), stats);
    }
    if (gap - cert.margin * input.catalyst.purity()).abs() > 1e-9 {
        return fail(format!("2-norm gap {gap} does not equal margin times Tr(γ²)"), stats);
    }
    // no RaRe channel reaches the erased state: exact synthesis must refuse
    match rare_synthesis_quantum(&erased, &joint) {
        Err(QuantumError::Mixedness(_)) => {}
        Ok(_) => return fail("RaRe synthesis claims to erase a mixed state".into(), stats),
        Err(e) => return fail(format!("unexpected error: {e}"), stats),
    }
    // sampled RaRe channels never increase the 2-norm
    let dj = joint.dim();
    let mut rng = sampling::rng(input.sample_seed, 0);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..4 {
        let k = rng.random_range(1..=3);
        let w = sampling::random_probability(&mut rng, k);
        let mut out = CMatrix::zeros(dj, dj);
        for wi in w {
            let u = sampling::random_unitary(&mut rng, dj);
            out += (&u * joint.matrix() * u.adjoint()) * c(wi, 0.0);
        }
        let p: f64 = out.iter().map(|z| z.norm_sqr()).sum();
        worst = worst.max(p - joint.purity());
    }
    stats.push(("max_sampled_purity_increase", worst));
    if worst > 1e-9 {
        return fail(format!("sampled RaRe channel increased Tr(·²) by {worst:.3e}"), stats);
    }
    // synthesized RaRe channels never increase the 2-norm of any state
    let mixed = DensityMatrix::new(
        (input.rho.matrix() + CMatrix::identity(d, d) * c(1.0 / d as f64, 0.0)) * c(0.5, 0.0),
    );
    let mixed = match mixed {
        Ok(m) => m,
        Err(e) => return fail(e.to_string(), stats),
    };
    match rare_synthesis_quantum(&mixed, &input.rho) {
        Ok(rare) => {
            let res = rare.residual(&input.rho, &mixed);
            let out = rare.apply(input.probe.matrix());
            let inc = out.iter().map(|z| z.norm_sqr()).sum::<f64>() - input.probe.purity();
            stats.push(("max_rare_residual", res));
            stats.push(("max_synthesized_purity_increase", inc));
            if inc > 1e-9 || res > 1e-9 {
                return fail(format!("synthesized channel: residual {res:.3e}, purity increase {inc:.3e}"), stats);
            }
        }
        Err(e) => return fail(format!("RaRe synthesis toward a more mixed state failed: {e}"), stats),
    }
    (None, stats)
}

/// No RaRe channel erases a mixed state with the help of a catalyst, as
/// certified by the 2-norm. Every fourth sample is a pure state.
pub fn run_catalyst_suite(cfg: &TrialConfig) -> Result<SuiteReport> {
    cfg.validate()?;
    cfg.check_dims(2, 4)?;
    Ok(run("catalyst", cfg, |d, i| {
        let mut rng = trial_rng(cfg.seed, d, i);
        let rho = if i % 4 == 3 {
            let psi = sampling::random_pure_bipartite(&mut rng, d, 1);
            DensityMatrix::pure(psi.amplitudes()).expect("unit vector")
        } else {
            sampling::random_density(&mut rng, d, d)
        };
        let dc = rng.random_range(2..=4);
        let catalyst = sampling::random_density(&mut rng, dc, dc);
        let probe = sampling::random_density(&mut rng, d, d);
        let input = CatalystInput {
            rho,
            catalyst,
            probe,
            sample_seed: rng.random(),
        };
        let (failure, stats) = catalyst_check(&input);
        Trial {
            failure,
            input: to_value(&input),
            stats,
        }
    }))
}

pub const SUITES: [&str; 4] = ["duality", "classical-agreement", "max-ent", "catalyst"];

pub fn run_suite(name: &str, cfg: &TrialConfig) -> Result<SuiteReport> {
    match name {
        "duality" => run_duality_suite(cfg),
        "classical-agreement" => run_classical_agreement_suite(cfg),
        "max-ent" => run_maximal_entanglement_suite(cfg),
        "catalyst" => run_catalyst_suite(cfg),
        other => Err(HarnessError::UnknownSuite(other.into())),
    }
}

/// Re-run the check of a stored counterexample. Returns the failure reason,
/// or `None` if the input now passes.
pub fn replay(suite: &str, cx: &Counterexample, tol: &Tolerances) -> Result<Option<String>> {
    let bad = |e: serde_json::Error| HarnessError::BadReplay(e.to_string());
    let value = cx.input.clone();
    Ok(match suite {
        "duality" => duality_check(&serde_json::from_value(value).map_err(bad)?, tol).0,
        "classical-agreement" => classical_check(&serde_json::from_value(value).map_err(bad)?, tol).0,
        "max-ent" => max_ent_check(&serde_json::from_value(value).map_err(bad)?).0,
        "catalyst" => catalyst_check(&serde_json::from_value(value).map_err(bad)?).0,
        other => return Err(HarnessError::UnknownSuite(other.into())),
    })
}

/// Input of a single trial in a form that [`replay`] accepts.
pub fn duality_input(psi: &PureBipartiteState, target: &PureBipartiteState) -> Value {
    json!({ "psi": psi, "target": target })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duality_small() {
        let cfg = TrialConfig::new(7, vec![2, 3], 40);
        let rep = run_duality_suite(&cfg).unwrap();
        assert!(rep.passed(), "{:?}", rep.counterexamples);
        assert_eq!(rep.trials, 80);
        assert_eq!(rep.agreements + rep.counterexamples.len(), rep.trials);
        // every two-qubit pair is comparable in one direction
        assert!(rep.stats["count_convertible"] >= 40.0);
    }

    #[test]
    fn degenerate_pair_is_convertible_both_ways() {
        let psi = sampling::random_pure_bipartite(&mut sampling::rng(1, 1), 3, 3);
        let input = DualityInput {
            psi: psi.clone(),
            target: psi,
        };
        let (ok, stats) = duality_check(&input, &Tolerances::default());
        assert!(ok.is_none(), "{ok:?}");
        assert!(stats.contains(&("count_convertible", 2.0)));
    }

    #[test]
    fn classical_small() {
        let cfg = TrialConfig::new(3, vec![2, 3, 4], 60);
        let rep = run_classical_agreement_suite(&cfg).unwrap();
        assert!(rep.passed(), "{:?}", rep.counterexamples);
        assert!(rep.stats["count_comparable"] > 30.0);
    }

    #[test]
    fn incomparable_pair() {
        let input = ClassicalInput {
            p: vec![0.5, 0.26, 0.24],
            q: vec![0.48, 0.48, 0.04],
        };
        let (ok, stats) = classical_check(&input, &Tolerances::default());
        assert!(ok.is_none());
        assert!(!stats.iter().any(|(k, _)| *k == "count_comparable"));
    }

    #[test]
    fn max_ent_and_catalyst_small() {
        let rep = run_maximal_entanglement_suite(&TrialConfig::new(5, vec![2, 3, 4], 20)).unwrap();
        assert!(rep.passed(), "{:?}", rep.counterexamples);
        assert!(rep.stats["count_lu_equivalent"] >= 12.0);
        let rep = run_catalyst_suite(&TrialConfig::new(5, vec![2, 3], 20)).unwrap();
        assert!(rep.passed(), "{:?}", rep.counterexamples);
    }

    #[test]
    fn reports_are_deterministic() {
        let cfg = TrialConfig::new(11, vec![3], 25);
        for name in SUITES {
            let a = run_suite(name, &cfg).unwrap().deterministic_json();
            let b = run_suite(name, &cfg).unwrap().deterministic_json();
            assert_eq!(a, b, "{name}");
        }
    }

    #[test]
    fn counterexamples_replay() {
        // an impossibly tight tolerance turns convertible pairs into failures
        let mut cfg = TrialConfig::new(2, vec![3], 40);
        cfg.tolerances.witness = 1e-300;
        let rep = run_duality_suite(&cfg).unwrap();
        assert!(!rep.passed());
        assert!(rep.counterexamples.len() <= COUNTEREXAMPLE_BUDGET);
        assert_eq!(rep.agreements + rep.counterexamples.len(), rep.trials);
        for cx in &rep.counterexamples {
            assert!(replay("duality", cx, &cfg.tolerances).unwrap().is_some());
            assert!(replay("duality", cx, &Tolerances::default()).unwrap().is_none());
        }
    }

    #[test]
    fn config_validation() {
        assert!(run_duality_suite(&TrialConfig::new(0, vec![3], 0)).is_err());
        assert!(run_catalyst_suite(&TrialConfig::new(0, vec![7], 1)).is_err());
        assert!(run_suite("nope", &TrialConfig::new(0, vec![2], 1)).is_err());
    }
}
