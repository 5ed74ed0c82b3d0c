//! `dualkit`: purity and pure-state entanglement from the command line.
//!
//! Exit status is 0 on success, 1 when a check fails or a suite finds a
//! counterexample, and 2 on malformed arguments or input files.

mod input;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dualkit_core::boxworld::{check_local_exchangeability, check_no_signalling, is_extreme, pr_box_k, standard_pr_box};
use dualkit_core::gpt::{make_square_bit, to_json, validate_system, TheoryFile};
use dualkit_core::harness::{self, Tolerances};
use dualkit_core::mixedness::{
    birkhoff_rare_synthesis, equally_mixed, invariant_state, majorizes, more_mixed, orbit_hull,
};
use dualkit_core::monotones::{
    f_purity, measurement_entropy, measurement_entropy_quantum, op_norm_distance, purity_2norm,
    purity_2norm_quantum, ConvexScalarFn, InvariantForm, MeasurementSet, MonotoneError,
    DEFAULT_ENUMERATION_BOUND,
};
use dualkit_core::quantum::{
    catalytic_erasure_possible, entanglement_of_formation, local_exchange_channels,
    local_exchange_residual, lu_equivalent, marginals, nielsen_convertible, one_way_locc_from_rare,
    purify, rare_synthesis_quantum, schmidt_decompose, squared_schmidt_coefficients,
    symmetric_purify, EofBudget,
};
use dualkit_core::{Counterexample, GptState, MonotoneReport, SuiteReport, TheorySystem, TrialConfig};
use nalgebra::DVector;
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use output::{emit, Format, Table};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Failed(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Failed(_) | CliError::Io(_) => 1,
        }
    }
}

fn failed(e: impl std::fmt::Display) -> CliError {
    CliError::Failed(e.to_string())
}

fn usage(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

#[derive(Debug, Parser)]
#[command(name = "dualkit", version, about = "Purity, majorization and pure-state entanglement toolkit")]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value = "json", global = true)]
    format: Format,
    /// Write the result here instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    /// Tolerance override for residual checks.
    #[arg(long, env = "DUALKIT_TOL", global = true)]
    tol: Option<f64>,
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Debug, Args)]
struct SystemArg {
    /// `classical:N`, `square-bit`, or a theory JSON file.
    #[arg(long)]
    system: String,
}

#[derive(Debug, Args)]
struct PairArgs {
    #[command(flatten)]
    system: SystemArg,
    /// State vector, e.g. `0.7,0.3`, or a JSON file.
    #[arg(long)]
    rho: String,
    #[arg(long)]
    sigma: String,
}

#[derive(Debug, Args)]
struct VectorPair {
    #[arg(long, allow_hyphen_values = true)]
    p: String,
    #[arg(long, allow_hyphen_values = true)]
    q: String,
}

#[derive(Debug, Args)]
struct PsiArg {
    /// `bell:D`, `schmidt:p1,..`, `product:DA,DB`, `random:DA,DB:SEED`, or JSON.
    #[arg(long)]
    psi: String,
}

#[derive(Debug, Args)]
struct PsiPair {
    #[command(flatten)]
    psi: PsiArg,
    #[arg(long)]
    target: String,
}

#[derive(Debug, Args)]
struct RhoArg {
    /// `mixed:D`, `diag:p1,..`, `werner:F`, `random:D[:RANK]:SEED`, or JSON.
    #[arg(long)]
    rho: String,
}

#[derive(Debug, Args)]
struct BoxArg {
    /// `pr`, `pr:K`, `pr:K:DA:DB`, or a box JSON file.
    #[arg(long = "box")]
    bx: String,
}

#[derive(Debug, Args)]
struct SuiteArgs {
    /// Dimensions to sample, e.g. `--dim 2,3,4`.
    #[arg(long = "dim", value_delimiter = ',')]
    dims: Vec<usize>,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Re-check stored counterexamples (a report or counterexample JSON)
    /// instead of sampling.
    #[arg(long)]
    replay: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum MonotoneName {
    /// x²-purity.
    X2,
    /// x log x-purity.
    Xlogx,
    /// Measurement entropy (smaller is purer).
    Entropy,
    /// Operational-norm distance from the invariant state.
    Opnorm,
    /// 2-norm purity in the group-invariant inner product.
    #[value(name = "2norm")]
    TwoNorm,
}

#[derive(Debug, Subcommand)]
enum Verb {
    /// Check the invariants of a theory definition.
    ValidateSystem(SystemArg),
    /// Print the square-bit theory definition.
    MakeSquareBit,
    /// Is sigma in the convex hull of the orbit of rho?
    MoreMixed(PairArgs),
    /// Are rho and sigma each more mixed than the other?
    EquallyMixed(PairArgs),
    /// The unique group-invariant state.
    InvariantState(SystemArg),
    /// Vertices of the convex hull of the orbit of rho.
    OrbitHull {
        #[command(flatten)]
        system: SystemArg,
        #[arg(long)]
        rho: String,
    },
    /// Does p majorize q?
    Majorizes(VectorPair),
    /// Permutation mixture sending p to q.
    Birkhoff(VectorPair),
    /// Evaluate a purity monotone on a state, or tabulate it over a grid.
    Monotone {
        #[arg(long, value_enum)]
        name: MonotoneName,
        #[arg(long)]
        system: Option<String>,
        /// GPT state vector.
        #[arg(long)]
        rho: Option<String>,
        /// Quantum density matrix (entropy and 2norm only).
        #[arg(long)]
        density: Option<String>,
        /// Tabulate over a grid with this many steps per coordinate.
        #[arg(long)]
        grid: Option<usize>,
        /// Bound on the number of enumerated measurements.
        #[arg(long, default_value_t = DEFAULT_ENUMERATION_BOUND)]
        bound: usize,
    },
    /// Schmidt decomposition.
    Schmidt(PsiArg),
    /// Reduced states of both parties.
    Marginals(PsiArg),
    /// A purification of rho.
    Purify(RhoArg),
    /// A purification whose two marginals both equal rho.
    SymPurify(RhoArg),
    /// Is psi convertible to target by LOCC?
    Nielsen(PsiPair),
    /// Are psi and target related by local unitaries?
    LuEquiv(PsiPair),
    /// Local channels exchanging the two parties of psi.
    LocexQuantum(PsiArg),
    /// Random-unitary channel sending rho-prime to rho.
    RareQuantum {
        #[arg(long)]
        rho: String,
        #[arg(long = "rho-prime")]
        rho_prime: String,
    },
    /// One-way LOCC protocol converting psi into target.
    OneWay(PsiPair),
    /// Entanglement of formation of a two-qubit state.
    Eof {
        #[command(flatten)]
        rho: RhoArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        starts: Option<usize>,
        #[arg(long)]
        iterations: Option<usize>,
        #[arg(long = "max-ensemble")]
        max_ensemble: Option<usize>,
    },
    /// Can rho be erased with a catalyst by random unitaries?
    Catalyst(RhoArg),
    /// A PR box; the standard one unless --k is given.
    MakePr {
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        da: Option<usize>,
        #[arg(long)]
        db: Option<usize>,
    },
    /// No-signalling check.
    CheckNs(BoxArg),
    /// Extremality in the no-signalling polytope.
    CheckExtreme(BoxArg),
    /// Search for local relabelings exchanging the two parties.
    CheckLocex(BoxArg),
    /// Cross-check LOCC convertibility against marginal mixedness.
    Duality(SuiteArgs),
    /// Cross-check the orbit LP against majorization.
    ClassicalAgreement(SuiteArgs),
    /// Check that maximally entangled states have maximally mixed marginals.
    MaxEnt(SuiteArgs),
    /// Check the catalytic erasure rule on random states.
    CatalystSuite(SuiteArgs),
}

/// A computed result and whether its checks passed.
struct Outcome {
    value: Value,
    table: Option<Table>,
    ok: bool,
    message: Option<String>,
}

impl Outcome {
    fn ok(value: impl Serialize) -> Result<Self, CliError> {
        Self::check(value, true, None)
    }

    fn check(value: impl Serialize, ok: bool, message: Option<String>) -> Result<Self, CliError> {
        Ok(Self {
            value: serde_json::to_value(value).map_err(|e| CliError::Io(e.to_string()))?,
            table: None,
            ok,
            message,
        })
    }
}

fn gpt_state<'s>(sys: &'s TheorySystem, arg: &str, what: &str) -> Result<GptState<'s>, CliError> {
    let v = input::vector(arg, what)?;
    if v.len() != sys.dim {
        return Err(usage(format!("{what}: expected {} entries, got {}", sys.dim, v.len())));
    }
    let state = GptState::new(sys, DVector::from_vec(v)).map_err(|e| usage(format!("{what}: {e}")))?;
    match state.in_state_space() {
        Ok(true) => Ok(state),
        Ok(false) => Err(usage(format!("{what}: vector lies outside the state space"))),
        Err(e) => Err(failed(e)),
    }
}

fn vec_json(v: &DVector<f64>) -> Vec<f64> {
    v.iter().copied().collect()
}

/// Compositions of `steps` into `parts` nonnegative integers.
fn compositions(steps: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 1 {
        return vec![vec![steps]];
    }
    (0..=steps)
        .rev()
        .flat_map(|first| {
            compositions(steps - first, parts - 1).into_iter().map(move |mut rest| {
                rest.insert(0, first);
                rest
            })
        })
        .collect()
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

const GRID_LIMIT: f64 = 200_000.0;

/// Mixtures of the pure states with weights on a regular grid, deduplicated.
fn grid_states(sys: &TheorySystem, steps: usize) -> Result<Vec<DVector<f64>>, CliError> {
    let n = sys.pure_states.len();
    if steps == 0 || n == 0 {
        return Err(usage("--grid needs at least one step and a system with pure states"));
    }
    if binomial(steps + n - 1, n - 1) > GRID_LIMIT {
        return Err(usage(format!("--grid {steps} yields more than {GRID_LIMIT} states")));
    }
    let mut seen = std::collections::BTreeSet::new();
    let mut out = Vec::new();
    for w in compositions(steps, n) {
        let mut v = DVector::zeros(sys.dim);
        for (k, p) in w.iter().zip(&sys.pure_states) {
            v += p * (*k as f64 / steps as f64);
        }
        let key: Vec<i64> = v.iter().map(|x| (x * 1e9).round() as i64).collect();
        if seen.insert(key) {
            out.push(v);
        }
    }
    Ok(out)
}

struct GptMonotone {
    name: MonotoneName,
    set: Option<MeasurementSet>,
    form: Option<InvariantForm>,
}

impl GptMonotone {
    fn new(name: MonotoneName, sys: &TheorySystem, bound: usize) -> Result<Self, CliError> {
        let set = match name {
            MonotoneName::X2 | MonotoneName::Xlogx | MonotoneName::Entropy => {
                Some(MeasurementSet::enumerate_bounded(sys, bound).map_err(failed)?)
            }
            _ => None,
        };
        let form = match name {
            MonotoneName::TwoNorm => Some(InvariantForm::new(sys).map_err(failed)?),
            _ => None,
        };
        Ok(Self { name, set, form })
    }

    /// The report and whether it is exact.
    fn eval(&self, rho: &GptState<'_>) -> Result<(MonotoneReport, bool), CliError> {
        let set = || self.set.as_ref().expect("measurements enumerated");
        let res = match self.name {
            MonotoneName::X2 => f_purity(rho, &ConvexScalarFn::Square, set()),
            MonotoneName::Xlogx => f_purity(rho, &ConvexScalarFn::XLogX, set()),
            MonotoneName::Entropy => measurement_entropy(rho, set()),
            MonotoneName::Opnorm => op_norm_distance(rho),
            MonotoneName::TwoNorm => Ok(purity_2norm(rho, self.form.as_ref().expect("form built"))),
        };
        match res {
            Ok(r) => Ok((r, true)),
            Err(MonotoneError::Partial { best, .. }) => Ok((*best, false)),
            Err(e) => Err(failed(e)),
        }
    }
}

fn monotone(
    name: MonotoneName,
    system: Option<String>,
    rho: Option<String>,
    density: Option<String>,
    grid: Option<usize>,
    bound: usize,
) -> Result<Outcome, CliError> {
    if let Some(d) = density {
        if system.is_some() || rho.is_some() || grid.is_some() {
            return Err(usage("--density cannot be combined with --system, --rho or --grid"));
        }
        let dm = input::density(&d, "--density")?;
        let report = match name {
            MonotoneName::Entropy => measurement_entropy_quantum(&dm).map_err(failed)?,
            MonotoneName::TwoNorm => {
                return Outcome::ok(json!({ "name": "2-norm-purity", "value": purity_2norm_quantum(&dm) }))
            }
            _ => return Err(usage("quantum states support only --name entropy and --name 2norm")),
        };
        return Outcome::ok(report);
    }
    let sys = input::system(system.as_deref().ok_or_else(|| usage("--system is required"))?)?;
    let m = GptMonotone::new(name, &sys, bound)?;
    match (rho, grid) {
        (Some(r), None) => {
            let state = gpt_state(&sys, &r, "--rho")?;
            let (report, exact) = m.eval(&state)?;
            let mut value = serde_json::to_value(&report).map_err(|e| CliError::Io(e.to_string()))?;
            value["exact"] = json!(exact);
            Ok(Outcome {
                value,
                table: None,
                ok: true,
                message: None,
            })
        }
        (None, Some(steps)) => {
            let states = grid_states(&sys, steps)?;
            let mut header: Vec<String> = (0..sys.dim).map(|i| format!("x{i}")).collect();
            header.extend(["value".to_string(), "exact".to_string()]);
            let mut rows = Vec::new();
            let mut items = Vec::new();
            for v in states {
                let state = GptState::new(&sys, v.clone()).map_err(failed)?;
                let (report, exact) = m.eval(&state)?;
                let value = output::round_sig(report.value);
                let mut row: Vec<String> = v.iter().map(|x| output::round_sig(*x).to_string()).collect();
                row.extend([value.to_string(), exact.to_string()]);
                rows.push(row);
                items.push(json!({ "state": vec_json(&v), "value": value, "exact": exact }));
            }
            Ok(Outcome {
                value: json!({ "name": report_name(name), "system": sys.name, "points": items }),
                table: Some(Table { header, rows }),
                ok: true,
                message: None,
            })
        }
        _ => Err(usage("give exactly one of --rho and --grid")),
    }
}

fn report_name(name: MonotoneName) -> &'static str {
    match name {
        MonotoneName::X2 => "x^2-purity",
        MonotoneName::Xlogx => "xlogx-purity",
        MonotoneName::Entropy => "measurement-entropy",
        MonotoneName::Opnorm => "op-norm-distance",
        MonotoneName::TwoNorm => "2-norm-purity",
    }
}

fn counterexamples_from(value: Value) -> Result<Vec<Counterexample>, CliError> {
    let list = match value {
        Value::Object(ref m) if m.contains_key("counterexamples") => m["counterexamples"].clone(),
        Value::Array(_) => value,
        single => Value::Array(vec![single]),
    };
    serde_json::from_value(list).map_err(|e| usage(format!("--replay: {e}")))
}

fn suite(name: &str, default_dims: &[usize], args: SuiteArgs, tol: Option<f64>) -> Result<Outcome, CliError> {
    let mut tolerances = Tolerances::default();
    if let Some(t) = tol {
        tolerances = Tolerances { witness: t, protocol: t };
    }
    if let Some(path) = args.replay {
        let value: Value = input::json_arg(&path.to_string_lossy(), "--replay")?;
        let cxs = counterexamples_from(value)?;
        let mut results = Vec::new();
        let mut still = 0;
        for cx in &cxs {
            let reason = harness::replay(name, cx, &tolerances).map_err(usage)?;
            still += usize::from(reason.is_some());
            results.push(json!({ "dim": cx.dim, "trial": cx.trial, "failing": reason.is_some(), "reason": reason }));
        }
        let msg = (still > 0).then(|| format!("{still} of {} counterexamples still fail", cxs.len()));
        return Outcome::check(results, still == 0, msg);
    }
    let dims = if args.dims.is_empty() { default_dims.to_vec() } else { args.dims };
    let cfg = TrialConfig {
        seed: args.seed,
        dims,
        trials: args.trials,
        tolerances,
    };
    let report: SuiteReport = harness::run_suite(name, &cfg).map_err(usage)?;
    let table = Table {
        header: report.csv_header().split(',').map(String::from).collect(),
        rows: vec![report.csv_row().split(',').map(String::from).collect()],
    };
    let ok = report.passed();
    let msg = (!ok).then(|| format!("{} counterexample(s) found", report.counterexamples.len()));
    let mut out = Outcome::check(&report, ok, msg)?;
    out.table = Some(table);
    Ok(out)
}

fn dispatch(verb: Verb, tol: Option<f64>) -> Result<Outcome, CliError> {
    let tol_or = |d: f64| tol.unwrap_or(d);
    match verb {
        Verb::ValidateSystem(s) => {
            let sys = match s.system.as_str() {
                a if a == "square-bit" || a.starts_with("classical:") => input::system(a)?,
                path => input::json_arg::<TheoryFile>(path, "--system")?
                    .to_system()
                    .map_err(|e| usage(format!("--system: {path}: {e}")))?,
            };
            let report = validate_system(&sys).map_err(failed)?;
            let valid = report.is_valid();
            let msg = (!valid).then(|| format!("system is invalid: {report}"));
            Outcome::check(json!({ "name": sys.name, "valid": valid, "violations": report.violations }), valid, msg)
        }
        Verb::MakeSquareBit => {
            let v: Value = serde_json::from_str(&to_json(&make_square_bit())).map_err(failed)?;
            Outcome::ok(v)
        }
        Verb::MoreMixed(a) => {
            let sys = input::system(&a.system.system)?;
            let rho = gpt_state(&sys, &a.rho, "--rho")?;
            let sigma = gpt_state(&sys, &a.sigma, "--sigma")?;
            Outcome::ok(more_mixed(&rho, &sigma).map_err(failed)?)
        }
        Verb::EquallyMixed(a) => {
            let sys = input::system(&a.system.system)?;
            let rho = gpt_state(&sys, &a.rho, "--rho")?;
            let sigma = gpt_state(&sys, &a.sigma, "--sigma")?;
            Outcome::ok(equally_mixed(&rho, &sigma).map_err(failed)?)
        }
        Verb::InvariantState(s) => {
            let sys = input::system(&s.system)?;
            let chi = invariant_state(&sys).map_err(failed)?;
            Outcome::ok(json!({ "state": vec_json(&chi.vec) }))
        }
        Verb::OrbitHull { system, rho } => {
            let sys = input::system(&system.system)?;
            let state = gpt_state(&sys, &rho, "--rho")?;
            let hull = orbit_hull(&state).map_err(failed)?;
            let vertices: Vec<Vec<f64>> = hull.iter().map(vec_json).collect();
            let table = Table {
                header: (0..sys.dim).map(|i| format!("x{i}")).collect(),
                rows: vertices
                    .iter()
                    .map(|v| v.iter().map(|x| output::round_sig(*x).to_string()).collect())
                    .collect(),
            };
            let mut out = Outcome::ok(json!({ "count": vertices.len(), "vertices": vertices }))?;
            out.table = Some(table);
            Ok(out)
        }
        Verb::Majorizes(v) => {
            let p = input::vector(&v.p, "--p")?;
            let q = input::vector(&v.q, "--q")?;
            Outcome::ok(json!({ "majorizes": majorizes(&p, &q).map_err(usage)? }))
        }
        Verb::Birkhoff(v) => {
            let p = input::vector(&v.p, "--p")?;
            let q = input::vector(&v.q, "--q")?;
            let (_, terms) = birkhoff_rare_synthesis(&p, &q).map_err(failed)?;
            let mut image = vec![0.0; p.len()];
            for t in &terms {
                for (o, x) in image.iter_mut().zip(t.permutation.apply(&p)) {
                    *o += t.weight * x;
                }
            }
            let residual = image.iter().zip(&q).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            let ok = residual <= tol_or(1e-9);
            let msg = (!ok).then(|| format!("residual {residual:.3e} exceeds tolerance"));
            let mut out = Outcome::check(json!({ "terms": terms, "residual": residual }), ok, msg)?;
            out.table = Some(Table {
                header: vec!["weight".into(), "permutation".into()],
                rows: terms
                    .iter()
                    .map(|t| {
                        let perm: Vec<String> = t.permutation.0.iter().map(usize::to_string).collect();
                        vec![output::round_sig(t.weight).to_string(), perm.join(" ")]
                    })
                    .collect(),
            });
            Ok(out)
        }
        Verb::Monotone { name, system, rho, density, grid, bound } => monotone(name, system, rho, density, grid, bound),
        Verb::Schmidt(p) => Outcome::ok(schmidt_decompose(&input::pure_state(&p.psi, "--psi")?)),
        Verb::Marginals(p) => {
            let psi = input::pure_state(&p.psi, "--psi")?;
            let (a, b) = marginals(&psi).map_err(failed)?;
            Outcome::ok(json!({ "rho_a": a, "rho_b": b }))
        }
        Verb::Purify(r) => Outcome::ok(purify(&input::density(&r.rho, "--rho")?).map_err(failed)?),
        Verb::SymPurify(r) => Outcome::ok(symmetric_purify(&input::density(&r.rho, "--rho")?).map_err(failed)?),
        Verb::Nielsen(p) => {
            let psi = input::pure_state(&p.psi.psi, "--psi")?;
            let target = input::pure_state(&p.target, "--target")?;
            Outcome::ok(json!({
                "convertible": nielsen_convertible(&psi, &target),
                "source_spectrum": squared_schmidt_coefficients(&psi),
                "target_spectrum": squared_schmidt_coefficients(&target),
            }))
        }
        Verb::LuEquiv(p) => {
            let psi = input::pure_state(&p.psi.psi, "--psi")?;
            let target = input::pure_state(&p.target, "--target")?;
            Outcome::ok(json!({ "lu_equivalent": lu_equivalent(&psi, &target).map_err(usage)? }))
        }
        Verb::LocexQuantum(p) => {
            let psi = input::pure_state(&p.psi, "--psi")?;
            let (c_ab, d_ba) = local_exchange_channels(&psi).map_err(failed)?;
            let residual = local_exchange_residual(&psi, &c_ab, &d_ba);
            let ok = residual <= tol_or(1e-9);
            let msg = (!ok).then(|| format!("exchange residual {residual:.3e} exceeds tolerance"));
            Outcome::check(json!({ "c_ab": c_ab, "d_ba": d_ba, "residual": residual }), ok, msg)
        }
        Verb::RareQuantum { rho, rho_prime } => {
            let rho = input::density(&rho, "--rho")?;
            let rho_p = input::density(&rho_prime, "--rho-prime")?;
            let rare = rare_synthesis_quantum(&rho, &rho_p).map_err(failed)?;
            let residual = rare.residual(&rho_p, &rho);
            let ok = residual <= tol_or(1e-9);
            let msg = (!ok).then(|| format!("residual {residual:.3e} exceeds tolerance"));
            Outcome::check(json!({ "terms": rare.terms, "residual": residual }), ok, msg)
        }
        Verb::OneWay(p) => {
            let psi = input::pure_state(&p.psi.psi, "--psi")?;
            let target = input::pure_state(&p.target, "--target")?;
            if !nielsen_convertible(&psi, &target) {
                return Outcome::ok(json!({ "convertible": false }));
            }
            let (ra, _) = marginals(&psi).map_err(failed)?;
            let (ta, _) = marginals(&target).map_err(failed)?;
            let rare = rare_synthesis_quantum(&ra, &ta).map_err(failed)?;
            let proto = one_way_locc_from_rare(&psi, &target, &rare).map_err(failed)?;
            let check = proto.check(&psi, &target).map_err(failed)?;
            let ok = check.max() <= tol_or(1e-8);
            let msg = (!ok).then(|| format!("protocol residual {:.3e} exceeds tolerance", check.max()));
            Outcome::check(json!({ "convertible": true, "protocol": proto, "check": check }), ok, msg)
        }
        Verb::Eof { rho, seed, starts, iterations, max_ensemble } => {
            let dm = input::density(&rho.rho, "--rho")?;
            let d = EofBudget::default();
            let budget = EofBudget {
                starts: starts.unwrap_or(d.starts),
                iterations: iterations.unwrap_or(d.iterations),
                max_ensemble: max_ensemble.unwrap_or(d.max_ensemble),
            };
            Outcome::ok(entanglement_of_formation(&dm, &budget, seed).map_err(usage)?)
        }
        Verb::Catalyst(r) => Outcome::ok(catalytic_erasure_possible(&input::density(&r.rho, "--rho")?).map_err(failed)?),
        Verb::MakePr { k, da, db } => {
            let bx = match k {
                None if da.is_none() && db.is_none() => standard_pr_box(),
                None => return Err(usage("--da and --db need --k")),
                Some(k) => pr_box_k(k, da.unwrap_or(k), db.unwrap_or(k)).map_err(usage)?,
            };
            Outcome::ok(bx)
        }
        Verb::CheckNs(b) => {
            let bx = input::box_state(&b.bx)?;
            match check_no_signalling(&bx) {
                Ok(()) => Outcome::ok(json!({ "no_signalling": true })),
                Err(e) => Outcome::check(
                    json!({ "no_signalling": false, "reason": e.to_string() }),
                    false,
                    Some(e.to_string()),
                ),
            }
        }
        Verb::CheckExtreme(b) => {
            let bx = input::box_state(&b.bx)?;
            let extreme = is_extreme(&bx);
            Outcome::check(json!({ "extreme": extreme }), extreme, (!extreme).then(|| "box is not extreme".into()))
        }
        Verb::CheckLocex(b) => {
            let bx = input::box_state(&b.bx)?;
            match check_local_exchangeability(&bx).map_err(failed)? {
                Some(w) => Outcome::ok(json!({ "exchangeable": true, "witness": w })),
                None => Outcome::check(
                    json!({ "exchangeable": false }),
                    false,
                    Some("no local relabeling exchanges the parties".into()),
                ),
            }
        }
        Verb::Duality(a) => suite("duality", &[2, 3, 4], a, tol),
        Verb::ClassicalAgreement(a) => suite("classical-agreement", &[2, 3, 4, 5], a, tol),
        Verb::MaxEnt(a) => suite("max-ent", &[2, 3, 4], a, tol),
        Verb::CatalystSuite(a) => suite("catalyst", &[2, 3, 4], a, tol),
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(t) = cli.tol {
        if !(t.is_finite() && t > 0.0) {
            return Err(usage(format!("tolerance must be positive, got {t}")));
        }
    }
    let out = dispatch(cli.verb, cli.tol)?;
    emit(out.value, out.table, cli.format, cli.output.as_deref())?;
    if out.ok {
        Ok(())
    } else {
        Err(CliError::Failed(out.message.unwrap_or_else(|| "check failed".into())))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("dualkit: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_covers_the_simplex() {
        assert_eq!(compositions(2, 3).len(), 6);
        let sys = dualkit_core::gpt::make_classical(3).unwrap();
        assert_eq!(grid_states(&sys, 4).unwrap().len(), 15);
        // the square's barycentric grid repeats the center
        let sq = make_square_bit();
        let pts = grid_states(&sq, 2).unwrap();
        assert!(pts.len() < compositions(2, 4).len());
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
        assert_eq!(Cli::command().get_subcommands().count(), 28);
    }
}
