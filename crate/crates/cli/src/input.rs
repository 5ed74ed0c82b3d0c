//! Parsing of states, systems and boxes from inline arguments or files.

use std::path::Path;

use dualkit_core::boxworld::{pr_box_k, standard_pr_box};
use dualkit_core::gpt::{load_system, make_classical, make_square_bit};
use dualkit_core::quantum::{c, CMatrix};
use dualkit_core::{sampling, BoxState, DensityMatrix, PureBipartiteState, TheorySystem};
use serde::de::DeserializeOwned;

use crate::CliError;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Read a JSON value given inline (`{...}` / `[...]`) or as a file path.
pub fn json_arg<T: DeserializeOwned>(arg: &str, what: &str) -> Result<T, CliError> {
    let trimmed = arg.trim_start();
    if trimmed.starts_with('{') || trimmed.starts_with('[') {
        return serde_json::from_str(trimmed).map_err(|e| usage(format!("{what} (inline): {e}")));
    }
    let text = std::fs::read_to_string(arg).map_err(|e| usage(format!("{what}: cannot read {arg}: {e}")))?;
    serde_json::from_str(&text).map_err(|e| usage(format!("{what}: {arg}: {e}")))
}

fn numbers(list: &str, what: &str) -> Result<Vec<f64>, CliError> {
    list.split(',')
        .enumerate()
        .map(|(i, s)| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| usage(format!("{what}: entry {} (`{}`) is not a number", i + 1, s.trim())))
        })
        .collect()
}

fn count(s: &str, what: &str) -> Result<usize, CliError> {
    s.trim()
        .parse()
        .map_err(|_| usage(format!("{what}: `{s}` is not a nonnegative integer")))
}

fn seed(s: &str, what: &str) -> Result<u64, CliError> {
    s.trim().parse().map_err(|_| usage(format!("{what}: seed `{s}` is not an integer")))
}

/// A real vector: `0.7,0.3`, a JSON array, or a file holding one.
pub fn vector(arg: &str, what: &str) -> Result<Vec<f64>, CliError> {
    if arg.trim_start().starts_with('[') || Path::new(arg).is_file() {
        json_arg(arg, what)
    } else {
        numbers(arg, what)
    }
}

/// `classical:N`, `square-bit`, or a theory file.
pub fn system(arg: &str) -> Result<TheorySystem, CliError> {
    if arg == "square-bit" {
        return Ok(make_square_bit());
    }
    if let Some(n) = arg.strip_prefix("classical:") {
        return make_classical(count(n, "--system")?).map_err(|e| usage(format!("--system: {e}")));
    }
    let text = std::fs::read_to_string(arg).map_err(|e| usage(format!("--system: cannot read {arg}: {e}")))?;
    load_system(&text).map_err(|e| usage(format!("--system: {arg}: {e}")))
}

/// Density matrix presets:
/// `mixed:D`, `diag:p1,p2,..`, `werner:F` (two qubits), `random:D[:RANK]:SEED`,
/// or JSON rows of `[re, im]` pairs.
pub fn density(arg: &str, what: &str) -> Result<DensityMatrix, CliError> {
    let bad = |e: dualkit_core::quantum::QuantumError| usage(format!("{what}: {e}"));
    if let Some(d) = arg.strip_prefix("mixed:") {
        let d = count(d, what)?;
        if d == 0 {
            return Err(usage(format!("{what}: dimension must be positive")));
        }
        return Ok(DensityMatrix::maximally_mixed(d));
    }
    if let Some(p) = arg.strip_prefix("diag:") {
        return DensityMatrix::from_diagonal(&numbers(p, what)?).map_err(bad);
    }
    if let Some(f) = arg.strip_prefix("werner:") {
        let f: f64 = f.parse().map_err(|_| usage(format!("{what}: `{f}` is not a number")))?;
        if !(0.0..=1.0).contains(&f) {
            return Err(usage(format!("{what}: Werner weight {f} outside [0, 1]")));
        }
        let bell = PureBipartiteState::maximally_entangled(2).density();
        let m: CMatrix = bell.matrix() * c(f, 0.0) + DensityMatrix::maximally_mixed(4).matrix() * c(1.0 - f, 0.0);
        return DensityMatrix::new(m).map_err(bad);
    }
    if let Some(rest) = arg.strip_prefix("random:") {
        let parts: Vec<&str> = rest.split(':').collect();
        let (d, rank, s) = match parts.as_slice() {
            [d, s] => {
                let d = count(d, what)?;
                (d, d, seed(s, what)?)
            }
            [d, k, s] => (count(d, what)?, count(k, what)?, seed(s, what)?),
            _ => return Err(usage(format!("{what}: expected random:D[:RANK]:SEED"))),
        };
        if d == 0 || rank == 0 || rank > d {
            return Err(usage(format!("{what}: need 1 <= rank <= dimension")));
        }
        let mut rng = sampling::rng(s, 0);
        return Ok(sampling::random_density(&mut rng, d, rank));
    }
    json_arg(arg, what)
}

/// Pure bipartite presets:
/// `bell:D`, `schmidt:p1,p2,..` (squared coefficients), `product:DA,DB`,
/// `random:DA,DB:SEED`, or JSON `{"dims": [DA, DB], "amplitudes": [[re, im], ..]}`.
pub fn pure_state(arg: &str, what: &str) -> Result<PureBipartiteState, CliError> {
    let bad = |e: dualkit_core::quantum::QuantumError| usage(format!("{what}: {e}"));
    let dims = |s: &str| -> Result<(usize, usize), CliError> {
        match s.split_once(',') {
            Some((a, b)) => Ok((count(a, what)?, count(b, what)?)),
            None => Err(usage(format!("{what}: expected dimensions DA,DB"))),
        }
    };
    if let Some(d) = arg.strip_prefix("bell:") {
        let d = count(d, what)?;
        if d == 0 {
            return Err(usage(format!("{what}: dimension must be positive")));
        }
        return Ok(PureBipartiteState::maximally_entangled(d));
    }
    if let Some(p) = arg.strip_prefix("schmidt:") {
        return PureBipartiteState::from_schmidt(&numbers(p, what)?).map_err(bad);
    }
    if let Some(ds) = arg.strip_prefix("product:") {
        let (da, db) = dims(ds)?;
        return PureBipartiteState::product_basis(da, db, 0, 0).map_err(bad);
    }
    if let Some(rest) = arg.strip_prefix("random:") {
        let (ds, s) = rest
            .split_once(':')
            .ok_or_else(|| usage(format!("{what}: expected random:DA,DB:SEED")))?;
        let (da, db) = dims(ds)?;
        if da == 0 || db == 0 {
            return Err(usage(format!("{what}: dimensions must be positive")));
        }
        let mut rng = sampling::rng(seed(s, what)?, 0);
        return Ok(sampling::random_pure_bipartite(&mut rng, da, db));
    }
    json_arg(arg, what)
}

/// `pr`, `pr:K` (outcomes K), `pr:K:DA:DB`, or a box file.
pub fn box_state(arg: &str) -> Result<BoxState, CliError> {
    if arg == "pr" {
        return Ok(standard_pr_box());
    }
    if let Some(rest) = arg.strip_prefix("pr:") {
        let parts: Vec<usize> = rest.split(':').map(|s| count(s, "--box")).collect::<Result<_, _>>()?;
        let (k, da, db) = match parts.as_slice() {
            [k] => (*k, *k, *k),
            [k, da, db] => (*k, *da, *db),
            _ => return Err(usage("--box: expected pr:K or pr:K:DA:DB")),
        };
        return pr_box_k(k, da, db).map_err(|e| usage(format!("--box: {e}")));
    }
    json_arg(arg, "--box")
}
