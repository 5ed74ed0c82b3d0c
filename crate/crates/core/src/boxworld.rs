//! Bipartite no-signalling boxes in exact rational arithmetic.
//!
//! A box is a table `p(ab|xy)` of outcome probabilities for every pair of
//! settings. Local reversible transformations are relabelings of settings
//! and of outcomes (the latter may depend on the setting).

use std::fmt;
use std::str::FromStr;

use itertools::Itertools;
use num_bigint::BigInt;
use num_rational::{BigRational, Rational64};
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest number of settings handled by the exchangeability search.
pub const MAX_SETTINGS: usize = 3;
/// Largest number of outcomes handled by the exchangeability search.
pub const MAX_OUTCOMES: usize = 5;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BoxError {
    #[error("table has {got} entries, expected {expected}")]
    Shape { expected: usize, got: usize },
    #[error("settings and outcome counts must be positive")]
    EmptyShape,
    #[error("negative entry at p({a}{b}|{x}{y})")]
    Negative { a: usize, b: usize, x: usize, y: usize },
    #[error("probabilities for settings ({x}, {y}) sum to {sum}")]
    NotNormalized { x: usize, y: usize, sum: String },
    #[error("box is signalling: {0}")]
    Signalling(String),
    #[error("k = {k} must satisfy 2 <= k <= min(d_A, d_B) = {max}")]
    KOutOfRange { k: usize, max: usize },
    #[error("{0}")]
    Capacity(String),
    #[error("invalid relabeling: {0}")]
    InvalidRelabeling(String),
    #[error("shapes differ: {0}")]
    ShapeMismatch(String),
    #[error("malformed box: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, BoxError>;

/// A table `p(ab|xy)` with exact rational entries.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BoxState {
    n_x: usize,
    n_y: usize,
    d_a: usize,
    d_b: usize,
    table: Vec<Rational64>,
}

impl BoxState {
    /// Entries ordered by `a`, then `b`, `x`, `y` (last fastest). Checks
    /// nonnegativity and normalization; no-signalling is checked separately
    /// by [`check_no_signalling`].
    pub fn new(settings: (usize, usize), outcomes: (usize, usize), table: Vec<Rational64>) -> Result<Self> {
        let (n_x, n_y) = settings;
        let (d_a, d_b) = outcomes;
        if n_x == 0 || n_y == 0 || d_a == 0 || d_b == 0 {
            return Err(BoxError::EmptyShape);
        }
        let expected = n_x * n_y * d_a * d_b;
        if table.len() != expected {
            return Err(BoxError::Shape {
                expected,
                got: table.len(),
            });
        }
        let b = Self {
            n_x,
            n_y,
            d_a,
            d_b,
            table,
        };
        for (a, bb, x, y) in b.indices() {
            if b.get(a, bb, x, y).is_negative() {
                return Err(BoxError::Negative { a, b: bb, x, y });
            }
        }
        for x in 0..n_x {
            for y in 0..n_y {
                let sum: Rational64 = (0..d_a)
                    .flat_map(|a| (0..d_b).map(move |bb| (a, bb)))
                    .map(|(a, bb)| b.get(a, bb, x, y))
                    .sum();
                if !sum.is_one() {
                    return Err(BoxError::NotNormalized {
                        x,
                        y,
                        sum: sum.to_string(),
                    });
                }
            }
        }
        Ok(b)
    }

    /// Build from `f(a, b, x, y)`.
    pub fn from_fn(
        settings: (usize, usize),
        outcomes: (usize, usize),
        f: impl Fn(usize, usize, usize, usize) -> Rational64,
    ) -> Result<Self> {
        let (n_x, n_y) = settings;
        let (d_a, d_b) = outcomes;
        let mut table = Vec::with_capacity(n_x * n_y * d_a * d_b);
        for a in 0..d_a {
            for b in 0..d_b {
                for x in 0..n_x {
                    for y in 0..n_y {
                        table.push(f(a, b, x, y));
                    }
                }
            }
        }
        Self::new(settings, outcomes, table)
    }

    pub fn settings(&self) -> (usize, usize) {
        (self.n_x, self.n_y)
    }

    pub fn outcomes(&self) -> (usize, usize) {
        (self.d_a, self.d_b)
    }

    fn index(&self, a: usize, b: usize, x: usize, y: usize) -> usize {
        ((a * self.d_b + b) * self.n_x + x) * self.n_y + y
    }

    pub fn get(&self, a: usize, b: usize, x: usize, y: usize) -> Rational64 {
        self.table[self.index(a, b, x, y)]
    }

    pub fn table(&self) -> &[Rational64] {
        &self.table
    }

    fn indices(&self) -> impl Iterator<Item = (usize, usize, usize, usize)> {
        let (n_x, n_y, d_b) = (self.n_x, self.n_y, self.d_b);
        (0..self.d_a).flat_map(move |a| {
            (0..d_b).flat_map(move |b| (0..n_x).flat_map(move |x| (0..n_y).map(move |y| (a, b, x, y))))
        })
    }
}

impl fmt::Display for BoxState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for x in 0..self.n_x {
            for y in 0..self.n_y {
                writeln!(f, "x={x} y={y}")?;
                for a in 0..self.d_a {
                    let row = (0..self.d_b).map(|b| self.get(a, b, x, y).to_string()).join(" ");
                    writeln!(f, "  {row}")?;
                }
            }
        }
        Ok(())
    }
}

fn rational_to_string(r: &Rational64) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

fn rational_from_str(s: &str) -> Result<Rational64> {
    Rational64::from_str(s.trim()).map_err(|e| BoxError::Parse(format!("{s:?}: {e}")))
}

/// Serialized box: nested `table[a][b][x][y]` of `"num/den"` strings.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoxJson {
    pub settings: [usize; 2],
    pub outcomes: [usize; 2],
    pub table: Vec<Vec<Vec<Vec<String>>>>,
}

impl From<&BoxState> for BoxJson {
    fn from(b: &BoxState) -> Self {
        BoxJson {
            settings: [b.n_x, b.n_y],
            outcomes: [b.d_a, b.d_b],
            table: (0..b.d_a)
                .map(|a| {
                    (0..b.d_b)
                        .map(|bb| {
                            (0..b.n_x)
                                .map(|x| (0..b.n_y).map(|y| rational_to_string(&b.get(a, bb, x, y))).collect())
                                .collect()
                        })
                        .collect()
                })
                .collect(),
        }
    }
}

impl TryFrom<BoxJson> for BoxState {
    type Error = BoxError;
    fn try_from(j: BoxJson) -> Result<Self> {
        let [n_x, n_y] = j.settings;
        let [d_a, d_b] = j.outcomes;
        let shape_err = || BoxError::Parse("table shape does not match settings and outcomes".into());
        if j.table.len() != d_a {
            return Err(shape_err());
        }
        let mut flat = Vec::with_capacity(n_x * n_y * d_a * d_b);
        for rows in &j.table {
            if rows.len() != d_b {
                return Err(shape_err());
            }
            for xs in rows {
                if xs.len() != n_x {
                    return Err(shape_err());
                }
                for ys in xs {
                    if ys.len() != n_y {
                        return Err(shape_err());
                    }
                    for s in ys {
                        flat.push(rational_from_str(s)?);
                    }
                }
            }
        }
        BoxState::new((n_x, n_y), (d_a, d_b), flat)
    }
}

impl Serialize for BoxState {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        BoxJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for BoxState {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        BoxState::try_from(BoxJson::deserialize(d)?).map_err(serde::de::Error::custom)
    }
}

/// `p(ab|xy) = 1/2` when `a + b ≡ xy (mod 2)`.
pub fn standard_pr_box() -> BoxState {
    BoxState::from_fn((2, 2), (2, 2), |a, b, x, y| {
        if (a + b) % 2 == (x * y) % 2 {
            Rational64::new(1, 2)
        } else {
            Rational64::zero()
        }
    })
    .expect("PR box is normalized")
}

/// `p(ab|xy) = 1/k` when `a, b < k` and `b − a ≡ xy (mod k)`.
pub fn pr_box_k(k: usize, d_a: usize, d_b: usize) -> Result<BoxState> {
    let max = d_a.min(d_b);
    if k < 2 || k > max {
        return Err(BoxError::KOutOfRange { k, max });
    }
    BoxState::from_fn((2, 2), (d_a, d_b), |a, b, x, y| {
        if a < k && b < k && (b + k - a) % k == (x * y) % k {
            Rational64::new(1, k as i64)
        } else {
            Rational64::zero()
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    A,
    B,
}

/// A local reversible transformation of one party: settings are permuted by
/// `settings` and the outcome of setting `x` by `outcomes[x]`, so the
/// entry for `(a, x)` moves to `(outcomes[x][a], settings[x])`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LocalRelabeling {
    pub side: Side,
    pub settings: Vec<usize>,
    pub outcomes: Vec<Vec<usize>>,
}

fn is_permutation(p: &[usize], n: usize) -> bool {
    p.len() == n && {
        let mut seen = vec![false; n];
        p.iter().all(|&i| i < n && !std::mem::replace(&mut seen[i], true))
    }
}

impl LocalRelabeling {
    pub fn identity(side: Side, n_settings: usize, n_outcomes: usize) -> Self {
        Self {
            side,
            settings: (0..n_settings).collect(),
            outcomes: vec![(0..n_outcomes).collect(); n_settings],
        }
    }

    pub fn is_identity(&self) -> bool {
        self.settings.iter().enumerate().all(|(i, &s)| i == s)
            && self.outcomes.iter().all(|o| o.iter().enumerate().all(|(i, &s)| i == s))
    }

    fn validate(&self, n_settings: usize, n_outcomes: usize) -> Result<()> {
        if !is_permutation(&self.settings, n_settings) {
            return Err(BoxError::InvalidRelabeling(format!(
                "setting map {:?} is not a permutation of 0..{n_settings}",
                self.settings
            )));
        }
        if self.outcomes.len() != n_settings {
            return Err(BoxError::InvalidRelabeling(format!(
                "{} outcome maps for {n_settings} settings",
                self.outcomes.len()
            )));
        }
        if let Some(o) = self.outcomes.iter().find(|o| !is_permutation(o, n_outcomes)) {
            return Err(BoxError::InvalidRelabeling(format!(
                "outcome map {o:?} is not a permutation of 0..{n_outcomes}"
            )));
        }
        Ok(())
    }
}

/// Apply a local relabeling to one party.
pub fn apply_relabeling(bx: &BoxState, r: &LocalRelabeling) -> Result<BoxState> {
    match r.side {
        Side::A => r.validate(bx.n_x, bx.d_a)?,
        Side::B => r.validate(bx.n_y, bx.d_b)?,
    }
    let mut table = vec![Rational64::zero(); bx.table.len()];
    for (a, b, x, y) in bx.indices() {
        let (a2, b2, x2, y2) = match r.side {
            Side::A => (r.outcomes[x][a], b, r.settings[x], y),
            Side::B => (a, r.outcomes[y][b], x, r.settings[y]),
        };
        table[bx.index(a2, b2, x2, y2)] = bx.get(a, b, x, y);
    }
    let out = BoxState {
        table,
        ..bx.clone()
    };
    debug_assert!(check_no_signalling(bx).is_err() || check_no_signalling(&out).is_ok());
    Ok(out)
}

/// Exchange the parties: `p′(ab|xy) = p(ba|yx)`.
pub fn swap_parties(bx: &BoxState) -> BoxState {
    let swapped = BoxState {
        n_x: bx.n_y,
        n_y: bx.n_x,
        d_a: bx.d_b,
        d_b: bx.d_a,
        table: Vec::new(),
    };
    let mut table = vec![Rational64::zero(); bx.table.len()];
    for (a, b, x, y) in bx.indices() {
        table[swapped.index(b, a, y, x)] = bx.get(a, b, x, y);
    }
    BoxState { table, ..swapped }
}

/// Exact no-signalling check: Alice's marginal must not depend on `y` and
/// Bob's must not depend on `x`.
pub fn check_no_signalling(bx: &BoxState) -> Result<()> {
    for x in 0..bx.n_x {
        for a in 0..bx.d_a {
            let marginal = |y: usize| -> Rational64 { (0..bx.d_b).map(|b| bx.get(a, b, x, y)).sum() };
            let m0 = marginal(0);
            if let Some(y) = (1..bx.n_y).find(|&y| marginal(y) != m0) {
                return Err(BoxError::Signalling(format!(
                    "p_A({a}|x={x}) is {m0} for y=0 but {} for y={y}",
                    marginal(y)
                )));
            }
        }
    }
    for y in 0..bx.n_y {
        for b in 0..bx.d_b {
            let marginal = |x: usize| -> Rational64 { (0..bx.d_a).map(|a| bx.get(a, b, x, y)).sum() };
            let m0 = marginal(0);
            if let Some(x) = (1..bx.n_x).find(|&x| marginal(x) != m0) {
                return Err(BoxError::Signalling(format!(
                    "p_B({b}|y={y}) is {m0} for x=0 but {} for x={x}",
                    marginal(x)
                )));
            }
        }
    }
    Ok(())
}

/// Rank of a rational matrix by fraction-exact Gaussian elimination.
fn rank(mut rows: Vec<Vec<BigRational>>, ncols: usize) -> usize {
    let mut r = 0;
    for col in 0..ncols {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][col].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let pivot = rows[r][col].clone();
        let pivot_row: Vec<BigRational> = rows[r].iter().map(|v| v / &pivot).collect();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != r && !row[col].is_zero() {
                let factor = row[col].clone();
                for (v, pv) in row.iter_mut().zip(&pivot_row).skip(col) {
                    *v -= &factor * pv;
                }
            }
        }
        rows[r] = pivot_row;
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    r
}

/// Whether the box is a vertex of the no-signalling polytope: the equality
/// constraints active at the box (its zero entries, normalization and
/// no-signalling) must determine it uniquely.
pub fn is_extreme(bx: &BoxState) -> bool {
    if check_no_signalling(bx).is_err() {
        return false;
    }
    let n = bx.table.len();
    let one = || BigRational::from_integer(BigInt::one());
    let zero_row = || vec![BigRational::zero(); n];
    let mut rows = Vec::new();
    for (a, b, x, y) in bx.indices() {
        if bx.get(a, b, x, y).is_zero() {
            let mut row = zero_row();
            row[bx.index(a, b, x, y)] = one();
            rows.push(row);
        }
    }
    for x in 0..bx.n_x {
        for y in 0..bx.n_y {
            let mut row = zero_row();
            for a in 0..bx.d_a {
                for b in 0..bx.d_b {
                    row[bx.index(a, b, x, y)] = one();
                }
            }
            rows.push(row);
        }
    }
    for x in 0..bx.n_x {
        for a in 0..bx.d_a {
            for y in 1..bx.n_y {
                let mut row = zero_row();
                for b in 0..bx.d_b {
                    row[bx.index(a, b, x, y)] = one();
                    row[bx.index(a, b, x, 0)] = -one();
                }
                rows.push(row);
            }
        }
    }
    for y in 0..bx.n_y {
        for b in 0..bx.d_b {
            for x in 1..bx.n_x {
                let mut row = zero_row();
                for a in 0..bx.d_a {
                    row[bx.index(a, b, x, y)] = one();
                    row[bx.index(a, b, 0, y)] = -one();
                }
                rows.push(row);
            }
        }
    }
    rank(rows, n) == n
}

/// Relabelings `(r_A, r_B)` with `(r_A ⊗ r_B)(box) = swap_parties(box)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExchangeWitness {
    pub alice: LocalRelabeling,
    pub bob: LocalRelabeling,
}

/// For a fixed Bob setting map, match each Bob column of `q` to a column of
/// `target` to build the outcome permutations.
fn match_bob(q: &BoxState, target: &BoxState, settings: &[usize]) -> Option<Vec<Vec<usize>>> {
    let column = |bx: &BoxState, b: usize, y: usize| -> Vec<Rational64> {
        (0..bx.d_a)
            .flat_map(|a| (0..bx.n_x).map(move |x| (a, x)))
            .map(|(a, x)| bx.get(a, b, x, y))
            .collect()
    };
    let mut outcomes = Vec::with_capacity(q.n_y);
    for (y, &y2) in settings.iter().enumerate() {
        let mut used = vec![false; q.d_b];
        let mut perm = Vec::with_capacity(q.d_b);
        for b in 0..q.d_b {
            let col = column(q, b, y);
            let b2 = (0..q.d_b).find(|&b2| !used[b2] && column(target, b2, y2) == col)?;
            used[b2] = true;
            perm.push(b2);
        }
        outcomes.push(perm);
    }
    Some(outcomes)
}

fn search_space(n_settings: usize, n_outcomes: usize) -> impl Iterator<Item = (Vec<usize>, Vec<Vec<usize>>)> + Clone {
    let outcome_perms: Vec<Vec<usize>> = (0..n_outcomes).permutations(n_outcomes).collect();
    (0..n_settings).permutations(n_settings).flat_map(move |s| {
        let perms = outcome_perms.clone();
        std::iter::repeat_n(perms, n_settings)
            .multi_cartesian_product()
            .map(move |o| (s.clone(), o))
    })
}

/// Exhaustive search, identity first and then lexicographic in Alice's
/// relabeling, for local relabelings that exchange the parties.
///
/// Returns `Ok(None)` when no witness exists within the search space.
pub fn check_local_exchangeability(bx: &BoxState) -> Result<Option<ExchangeWitness>> {
    check_no_signalling(bx)?;
    if bx.n_x != bx.n_y || bx.d_a != bx.d_b {
        return Err(BoxError::ShapeMismatch(format!(
            "settings {:?} and outcomes {:?} differ between the parties",
            bx.settings(),
            bx.outcomes()
        )));
    }
    if bx.n_x > MAX_SETTINGS || bx.d_a > MAX_OUTCOMES {
        return Err(BoxError::Capacity(format!(
            "exchangeability search supports at most {MAX_SETTINGS} settings and {MAX_OUTCOMES} outcomes"
        )));
    }
    let target = swap_parties(bx);
    let bob_settings: Vec<Vec<usize>> = (0..bx.n_y).permutations(bx.n_y).collect();
    // with Alice's relabeling fixed, Bob's outcome maps follow by matching
    for (settings, outcomes) in search_space(bx.n_x, bx.d_a) {
        let alice = LocalRelabeling {
            side: Side::A,
            settings,
            outcomes,
        };
        let q = apply_relabeling(bx, &alice)?;
        for s in &bob_settings {
            if let Some(outcomes) = match_bob(&q, &target, s) {
                let bob = LocalRelabeling {
                    side: Side::B,
                    settings: s.clone(),
                    outcomes,
                };
                debug_assert_eq!(apply_relabeling(&q, &bob).ok().as_ref(), Some(&target));
                return Ok(Some(ExchangeWitness { alice, bob }));
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational64 {
        Rational64::new(n, d)
    }

    #[test]
    fn pr_box_entries() {
        let pr = standard_pr_box();
        assert_eq!(pr.get(0, 0, 0, 0), r(1, 2));
        assert_eq!(pr.get(0, 1, 0, 0), r(0, 1));
        assert_eq!(pr.get(0, 1, 1, 1), r(1, 2));
        assert!(check_no_signalling(&pr).is_ok());
    }

    #[test]
    fn pr_box_k_entries() {
        let b3 = pr_box_k(3, 3, 3).unwrap();
        for a in 0..3 {
            assert_eq!(b3.get(a, a, 0, 0), r(1, 3));
        }
        assert_eq!(b3.get(1, 2, 1, 1), r(1, 3));
        assert_eq!(pr_box_k(2, 2, 2).unwrap(), standard_pr_box());
        assert!(matches!(pr_box_k(4, 3, 5), Err(BoxError::KOutOfRange { .. })));
        assert!(matches!(pr_box_k(1, 3, 3), Err(BoxError::KOutOfRange { .. })));
        let padded = pr_box_k(2, 4, 3).unwrap();
        assert_eq!(padded.get(3, 2, 0, 0), r(0, 1));
        assert!(check_no_signalling(&padded).is_ok());
    }

    #[test]
    fn swap_and_relabel() {
        let pr = standard_pr_box();
        assert_eq!(swap_parties(&pr), pr);
        let flip = LocalRelabeling {
            side: Side::A,
            settings: vec![0, 1],
            outcomes: vec![vec![1, 0], vec![1, 0]],
        };
        let flipped = apply_relabeling(&pr, &flip).unwrap();
        assert_ne!(flipped, pr);
        assert!(check_no_signalling(&flipped).is_ok());
        assert!(is_extreme(&flipped));
    }

    #[test]
    fn k3_swap_is_undone_by_negation() {
        let b = pr_box_k(3, 3, 3).unwrap();
        let neg = vec![0, 2, 1];
        let ra = LocalRelabeling {
            side: Side::A,
            settings: vec![0, 1],
            outcomes: vec![neg.clone(), neg.clone()],
        };
        let rb = LocalRelabeling {
            side: Side::B,
            ..ra.clone()
        };
        let out = apply_relabeling(&apply_relabeling(&b, &ra).unwrap(), &rb).unwrap();
        assert_eq!(out, swap_parties(&b));
    }

    #[test]
    fn extremality() {
        assert!(is_extreme(&standard_pr_box()));
        let uniform = BoxState::from_fn((2, 2), (2, 2), |_, _, _, _| r(1, 4)).unwrap();
        assert!(!is_extreme(&uniform));
        assert!(is_extreme(&pr_box_k(3, 3, 3).unwrap()));
        // deterministic local boxes are vertices as well
        let det = BoxState::from_fn((2, 2), (2, 2), |a, b, _, _| if a == 0 && b == 1 { r(1, 1) } else { r(0, 1) }).unwrap();
        assert!(is_extreme(&det));
    }

    #[test]
    fn exchangeability() {
        let w = check_local_exchangeability(&standard_pr_box()).unwrap().unwrap();
        assert!(w.alice.is_identity() && w.bob.is_identity());
        for k in 2..=5 {
            let b = pr_box_k(k, k, k).unwrap();
            let w = check_local_exchangeability(&b).unwrap().unwrap();
            let out = apply_relabeling(&apply_relabeling(&b, &w.alice).unwrap(), &w.bob).unwrap();
            assert_eq!(out, swap_parties(&b));
        }
    }

    #[test]
    fn signalling_table_rejected_before_search() {
        // Bob's outcome copies Alice's setting
        let sig = BoxState::from_fn((2, 2), (2, 2), |a, b, x, _| if a == 0 && b == x { r(1, 1) } else { r(0, 1) }).unwrap();
        assert!(matches!(check_local_exchangeability(&sig), Err(BoxError::Signalling(_))));
    }

    #[test]
    fn rejects_bad_tables() {
        assert!(matches!(
            BoxState::new((1, 1), (2, 1), vec![r(1, 2), r(1, 3)]),
            Err(BoxError::NotNormalized { .. })
        ));
        assert!(matches!(
            BoxState::new((1, 1), (2, 1), vec![r(3, 2), r(-1, 2)]),
            Err(BoxError::Negative { .. })
        ));
    }

    #[test]
    fn json_round_trip() {
        let b = pr_box_k(3, 3, 4).unwrap();
        let text = serde_json::to_string(&b).unwrap();
        assert!(text.contains("\"1/3\""));
        let back: BoxState = serde_json::from_str(&text).unwrap();
        assert_eq!(back, b);
    }
}
