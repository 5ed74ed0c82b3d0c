//! The resource theory of purity over finite GPT systems.
//!
//! A state `σ` is *more mixed* than `ρ` when `σ = Σ_i w_i U_i ρ` for some
//! probability vector `w` over the reversible group, i.e. when `σ` lies in
//! the convex hull of the group orbit of `ρ`. The relation is decided by a
//! phase-one linear program, and every positive verdict comes with explicit
//! weights (a random-reversible channel) that reproduce the target.

mod birkhoff;

pub use birkhoff::{
    birkhoff_decompose, birkhoff_rare_synthesis, doubly_stochastic_for, BirkhoffTerm, Permutation,
};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gpt::{GptError, GptState, TheorySystem, TOL};
use crate::lp::{self, LpError, LpOptions};

/// Reconstruction tolerance for feasibility witnesses.
pub const WITNESS_TOL: f64 = 1e-8;

/// Normalization tolerance for probability vectors.
pub const PROB_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MixednessError {
    #[error(transparent)]
    Solver(#[from] LpError),
    #[error(transparent)]
    Gpt(#[from] GptError),
    #[error("states belong to different systems")]
    SystemMismatch,
    #[error("state is not normalized (norm {0})")]
    NotNormalized(f64),
    #[error("vectors have different lengths ({0} and {1})")]
    LengthMismatch(usize, usize),
    #[error("not a probability vector: {0}")]
    NotProbability(String),
    #[error("majorization precondition fails: the first vector does not majorize the second")]
    NotMajorized,
    #[error("permutation synthesis supports length at most {max}, got {got}")]
    Capacity { max: usize, got: usize },
    #[error("system has no pure states")]
    NoPureStates,
    #[error("group average depends on the seed state (spread {0:.3e}); no unique invariant state")]
    NonUniqueInvariant(f64),
    #[error("group average is not invariant under element {0}")]
    NotInvariant(usize),
    #[error("vertex {0} cannot be mixed into the group average")]
    NotMaximum(usize),
    #[error("RaRe weights invalid: {0}")]
    InvalidWeights(String),
}

pub type Result<T> = std::result::Result<T, MixednessError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeasibilityStatus {
    Feasible,
    Infeasible,
}

/// Outcome of a convex-hull membership query.
///
/// When feasible, `weights` reproduce the target and `residual` is the
/// max-norm reconstruction error. When infeasible, `weights` is absent and
/// `residual` carries the phase-one objective (total constraint violation
/// of the best point found).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityCertificate {
    pub status: FeasibilityStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    pub residual: f64,
}

impl FeasibilityCertificate {
    pub fn is_feasible(&self) -> bool {
        self.status == FeasibilityStatus::Feasible
    }
}

/// Decide whether `target` lies in the convex hull of `generators`.
pub fn feasible_convex_combination(
    generators: &[DVector<f64>],
    target: &DVector<f64>,
) -> std::result::Result<FeasibilityCertificate, LpError> {
    let Some(first) = generators.first() else {
        return Err(LpError::NoGenerators);
    };
    let dim = first.len();
    if let Some(g) = generators.iter().find(|g| g.len() != dim) {
        return Err(LpError::Shape {
            rows: dim,
            cols: generators.len(),
            rhs: g.len(),
        });
    }
    if target.len() != dim {
        return Err(LpError::Shape {
            rows: dim,
            cols: generators.len(),
            rhs: target.len(),
        });
    }
    let k = generators.len();
    let mut a = DMatrix::<f64>::zeros(dim + 1, k);
    for (j, g) in generators.iter().enumerate() {
        a.view_mut((0, j), (dim, 1)).copy_from(g);
        a[(dim, j)] = 1.0;
    }
    let mut b = DVector::<f64>::zeros(dim + 1);
    b.rows_mut(0, dim).copy_from(target);
    b[dim] = 1.0;

    lp::condition_estimate(a.iter().chain(b.iter()).copied())?;
    // flush round-off debris so it cannot masquerade as tiny constraints
    let scale = a.amax().max(b.amax());
    let flush = |v: &mut f64| {
        if v.abs() < scale * 1e-14 {
            *v = 0.0;
        }
    };
    let (mut a_clean, mut b_clean) = (a.clone(), b.clone());
    a_clean.iter_mut().for_each(flush);
    b_clean.iter_mut().for_each(flush);

    let opts = LpOptions::default();
    let c = DVector::zeros(k);
    match lp::solve(&a_clean, &b_clean, &c, &opts)? {
        lp::LpOutcome::Optimal { x, .. } => {
            let residual = lp::residual(&a, &b, &x);
            if residual > WITNESS_TOL {
                return Err(LpError::InaccurateSolution {
                    residual,
                    tolerance: WITNESS_TOL,
                });
            }
            Ok(FeasibilityCertificate {
                status: FeasibilityStatus::Feasible,
                weights: Some(x.iter().copied().collect()),
                residual,
            })
        }
        lp::LpOutcome::Infeasible {
            phase_one_objective,
        } => Ok(FeasibilityCertificate {
            status: FeasibilityStatus::Infeasible,
            weights: None,
            residual: phase_one_objective,
        }),
        lp::LpOutcome::Unbounded => unreachable!("zero objective reported unbounded"),
    }
}

/// One term `w · U_g` of a random-reversible channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RaReTerm {
    pub weight: f64,
    pub group_index: usize,
}

/// A convex mixture of reversible transformations of one system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RaReChannel {
    pub terms: Vec<RaReTerm>,
}

impl RaReChannel {
    pub fn new(terms: Vec<RaReTerm>) -> Result<Self> {
        if terms.iter().any(|t| !(t.weight >= 0.0)) {
            return Err(MixednessError::InvalidWeights("negative weight".into()));
        }
        let total: f64 = terms.iter().map(|t| t.weight).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(MixednessError::InvalidWeights(format!(
                "weights sum to {total}"
            )));
        }
        Ok(Self { terms })
    }

    /// Keep the strictly positive weights of a feasible orbit certificate.
    pub fn from_certificate(cert: &FeasibilityCertificate) -> Option<Self> {
        let weights = cert.weights.as_ref()?;
        let total: f64 = weights.iter().sum();
        let terms = weights
            .iter()
            .enumerate()
            .filter(|(_, w)| **w > 0.0)
            .map(|(group_index, w)| RaReTerm {
                weight: w / total,
                group_index,
            })
            .collect();
        Some(Self { terms })
    }

    pub fn apply<'s>(&self, state: &GptState<'s>) -> GptState<'s> {
        let mut out = DVector::zeros(state.vec.len());
        for t in &self.terms {
            out += t.weight * (&state.system.group[t.group_index] * &state.vec);
        }
        GptState {
            system: state.system,
            vec: out,
        }
    }

    /// The channel as a single matrix `Σ w_i U_i`.
    pub fn matrix(&self, system: &TheorySystem) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(system.dim, system.dim);
        for t in &self.terms {
            m += t.weight * &system.group[t.group_index];
        }
        m
    }
}

fn check_pair(rho: &GptState<'_>, sigma: &GptState<'_>) -> Result<()> {
    if !rho.same_system(sigma) {
        return Err(MixednessError::SystemMismatch);
    }
    for s in [rho, sigma] {
        if !s.is_normalized() {
            return Err(MixednessError::NotNormalized(s.norm()));
        }
    }
    Ok(())
}

/// The group orbit `{U_i ρ}` in group order (duplicates kept).
pub fn orbit(rho: &GptState<'_>) -> Vec<DVector<f64>> {
    rho.system.group.iter().map(|g| g * &rho.vec).collect()
}

/// Is `sigma` more mixed than `rho`? Weights are indexed by group element.
pub fn more_mixed(rho: &GptState<'_>, sigma: &GptState<'_>) -> Result<FeasibilityCertificate> {
    check_pair(rho, sigma)?;
    Ok(feasible_convex_combination(&orbit(rho), &sigma.vec)?)
}

/// Result of a two-way mixedness comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EqualMixedness {
    pub equally_mixed: bool,
    /// Index of a group element `U` with `U ρ = σ`, when one exists.
    pub witness: Option<usize>,
}

/// Two-way comparison plus a search for a reversible witness.
///
/// When both directions are feasible but no single group element maps one
/// state to the other, the result is `equally_mixed = true` with no witness.
pub fn equally_mixed(rho: &GptState<'_>, sigma: &GptState<'_>) -> Result<EqualMixedness> {
    check_pair(rho, sigma)?;
    let forward = more_mixed(rho, sigma)?.is_feasible();
    let equal = forward && more_mixed(sigma, rho)?.is_feasible();
    let witness = if equal {
        rho.system
            .group
            .iter()
            .position(|g| (g * &rho.vec - &sigma.vec).amax() <= TOL)
    } else {
        None
    };
    Ok(EqualMixedness {
        equally_mixed: equal,
        witness,
    })
}

/// The unique state invariant under the whole group.
///
/// Computed as the group average of every vertex; the averages must agree,
/// the result must be fixed by each element, and every vertex must be
/// mixable into it.
pub fn invariant_state(sys: &TheorySystem) -> Result<GptState<'_>> {
    if sys.pure_states.is_empty() {
        return Err(MixednessError::NoPureStates);
    }
    let n = sys.group.len() as f64;
    let average = |v: &DVector<f64>| {
        sys.group
            .iter()
            .fold(DVector::zeros(sys.dim), |acc, g| acc + g * v)
            / n
    };
    let chi = average(&sys.pure_states[0]);
    let spread = sys
        .pure_states
        .iter()
        .map(|v| (average(v) - &chi).amax())
        .fold(0.0f64, f64::max);
    if spread > TOL {
        return Err(MixednessError::NonUniqueInvariant(spread));
    }
    for (i, g) in sys.group.iter().enumerate() {
        if (g * &chi - &chi).amax() > TOL {
            return Err(MixednessError::NotInvariant(i));
        }
    }
    let chi = GptState::new(sys, chi)?;
    for (i, v) in sys.pure_states.iter().enumerate() {
        let vertex = GptState::new(sys, v.clone())?;
        if !more_mixed(&vertex, &chi)?.is_feasible() {
            return Err(MixednessError::NotMaximum(i));
        }
    }
    Ok(chi)
}

/// Vertices of the convex hull of the group orbit of `rho`.
pub fn orbit_hull(rho: &GptState<'_>) -> Result<Vec<DVector<f64>>> {
    let mut points: Vec<DVector<f64>> = Vec::new();
    for p in orbit(rho) {
        if !points.iter().any(|q| (q - &p).amax() <= TOL) {
            points.push(p);
        }
    }
    if points.len() <= 2 {
        return Ok(points);
    }
    let mut vertices = Vec::with_capacity(points.len());
    for (i, p) in points.iter().enumerate() {
        let others: Vec<DVector<f64>> = points
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, q)| q.clone())
            .collect();
        if !feasible_convex_combination(&others, p)?.is_feasible() {
            vertices.push(p.clone());
        }
    }
    Ok(vertices)
}

pub(crate) fn check_probability(p: &[f64]) -> Result<()> {
    if p.iter().any(|x| !x.is_finite() || *x < -PROB_TOL) {
        return Err(MixednessError::NotProbability(format!(
            "negative or non-finite entry in {p:?}"
        )));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > PROB_TOL {
        return Err(MixednessError::NotProbability(format!("entries sum to {total}")));
    }
    Ok(())
}

/// Entries sorted in decreasing order; equal values keep index order.
pub fn sorted_desc(p: &[f64]) -> Vec<f64> {
    let mut v = p.to_vec();
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

/// Does `p` majorize `q`? Both must be probability vectors of equal length.
pub fn majorizes(p: &[f64], q: &[f64]) -> Result<bool> {
    if p.len() != q.len() {
        return Err(MixednessError::LengthMismatch(p.len(), q.len()));
    }
    check_probability(p)?;
    check_probability(q)?;
    Ok(majorizes_unchecked(p, q, PROB_TOL))
}

/// Partial-sum majorization test for vectors with equal totals. Shorter
/// vectors are padded with zeros.
pub fn majorizes_unchecked(p: &[f64], q: &[f64], tol: f64) -> bool {
    let n = p.len().max(q.len());
    let pad = |v: &[f64]| {
        let mut s = sorted_desc(v);
        s.resize(n, 0.0);
        s
    };
    let (ps, qs) = (pad(p), pad(q));
    let (mut sp, mut sq) = (0.0, 0.0);
    for k in 0..n {
        sp += ps[k];
        sq += qs[k];
        if sp < sq - tol {
            return false;
        }
    }
    (sp - sq).abs() <= tol
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gpt::{make_classical, make_square_bit};

    fn v(xs: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(xs)
    }

    #[test]
    fn midpoint_is_feasible() {
        let gens = [v(&[1.0, 0.0]), v(&[0.0, 1.0])];
        let cert = feasible_convex_combination(&gens, &v(&[0.5, 0.5])).unwrap();
        assert!(cert.is_feasible());
        let w = cert.weights.unwrap();
        assert!((w[0] - 0.5).abs() < 1e-12 && (w[1] - 0.5).abs() < 1e-12);
        assert!(cert.residual <= 1e-12);
    }

    #[test]
    fn off_segment_is_infeasible() {
        let gens = [v(&[1.0, 0.0]), v(&[0.0, 1.0])];
        let cert = feasible_convex_combination(&gens, &v(&[0.7, 0.5])).unwrap();
        assert_eq!(cert.status, FeasibilityStatus::Infeasible);
        assert!(cert.weights.is_none());
    }

    #[test]
    fn empty_generators_rejected() {
        assert_eq!(
            feasible_convex_combination(&[], &v(&[1.0])),
            Err(LpError::NoGenerators)
        );
    }

    #[test]
    fn ill_conditioned_generators_rejected() {
        let gens = [v(&[1e7, 0.0]), v(&[0.0, 1e-6])];
        assert!(matches!(
            feasible_convex_combination(&gens, &v(&[0.0, 0.0])),
            Err(LpError::IllConditioned { .. })
        ));
    }

    #[test]
    fn square_orbit_contains_center() {
        let sq = make_square_bit();
        let rho = sq.state_from_slice(&[0.5, 0.2, 1.0]).unwrap();
        let cert = feasible_convex_combination(&orbit(&rho), &v(&[0.0, 0.0, 1.0])).unwrap();
        assert!(cert.is_feasible());
    }

    #[test]
    fn classical_bit_mixing() {
        let bit = make_classical(2).unwrap();
        let rho = bit.state_from_slice(&[0.7, 0.3]).unwrap();
        let sigma = bit.state_from_slice(&[0.5, 0.5]).unwrap();
        let cert = more_mixed(&rho, &sigma).unwrap();
        let w = cert.weights.unwrap();
        assert!((w[0] - 0.5).abs() < 1e-12 && (w[1] - 0.5).abs() < 1e-12);
        assert!(!more_mixed(&sigma, &rho).unwrap().is_feasible());
    }

    #[test]
    fn rare_channel_from_certificate_reproduces_target() {
        let sq = make_square_bit();
        let rho = sq.state_from_slice(&[0.5, 0.2, 1.0]).unwrap();
        let sigma = sq.state_from_slice(&[0.1, -0.1, 1.0]).unwrap();
        let cert = more_mixed(&rho, &sigma).unwrap();
        let ch = RaReChannel::from_certificate(&cert).unwrap();
        assert!((ch.apply(&rho).vec - &sigma.vec).amax() < 1e-9);
        assert!(RaReChannel::new(ch.terms.clone()).is_ok());
    }

    #[test]
    fn rare_weights_validated() {
        let bad = vec![RaReTerm {
            weight: 0.6,
            group_index: 0,
        }];
        assert!(RaReChannel::new(bad).is_err());
    }

    #[test]
    fn vertices_are_maximally_controllable() {
        let sq = make_square_bit();
        let targets = [[0.3, -0.9], [-1.0, 0.2], [0.0, 0.0], [0.99, 0.99]];
        for vert in &sq.pure_states {
            let rho = GptState::new(&sq, vert.clone()).unwrap();
            for t in targets {
                let sigma = sq.state_from_slice(&[t[0], t[1], 1.0]).unwrap();
                assert!(more_mixed(&rho, &sigma).unwrap().is_feasible());
            }
        }
    }

    #[test]
    fn mismatched_systems_rejected() {
        let bit = make_classical(2).unwrap();
        let sq = make_square_bit();
        let a = bit.state_from_slice(&[0.5, 0.5]).unwrap();
        let b = sq.state_from_slice(&[0.0, 0.0, 1.0]).unwrap();
        assert_eq!(more_mixed(&a, &b), Err(MixednessError::SystemMismatch));
    }

    #[test]
    fn equally_mixed_examples() {
        let sq = make_square_bit();
        let rho = sq.state_from_slice(&[0.5, 0.2, 1.0]).unwrap();
        let refl = sq.state_from_slice(&[-0.5, 0.2, 1.0]).unwrap();
        let eq = equally_mixed(&rho, &refl).unwrap();
        assert!(eq.equally_mixed);
        assert_eq!(eq.witness, Some(4));

        let bit = make_classical(2).unwrap();
        let a = bit.state_from_slice(&[0.7, 0.3]).unwrap();
        let b = bit.state_from_slice(&[0.3, 0.7]).unwrap();
        let c = bit.state_from_slice(&[0.6, 0.4]).unwrap();
        assert_eq!(equally_mixed(&a, &b).unwrap().witness, Some(1));
        assert!(!equally_mixed(&a, &c).unwrap().equally_mixed);
    }

    #[test]
    fn invariant_states() {
        let sq = make_square_bit();
        let chi = invariant_state(&sq).unwrap();
        assert!((chi.vec - v(&[0.0, 0.0, 1.0])).amax() < 1e-12);
        for n in 1..=5 {
            let sys = make_classical(n).unwrap();
            let chi = invariant_state(&sys).unwrap();
            assert!((chi.vec - DVector::from_element(n, 1.0 / n as f64)).amax() < 1e-12);
        }
    }

    #[test]
    fn non_transitive_group_has_no_unique_invariant() {
        // trit with only the identity: every vertex is its own average
        let mut sys = make_classical(3).unwrap();
        sys.group.truncate(1);
        assert!(matches!(
            invariant_state(&sys),
            Err(MixednessError::NonUniqueInvariant(_))
        ));
    }

    #[test]
    fn orbit_hulls() {
        let sq = make_square_bit();
        let rho = sq.state_from_slice(&[0.5, 0.2, 1.0]).unwrap();
        assert_eq!(orbit_hull(&rho).unwrap().len(), 8);
        let center = sq.state_from_slice(&[0.0, 0.0, 1.0]).unwrap();
        assert_eq!(orbit_hull(&center).unwrap().len(), 1);
        let trit = make_classical(3).unwrap();
        let e0 = trit.state_from_slice(&[1.0, 0.0, 0.0]).unwrap();
        let hull = orbit_hull(&e0).unwrap();
        assert_eq!(hull.len(), 3);
        for i in 0..3 {
            assert!(hull.iter().any(|h| h == &trit.pure_states[i]));
        }
    }

    #[test]
    fn majorization_examples() {
        assert!(majorizes(&[0.7, 0.3], &[0.6, 0.4]).unwrap());
        assert!(majorizes(&[0.5, 0.3, 0.2], &[0.5, 0.3, 0.2]).unwrap());
        assert!(!majorizes(&[0.5, 0.5], &[0.7, 0.3]).unwrap());
        assert!(matches!(
            majorizes(&[0.5, 0.6], &[0.5, 0.5]),
            Err(MixednessError::NotProbability(_))
        ));
        assert!(matches!(
            majorizes(&[1.0], &[0.5, 0.5]),
            Err(MixednessError::LengthMismatch(1, 2))
        ));
    }

    #[test]
    fn incomparable_pair() {
        let p = [0.5, 0.26, 0.24];
        let q = [0.48, 0.48, 0.04];
        assert!(!majorizes(&p, &q).unwrap());
        assert!(!majorizes(&q, &p).unwrap());
        let trit = make_classical(3).unwrap();
        let a = trit.state_from_slice(&p).unwrap();
        let b = trit.state_from_slice(&q).unwrap();
        assert!(!more_mixed(&a, &b).unwrap().is_feasible());
        assert!(!more_mixed(&b, &a).unwrap().is_feasible());
    }
}
