//! Purity monotones: f-purities, measurement entropy, operational-norm
//! distance from the invariant state and the group-invariant 2-norm.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gpt::{GptError, GptState, TheorySystem};
use crate::lp::{self, LpError, LpOptions, LpOutcome};
use crate::mixedness::{invariant_state, MixednessError};
use crate::quantum::{cmat_to_rows, shannon_bits, ComplexPair, DensityMatrix, QuantumError};
use crate::sampling;

/// Coefficients allowed when scaling extremal effects into measurement
/// outcomes.
pub const GRID: [f64; 7] = [0.0, 0.25, 1.0 / 3.0, 0.5, 2.0 / 3.0, 0.75, 1.0];

/// Default cap on coefficient vectors visited during enumeration.
pub const DEFAULT_ENUMERATION_BOUND: usize = 2_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MonotoneError {
    #[error("enumeration bound reached; best value so far is {}", best.value)]
    Partial {
        best: Box<MonotoneReport>,
        /// Whether `best.value` bounds the exact value from below.
        lower_bound: bool,
    },
    #[error("no measurement can be assembled from the extremal effects")]
    NoMeasurements,
    #[error("state is not normalized")]
    NotNormalized,
    #[error("state belongs to a different system")]
    SystemMismatch,
    #[error("unsupported system: {0}")]
    Unsupported(String),
    #[error("linear program failed: {0}")]
    Solver(#[from] LpError),
    #[error(transparent)]
    Gpt(#[from] GptError),
    #[error(transparent)]
    Mixedness(#[from] MixednessError),
    #[error(transparent)]
    Quantum(#[from] QuantumError),
}

pub type Result<T> = std::result::Result<T, MonotoneError>;

/// A convex function on `[0, 1]` used to build an f-purity.
#[derive(Clone)]
pub enum ConvexScalarFn {
    /// `x log₂ x` with `0 log 0 = 0`.
    XLogX,
    Square,
    Custom {
        name: String,
        f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
        /// Declared convexity; see [`ConvexScalarFn::check_convexity`].
        convex: bool,
    },
}

impl fmt::Debug for ConvexScalarFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl PartialEq for ConvexScalarFn {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Self::XLogX, Self::XLogX) | (Self::Square, Self::Square) => true,
            (Self::Custom { f: a, .. }, Self::Custom { f: b, .. }) => Arc::ptr_eq(a, b),
            _ => false,
        }
    }
}

impl ConvexScalarFn {
    pub fn custom(name: impl Into<String>, convex: bool, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self::Custom {
            name: name.into(),
            f: Arc::new(f),
            convex,
        }
    }

    pub fn name(&self) -> String {
        match self {
            Self::XLogX => "xlogx".into(),
            Self::Square => "square".into(),
            Self::Custom { name, .. } => name.clone(),
        }
    }

    pub fn is_declared_convex(&self) -> bool {
        match self {
            Self::Custom { convex, .. } => *convex,
            _ => true,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Self::XLogX => {
                if x <= 0.0 {
                    0.0
                } else {
                    x * x.log2()
                }
            }
            Self::Square => x * x,
            Self::Custom { f, .. } => f(x),
        }
    }

    /// Random midpoint test `f((x+y)/2) ≤ (f(x)+f(y))/2 + tol` on `[0, 1]`.
    pub fn check_convexity(&self, samples: usize, seed: u64) -> bool {
        let mut rng = sampling::rng(seed, 0);
        (0..samples).all(|_| {
            let x: f64 = rng.random();
            let y: f64 = rng.random();
            self.eval(0.5 * (x + y)) <= 0.5 * (self.eval(x) + self.eval(y)) + 1e-12
        })
    }
}

/// What attains the optimum of a monotone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// Outcome effects and their probabilities on the state.
    Measurement {
        effects: Vec<Vec<f64>>,
        probabilities: Vec<f64>,
    },
    /// Effects maximizing and minimizing `a(ρ − χ)`.
    EffectPair {
        max_effect: Vec<f64>,
        min_effect: Vec<f64>,
        invariant_state: Vec<f64>,
    },
    /// Projective measurement on the eigenbasis.
    Eigenbasis {
        probabilities: Vec<f64>,
        vectors: Vec<Vec<ComplexPair>>,
    },
    /// Group-averaged quadratic form `M` with value `ρᵀ M ρ`.
    QuadraticForm { form: Vec<Vec<f64>> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotoneReport {
    pub name: String,
    pub value: f64,
    pub witness: Witness,
}

/// Enumerated measurements of a system, built from its ray-extremal effects
/// scaled by [`GRID`] coefficients and summing to the unit effect.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementSet {
    pub effects: Vec<DVector<f64>>,
    /// Outcome effects of each measurement.
    pub measurements: Vec<Vec<DVector<f64>>>,
    /// Set when the coefficient search stopped at the bound.
    pub truncated: bool,
    system_name: String,
}

/// Extremal effects that are not zero, not the unit effect and not in the
/// cone generated by the other listed effects.
pub fn ray_extremal_effects(sys: &TheorySystem) -> Result<Vec<DVector<f64>>> {
    let mut candidates: Vec<DVector<f64>> = Vec::new();
    for e in &sys.extremal_effects {
        if e.amax() <= 1e-12 || (e - &sys.unit_effect).amax() <= 1e-12 {
            continue;
        }
        if !candidates.iter().any(|c| (c - e).amax() <= 1e-12) {
            candidates.push(e.clone());
        }
    }
    let mut keep = Vec::new();
    for (i, e) in candidates.iter().enumerate() {
        let others: Vec<&DVector<f64>> = candidates.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, c)| c).collect();
        if others.is_empty() {
            keep.push(e.clone());
            continue;
        }
        let a = DMatrix::from_fn(sys.dim, others.len(), |r, c| others[c][r]);
        if lp::find_feasible(&a, e, &LpOptions::default())?.is_none() {
            keep.push(e.clone());
        }
    }
    Ok(keep)
}

impl MeasurementSet {
    pub fn enumerate(sys: &TheorySystem) -> Result<Self> {
        Self::enumerate_bounded(sys, DEFAULT_ENUMERATION_BOUND)
    }

    /// Visits coefficient vectors in odometer order, at most `bound` of them.
    pub fn enumerate_bounded(sys: &TheorySystem, bound: usize) -> Result<Self> {
        let effects = ray_extremal_effects(sys)?;
        let k = effects.len();
        let mut measurements = Vec::new();
        let mut idx = vec![0usize; k];
        let mut visited = 0usize;
        let mut truncated = false;
        loop {
            if visited >= bound {
                truncated = true;
                break;
            }
            visited += 1;
            let mut total = DVector::zeros(sys.dim);
            for (e, &g) in effects.iter().zip(&idx) {
                if g > 0 {
                    total += e * GRID[g];
                }
            }
            if (total - &sys.unit_effect).amax() <= 1e-9 {
                measurements.push(
                    effects
                        .iter()
                        .zip(&idx)
                        .filter(|(_, &g)| g > 0)
                        .map(|(e, &g)| e * GRID[g])
                        .collect(),
                );
            }
            // odometer increment, last position fastest
            let mut pos = k;
            loop {
                if pos == 0 {
                    break;
                }
                pos -= 1;
                idx[pos] += 1;
                if idx[pos] < GRID.len() {
                    break;
                }
                idx[pos] = 0;
                if pos == 0 {
                    pos = usize::MAX;
                    break;
                }
            }
            if pos == usize::MAX || k == 0 {
                break;
            }
        }
        if measurements.is_empty() && !truncated {
            return Err(MonotoneError::NoMeasurements);
        }
        Ok(Self {
            effects,
            measurements,
            truncated,
            system_name: sys.name.clone(),
        })
    }
}

fn check_state(rho: &GptState<'_>, set: &MeasurementSet) -> Result<()> {
    if rho.system.name != set.system_name {
        return Err(MonotoneError::SystemMismatch);
    }
    if !rho.is_normalized() {
        return Err(MonotoneError::NotNormalized);
    }
    Ok(())
}

fn probabilities(m: &[DVector<f64>], rho: &GptState<'_>) -> Vec<f64> {
    m.iter().map(|e| e.dot(&rho.vec).clamp(0.0, 1.0)).collect()
}

fn best_measurement(
    rho: &GptState<'_>,
    set: &MeasurementSet,
    score: impl Fn(&[f64]) -> f64,
) -> Option<(f64, usize, Vec<f64>)> {
    let mut best: Option<(f64, usize, Vec<f64>)> = None;
    for (i, m) in set.measurements.iter().enumerate() {
        let p = probabilities(m, rho);
        let s = score(&p);
        if best.as_ref().is_none_or(|b| s > b.0 + 1e-15) {
            best = Some((s, i, p));
        }
    }
    best
}

fn measurement_witness(set: &MeasurementSet, i: usize, p: Vec<f64>) -> Witness {
    Witness::Measurement {
        effects: set.measurements[i].iter().map(|e| e.iter().copied().collect()).collect(),
        probabilities: p,
    }
}

/// `max_M Σ_x f(p_x)` over the enumerated measurements.
pub fn f_purity(rho: &GptState<'_>, f: &ConvexScalarFn, set: &MeasurementSet) -> Result<MonotoneReport> {
    check_state(rho, set)?;
    let Some((value, i, p)) = best_measurement(rho, set, |p| p.iter().map(|x| f.eval(*x)).sum()) else {
        return Err(MonotoneError::NoMeasurements);
    };
    let report = MonotoneReport {
        name: format!("{}-purity", f.name()),
        value,
        witness: measurement_witness(set, i, p),
    };
    if set.truncated {
        return Err(MonotoneError::Partial {
            best: Box::new(report),
            lower_bound: true,
        });
    }
    Ok(report)
}

/// Smallest Shannon entropy (bits) of an enumerated measurement.
pub fn measurement_entropy(rho: &GptState<'_>, set: &MeasurementSet) -> Result<MonotoneReport> {
    check_state(rho, set)?;
    let Some((neg, i, p)) = best_measurement(rho, set, |p| -shannon_bits(p)) else {
        return Err(MonotoneError::NoMeasurements);
    };
    let report = MonotoneReport {
        name: "measurement-entropy".into(),
        value: -neg,
        witness: measurement_witness(set, i, p),
    };
    if set.truncated {
        return Err(MonotoneError::Partial {
            best: Box::new(report),
            lower_bound: false,
        });
    }
    Ok(report)
}

/// Shannon entropy of the spectrum, attained by the eigenbasis measurement.
pub fn measurement_entropy_quantum(rho: &DensityMatrix) -> Result<MonotoneReport> {
    rho.require_normalized()?;
    let e = rho.eigh();
    let p: Vec<f64> = e.values.iter().map(|x| x.max(0.0)).collect();
    Ok(MonotoneReport {
        name: "measurement-entropy".into(),
        value: shannon_bits(&p),
        witness: Witness::Eigenbasis {
            probabilities: p,
            vectors: cmat_to_rows(&e.vectors.transpose()),
        },
    })
}

/// Maximize (or minimize) `a·δ` over effects `0 ≤ a·v ≤ 1` on all vertices.
fn effect_extremum(sys: &TheorySystem, delta: &DVector<f64>, maximize: bool) -> Result<(f64, DVector<f64>)> {
    let (d, nv) = (sys.dim, sys.pure_states.len());
    // variables: a⁺ (d), a⁻ (d), t (nv) with a·v = t, s (nv) with t + s = 1
    let cols = 2 * d + 2 * nv;
    let mut a = DMatrix::<f64>::zeros(2 * nv, cols);
    let mut b = DVector::<f64>::zeros(2 * nv);
    for (r, v) in sys.pure_states.iter().enumerate() {
        for k in 0..d {
            a[(r, k)] = v[k];
            a[(r, d + k)] = -v[k];
        }
        a[(r, 2 * d + r)] = -1.0;
        a[(nv + r, 2 * d + r)] = 1.0;
        a[(nv + r, 2 * d + nv + r)] = 1.0;
        b[nv + r] = 1.0;
    }
    let sign = if maximize { -1.0 } else { 1.0 };
    let mut c = DVector::<f64>::zeros(cols);
    for k in 0..d {
        c[k] = sign * delta[k];
        c[d + k] = -sign * delta[k];
    }
    match lp::solve(&a, &b, &c, &LpOptions::default())? {
        LpOutcome::Optimal { x, objective } => {
            let eff = DVector::from_fn(d, |k, _| x[k] - x[d + k]);
            Ok((sign * objective, eff))
        }
        LpOutcome::Unbounded => Err(MonotoneError::Unsupported(
            "vertices do not span the state space, effects are unbounded".into(),
        )),
        LpOutcome::Infeasible { .. } => unreachable!("zero effect is feasible"),
    }
}

/// `½ [max_a a(ρ − χ) − min_a a(ρ − χ)]` with `χ` the invariant state.
pub fn op_norm_distance(rho: &GptState<'_>) -> Result<MonotoneReport> {
    let chi = invariant_state(rho.system)?;
    let delta = &rho.vec - &chi.vec;
    let (hi, a_hi) = effect_extremum(rho.system, &delta, true)?;
    let (lo, a_lo) = effect_extremum(rho.system, &delta, false)?;
    Ok(MonotoneReport {
        name: "op-norm-distance".into(),
        value: 0.5 * (hi - lo),
        witness: Witness::EffectPair {
            max_effect: a_hi.iter().copied().collect(),
            min_effect: a_lo.iter().copied().collect(),
            invariant_state: chi.vec.iter().copied().collect(),
        },
    })
}

/// Group-averaged form `M = |G|⁻¹ Σ_U UᵀU`, in which every group element is
/// orthogonal.
#[derive(Debug, Clone, PartialEq)]
pub struct InvariantForm {
    pub form: DMatrix<f64>,
}

impl InvariantForm {
    pub fn new(sys: &TheorySystem) -> Result<Self> {
        if sys.group.is_empty() {
            return Err(MonotoneError::Unsupported("system has no group".into()));
        }
        let mut form = DMatrix::<f64>::zeros(sys.dim, sys.dim);
        for u in &sys.group {
            form += u.transpose() * u;
        }
        form /= sys.group.len() as f64;
        let chol = form.clone().cholesky();
        match chol {
            Some(l) if l.l().diagonal().iter().all(|x| *x > 1e-10) => Ok(Self { form }),
            _ => Err(MonotoneError::Unsupported(
                "averaged quadratic form is degenerate".into(),
            )),
        }
    }

    pub fn value(&self, v: &DVector<f64>) -> f64 {
        v.dot(&(&self.form * v))
    }
}

/// Squared norm of the state in the group-invariant inner product.
pub fn purity_2norm(rho: &GptState<'_>, form: &InvariantForm) -> MonotoneReport {
    MonotoneReport {
        name: "2-norm-purity".into(),
        value: form.value(&rho.vec),
        witness: Witness::QuadraticForm {
            form: form.form.row_iter().map(|r| r.iter().copied().collect()).collect(),
        },
    }
}

/// `Tr ρ²`.
pub fn purity_2norm_quantum(rho: &DensityMatrix) -> f64 {
    rho.purity()
}

/// A purity monotone that can be evaluated on states of a fixed system.
#[derive(Debug, Clone)]
pub enum BuiltinMonotone {
    FPurity(ConvexScalarFn),
    /// `−H_min`, the negative measurement entropy.
    NegEntropy,
    OpNorm,
    TwoNorm,
}

impl BuiltinMonotone {
    pub fn name(&self) -> String {
        match self {
            Self::FPurity(f) => format!("{}-purity", f.name()),
            Self::NegEntropy => "neg-entropy".into(),
            Self::OpNorm => "op-norm-distance".into(),
            Self::TwoNorm => "2-norm-purity".into(),
        }
    }
}

/// Caches the system-dependent data of the built-in monotones.
#[derive(Debug, Clone)]
pub struct MonotoneContext<'s> {
    pub system: &'s TheorySystem,
    pub measurements: MeasurementSet,
    form: Option<InvariantForm>,
}

impl<'s> MonotoneContext<'s> {
    pub fn new(system: &'s TheorySystem) -> Result<Self> {
        Ok(Self {
            system,
            measurements: MeasurementSet::enumerate(system)?,
            form: InvariantForm::new(system).ok(),
        })
    }

    pub fn evaluate(&self, p: &BuiltinMonotone, rho: &GptState<'_>) -> Result<MonotoneReport> {
        match p {
            BuiltinMonotone::FPurity(f) => f_purity(rho, f, &self.measurements),
            BuiltinMonotone::NegEntropy => measurement_entropy(rho, &self.measurements).map(|mut r| {
                r.value = -r.value;
                r.name = "neg-entropy".into();
                r
            }),
            BuiltinMonotone::OpNorm => op_norm_distance(rho),
            BuiltinMonotone::TwoNorm => match &self.form {
                Some(form) => Ok(purity_2norm(rho, form)),
                None => Err(MonotoneError::Unsupported(
                    "averaged quadratic form is degenerate".into(),
                )),
            },
        }
    }
}

/// A sampled pair where the monotone increased under a RaRe channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchurViolation {
    pub trial: usize,
    pub rho: Vec<f64>,
    pub sigma: Vec<f64>,
    pub value_rho: f64,
    pub value_sigma: f64,
    /// `(weight, group index)` pairs of the channel.
    pub channel: Vec<(f64, usize)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchurReport {
    pub trials: usize,
    pub violations: Vec<SchurViolation>,
    /// Largest `P(σ) − P(ρ)` seen.
    pub max_increase: f64,
}

fn dirichlet<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| Exp1.sample(rng)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / total).collect()
}

/// Random mixture of the vertices of a system.
pub fn random_gpt_state<R: Rng + ?Sized>(rng: &mut R, sys: &TheorySystem) -> DVector<f64> {
    let w = dirichlet(rng, sys.pure_states.len());
    let mut v = DVector::zeros(sys.dim);
    for (wi, s) in w.iter().zip(&sys.pure_states) {
        v += s * *wi;
    }
    v
}

/// Random RaRe channel on up to four group elements.
pub fn random_rare<R: Rng + ?Sized>(rng: &mut R, sys: &TheorySystem) -> Vec<(f64, usize)> {
    let k = rng.random_range(1..=sys.group.len().min(4));
    let w = dirichlet(rng, k);
    w.into_iter()
        .map(|wi| (wi, rng.random_range(0..sys.group.len())))
        .collect()
}

/// Samples `ρ` and `σ = Σ w_i U_i ρ` and records every pair where
/// `P(σ) > P(ρ) + 1e-9`.
pub fn schur_convexity_check<F>(p: F, sys: &TheorySystem, trials: usize, seed: u64) -> Result<SchurReport>
where
    F: Fn(&GptState<'_>) -> Result<f64> + Sync,
{
    let outcomes: Vec<Result<(f64, Option<SchurViolation>)>> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = sampling::rng(seed, trial as u64);
            let rho = random_gpt_state(&mut rng, sys);
            let channel = random_rare(&mut rng, sys);
            let mut sigma = DVector::zeros(sys.dim);
            for (w, g) in &channel {
                sigma += &sys.group[*g] * &rho * *w;
            }
            let vr = p(&GptState::new(sys, rho.clone())?)?;
            let vs = p(&GptState::new(sys, sigma.clone())?)?;
            let violation = (vs > vr + 1e-9).then(|| SchurViolation {
                trial,
                rho: rho.iter().copied().collect(),
                sigma: sigma.iter().copied().collect(),
                value_rho: vr,
                value_sigma: vs,
                channel: channel.clone(),
            });
            Ok((vs - vr, violation))
        })
        .collect();
    let mut violations = Vec::new();
    let mut max_increase = f64::NEG_INFINITY;
    for o in outcomes {
        let (inc, v) = o?;
        max_increase = max_increase.max(inc);
        violations.extend(v);
    }
    Ok(SchurReport {
        trials,
        violations,
        max_increase,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gpt::{make_classical, make_square_bit};

    fn st<'s>(sys: &'s TheorySystem, v: &[f64]) -> GptState<'s> {
        sys.state_from_slice(v).unwrap()
    }

    #[test]
    fn classical_square_purity() {
        let sys = make_classical(3).unwrap();
        let set = MeasurementSet::enumerate(&sys).unwrap();
        assert_eq!(set.measurements.len(), 1);
        let r = f_purity(&st(&sys, &[0.5, 0.3, 0.2]), &ConvexScalarFn::Square, &set).unwrap();
        assert!((r.value - 0.38).abs() < 1e-12);
    }

    #[test]
    fn square_bit_center_entropy() {
        let sys = make_square_bit();
        let set = MeasurementSet::enumerate(&sys).unwrap();
        assert_eq!(set.effects.len(), 4);
        let center = st(&sys, &[0.0, 0.0, 1.0]);
        let h = measurement_entropy(&center, &set).unwrap();
        assert!((h.value - 1.0).abs() < 1e-9);
        let f = f_purity(&center, &ConvexScalarFn::XLogX, &set).unwrap();
        assert!((f.value + 1.0).abs() < 1e-9);
    }

    #[test]
    fn pure_state_square_purity_is_one() {
        let sys = make_square_bit();
        let set = MeasurementSet::enumerate(&sys).unwrap();
        let r = f_purity(&st(&sys, &[1.0, -1.0, 1.0]), &ConvexScalarFn::Square, &set).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);
        // the witness reproduces the value
        let Witness::Measurement { effects, .. } = &r.witness else { panic!() };
        let v: f64 = effects
            .iter()
            .map(|e| (e[0] - e[1] + e[2]).powi(2))
            .sum();
        assert!((v - r.value).abs() < 1e-10);
    }

    #[test]
    fn quantum_entropy() {
        let r = measurement_entropy_quantum(&DensityMatrix::maximally_mixed(2)).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);
        let r = measurement_entropy_quantum(&DensityMatrix::from_diagonal(&[1.0, 0.0, 0.0]).unwrap()).unwrap();
        assert!(r.value.abs() < 1e-12);
        // diagonal states agree with the classical computation
        let p = [0.5, 0.3, 0.2];
        let q = measurement_entropy_quantum(&DensityMatrix::from_diagonal(&p).unwrap()).unwrap();
        let sys = make_classical(3).unwrap();
        let set = MeasurementSet::enumerate(&sys).unwrap();
        let c = measurement_entropy(&st(&sys, &p), &set).unwrap();
        assert!((q.value - c.value).abs() < 1e-12);
    }

    #[test]
    fn op_norm_examples() {
        let sys = make_classical(2).unwrap();
        let r = op_norm_distance(&st(&sys, &[1.0, 0.0])).unwrap();
        assert!((r.value - 0.5).abs() < 1e-9);
        let r = op_norm_distance(&st(&sys, &[0.75, 0.25])).unwrap();
        assert!((r.value - 0.25).abs() < 1e-9);
        let r = op_norm_distance(&st(&sys, &[0.5, 0.5])).unwrap();
        assert!(r.value.abs() < 1e-12);
        let sq = make_square_bit();
        let r = op_norm_distance(&st(&sq, &[0.0, 0.0, 1.0])).unwrap();
        assert!(r.value.abs() < 1e-12);
    }

    #[test]
    fn two_norm_examples() {
        let sys = make_classical(2).unwrap();
        let form = InvariantForm::new(&sys).unwrap();
        assert!((purity_2norm(&st(&sys, &[0.7, 0.3]), &form).value - 0.58).abs() < 1e-12);
        assert!((purity_2norm_quantum(&DensityMatrix::maximally_mixed(2)) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn truncated_enumeration_reports_partial() {
        let sys = make_classical(3).unwrap();
        let set = MeasurementSet::enumerate_bounded(&sys, 10).unwrap();
        assert!(set.truncated);
        let err = f_purity(&st(&sys, &[0.5, 0.3, 0.2]), &ConvexScalarFn::Square, &set);
        assert!(matches!(err, Err(MonotoneError::Partial { lower_bound: true, .. }) | Err(MonotoneError::NoMeasurements)));
    }

    #[test]
    fn schur_checks() {
        let sys = make_classical(3).unwrap();
        let form = InvariantForm::new(&sys).unwrap();
        let rep = schur_convexity_check(|r| Ok(purity_2norm(r, &form).value), &sys, 1000, 7).unwrap();
        assert!(rep.violations.is_empty());
        let set = MeasurementSet::enumerate(&sys).unwrap();
        let rep = schur_convexity_check(|r| Ok(-measurement_entropy(r, &set)?.value), &sys, 500, 7).unwrap();
        assert!(rep.violations.is_empty());
        let wiggly = ConvexScalarFn::custom("sin10x", false, |x| (10.0 * x).sin());
        assert!(!wiggly.check_convexity(1000, 0));
        let rep = schur_convexity_check(|r| Ok(f_purity(r, &wiggly, &set)?.value), &sys, 500, 7).unwrap();
        assert!(!rep.violations.is_empty());
    }

    #[test]
    fn builtin_functions_are_convex() {
        assert!(ConvexScalarFn::XLogX.check_convexity(10_000, 1));
        assert!(ConvexScalarFn::Square.check_convexity(10_000, 1));
    }
}
