//! Finite general probabilistic theory (GPT) systems.
//!
//! A system is described by a real vector space of dimension `dim`, the
//! vertices of its normalized state polytope, the unit (deterministic)
//! effect, a list of extremal effects, and a finite group of reversible
//! transformations given as explicit matrices. States carry an explicit
//! normalization coordinate so that channels are plain matrices and the
//! unit effect is a covector.

use std::collections::HashMap;
use std::fmt;

use itertools::Itertools;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mixedness::{feasible_convex_combination, FeasibilityStatus};

/// Absolute tolerance for polytope and group identities.
pub const TOL: f64 = 1e-9;

/// Largest `n` accepted by [`make_classical`] (|S_n| = n!).
pub const MAX_CLASSICAL: usize = 6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GptError {
    #[error("dimension mismatch in `{field}`: expected {expected}, got {got}")]
    DimensionMismatch {
        field: String,
        expected: usize,
        got: usize,
    },
    #[error("classical system of size {0} exceeds the supported maximum of {MAX_CLASSICAL}")]
    Capacity(usize),
    #[error("system must have positive dimension")]
    EmptySystem,
    #[error("state norm {0} lies outside [0, 1]")]
    NormOutOfRange(f64),
    #[error("effect evaluates to {value} on vertex {vertex}")]
    EffectOutOfRange { vertex: usize, value: f64 },
    #[error("measurement effects sum to the unit effect only up to residual {0:.3e}")]
    IncompleteMeasurement(f64),
    #[error("channel does not preserve the unit effect (residual {0:.3e})")]
    NotNormalizationPreserving(f64),
    #[error("channel maps vertex {0} outside the output state space")]
    LeavesStateSpace(usize),
    #[error("instrument branch {branch} maps a vertex to norm {norm}")]
    BranchOutOfRange { branch: usize, norm: f64 },
    #[error("states belong to different systems")]
    SystemMismatch,
    #[error("system fails validation: {0}")]
    Invalid(ValidationReport),
    #[error("malformed theory file: {0}")]
    Parse(String),
    #[error(transparent)]
    Solver(#[from] crate::lp::LpError),
}

pub type Result<T> = std::result::Result<T, GptError>;

/// A finite GPT system.
#[derive(Debug, Clone, PartialEq)]
pub struct TheorySystem {
    pub name: String,
    pub dim: usize,
    pub unit_effect: DVector<f64>,
    pub pure_states: Vec<DVector<f64>>,
    pub extremal_effects: Vec<DVector<f64>>,
    pub group: Vec<DMatrix<f64>>,
}

/// One violated system invariant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    /// `group[group_index]` sends `vertex` to a point that is not a vertex.
    VertexNotPermuted {
        group_index: usize,
        vertex: usize,
        residual: f64,
    },
    /// `unit_effect · group[group_index] ≠ unit_effect`.
    UnitEffectNotInvariant { group_index: usize, residual: f64 },
    /// `group[left] · group[right]` is not in the group.
    NotClosed { left: usize, right: usize },
    /// No element of the group inverts `group[group_index]`.
    MissingInverse { group_index: usize },
    /// An extremal effect leaves `[0, 1]` on a vertex.
    EffectOutOfRange {
        effect: usize,
        vertex: usize,
        value: f64,
    },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "valid");
        }
        write!(f, "{} violation(s)", self.violations.len())?;
        if let Some(first) = self.violations.first() {
            write!(f, ", first: {first:?}")?;
        }
        Ok(())
    }
}

fn quantize(m: &DMatrix<f64>) -> Vec<i64> {
    m.iter().map(|v| (v * 1e6).round() as i64).collect()
}

fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

/// Lookup table from group matrices to their index in the group list.
pub struct GroupTable<'a> {
    group: &'a [DMatrix<f64>],
    index: HashMap<Vec<i64>, usize>,
}

impl<'a> GroupTable<'a> {
    pub fn new(group: &'a [DMatrix<f64>]) -> Self {
        let mut index = HashMap::with_capacity(group.len());
        for (i, g) in group.iter().enumerate() {
            index.entry(quantize(g)).or_insert(i);
        }
        Self { group, index }
    }

    /// Index of the group element equal to `m` within [`TOL`], if any.
    pub fn find(&self, m: &DMatrix<f64>) -> Option<usize> {
        if let Some(&i) = self.index.get(&quantize(m)) {
            if max_abs_diff(&self.group[i], m) <= TOL {
                return Some(i);
            }
        }
        // rounding boundary: fall back to a scan
        self.group
            .iter()
            .position(|g| g.shape() == m.shape() && max_abs_diff(g, m) <= TOL)
    }
}

impl TheorySystem {
    /// Index of the vertex equal to `v` within [`TOL`], if any.
    pub fn find_vertex(&self, v: &DVector<f64>) -> Option<usize> {
        self.pure_states
            .iter()
            .position(|p| (p - v).amax() <= TOL)
    }

    pub fn identity_index(&self) -> Option<usize> {
        GroupTable::new(&self.group).find(&DMatrix::identity(self.dim, self.dim))
    }

    pub fn state(&self, vec: DVector<f64>) -> Result<GptState<'_>> {
        GptState::new(self, vec)
    }

    pub fn state_from_slice(&self, vec: &[f64]) -> Result<GptState<'_>> {
        GptState::new(self, DVector::from_column_slice(vec))
    }

    fn check_structure(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(GptError::EmptySystem);
        }
        let mismatch = |field: String, got: usize| GptError::DimensionMismatch {
            field,
            expected: self.dim,
            got,
        };
        if self.unit_effect.len() != self.dim {
            return Err(mismatch("unit_effect".into(), self.unit_effect.len()));
        }
        for (i, v) in self.pure_states.iter().enumerate() {
            if v.len() != self.dim {
                return Err(mismatch(format!("pure_states[{i}]"), v.len()));
            }
        }
        for (i, e) in self.extremal_effects.iter().enumerate() {
            if e.len() != self.dim {
                return Err(mismatch(format!("extremal_effects[{i}]"), e.len()));
            }
        }
        for (i, g) in self.group.iter().enumerate() {
            if g.nrows() != self.dim {
                return Err(mismatch(format!("group[{i}] rows"), g.nrows()));
            }
            if g.ncols() != self.dim {
                return Err(mismatch(format!("group[{i}] columns"), g.ncols()));
            }
        }
        Ok(())
    }
}

/// Check every [`TheorySystem`] invariant and report each violation.
///
/// Structural problems (mismatched lengths) are errors rather than report
/// entries since the remaining checks cannot run on them.
pub fn validate_system(sys: &TheorySystem) -> Result<ValidationReport> {
    sys.check_structure()?;
    let mut violations = Vec::new();

    for (gi, g) in sys.group.iter().enumerate() {
        let unit_residual = (g.tr_mul(&sys.unit_effect) - &sys.unit_effect).amax();
        if unit_residual > TOL {
            violations.push(Violation::UnitEffectNotInvariant {
                group_index: gi,
                residual: unit_residual,
            });
        }
        let mut hit = vec![false; sys.pure_states.len()];
        for (vi, v) in sys.pure_states.iter().enumerate() {
            let image = g * v;
            let nearest = sys
                .pure_states
                .iter()
                .enumerate()
                .map(|(j, p)| (j, (p - &image).amax()))
                .min_by(|a, b| a.1.total_cmp(&b.1));
            match nearest {
                Some((j, r)) if r <= TOL && !hit[j] => hit[j] = true,
                Some((_, r)) => violations.push(Violation::VertexNotPermuted {
                    group_index: gi,
                    vertex: vi,
                    residual: r,
                }),
                None => {}
            }
        }
    }

    let table = GroupTable::new(&sys.group);
    let identity = DMatrix::<f64>::identity(sys.dim, sys.dim);
    for (i, a) in sys.group.iter().enumerate() {
        for (j, b) in sys.group.iter().enumerate() {
            if table.find(&(a * b)).is_none() {
                violations.push(Violation::NotClosed { left: i, right: j });
            }
        }
        let has_inverse = sys
            .group
            .iter()
            .any(|b| max_abs_diff(&(a * b), &identity) <= TOL);
        if !has_inverse {
            violations.push(Violation::MissingInverse { group_index: i });
        }
    }

    for (ei, e) in sys.extremal_effects.iter().enumerate() {
        for (vi, v) in sys.pure_states.iter().enumerate() {
            let value = e.dot(v);
            if !(-TOL..=1.0 + TOL).contains(&value) {
                violations.push(Violation::EffectOutOfRange {
                    effect: ei,
                    vertex: vi,
                    value,
                });
            }
        }
    }
    Ok(ValidationReport { violations })
}

fn permutation_matrix(perm: &[usize]) -> DMatrix<f64> {
    // Π e_j = e_{π(j)}
    let n = perm.len();
    let mut m = DMatrix::zeros(n, n);
    for (j, &pj) in perm.iter().enumerate() {
        m[(pj, j)] = 1.0;
    }
    m
}

/// Classical probability theory on `n` outcomes with the full symmetric
/// group. Permutations are listed in lexicographic order (identity first).
pub fn make_classical(n: usize) -> Result<TheorySystem> {
    if n == 0 {
        return Err(GptError::EmptySystem);
    }
    if n > MAX_CLASSICAL {
        return Err(GptError::Capacity(n));
    }
    let basis = |i: usize| {
        let mut v = DVector::zeros(n);
        v[i] = 1.0;
        v
    };
    Ok(TheorySystem {
        name: format!("classical:{n}"),
        dim: n,
        unit_effect: DVector::from_element(n, 1.0),
        pure_states: (0..n).map(basis).collect(),
        extremal_effects: (0..n).map(basis).collect(),
        group: (0..n)
            .permutations(n)
            .map(|p| permutation_matrix(&p))
            .collect(),
    })
}

/// The square bit: a square of normalized states with its full dihedral
/// symmetry group. Coordinates are `(x, y, n)` where `n` is the norm.
///
/// Group order: identity, rotations by 90°, 180°, 270°, then the
/// reflections `x ↦ −x`, `y ↦ −y`, `x ↔ y` and `(x, y) ↦ (−y, −x)`.
pub fn make_square_bit() -> TheorySystem {
    let planar = |a: f64, b: f64, c: f64, d: f64| {
        DMatrix::from_row_slice(3, 3, &[a, b, 0.0, c, d, 0.0, 0.0, 0.0, 1.0])
    };
    let group = vec![
        planar(1.0, 0.0, 0.0, 1.0),
        planar(0.0, -1.0, 1.0, 0.0),
        planar(-1.0, 0.0, 0.0, -1.0),
        planar(0.0, 1.0, -1.0, 0.0),
        planar(-1.0, 0.0, 0.0, 1.0),
        planar(1.0, 0.0, 0.0, -1.0),
        planar(0.0, 1.0, 1.0, 0.0),
        planar(0.0, -1.0, -1.0, 0.0),
    ];
    let v = |x: f64, y: f64| DVector::from_vec(vec![x, y, 1.0]);
    let e = |a: f64, b: f64, c: f64| DVector::from_vec(vec![a, b, c]);
    TheorySystem {
        name: "square-bit".into(),
        dim: 3,
        unit_effect: e(0.0, 0.0, 1.0),
        pure_states: vec![v(1.0, 1.0), v(-1.0, 1.0), v(-1.0, -1.0), v(1.0, -1.0)],
        extremal_effects: vec![
            e(0.5, 0.0, 0.5),
            e(-0.5, 0.0, 0.5),
            e(0.0, 0.5, 0.5),
            e(0.0, -0.5, 0.5),
            e(0.0, 0.0, 0.0),
            e(0.0, 0.0, 1.0),
        ],
        group,
    }
}

/// A (possibly subnormalized) state of a system.
#[derive(Debug, Clone)]
pub struct GptState<'s> {
    pub system: &'s TheorySystem,
    pub vec: DVector<f64>,
}

impl<'s> GptState<'s> {
    pub fn new(system: &'s TheorySystem, vec: DVector<f64>) -> Result<Self> {
        if vec.len() != system.dim {
            return Err(GptError::DimensionMismatch {
                field: "state".into(),
                expected: system.dim,
                got: vec.len(),
            });
        }
        let norm = system.unit_effect.dot(&vec);
        if !(-TOL..=1.0 + TOL).contains(&norm) {
            return Err(GptError::NormOutOfRange(norm));
        }
        Ok(Self { system, vec })
    }

    pub fn norm(&self) -> f64 {
        self.system.unit_effect.dot(&self.vec)
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm() - 1.0).abs() <= TOL
    }

    /// Apply the group element with the given index.
    pub fn transformed(&self, group_index: usize) -> GptState<'s> {
        GptState {
            system: self.system,
            vec: &self.system.group[group_index] * &self.vec,
        }
    }

    /// Whether a normalized state lies in the convex hull of the vertices.
    pub fn in_state_space(&self) -> Result<bool> {
        if !self.is_normalized() {
            return Ok(false);
        }
        let cert = feasible_convex_combination(&self.system.pure_states, &self.vec)?;
        Ok(cert.status == FeasibilityStatus::Feasible)
    }

    pub fn same_system(&self, other: &GptState<'_>) -> bool {
        std::ptr::eq(self.system, other.system) || self.system == other.system
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Effect {
    pub covec: DVector<f64>,
}

impl Effect {
    pub fn new(system: &TheorySystem, covec: DVector<f64>) -> Result<Self> {
        if covec.len() != system.dim {
            return Err(GptError::DimensionMismatch {
                field: "effect".into(),
                expected: system.dim,
                got: covec.len(),
            });
        }
        for (vertex, v) in system.pure_states.iter().enumerate() {
            let value = covec.dot(v);
            if !(-TOL..=1.0 + TOL).contains(&value) {
                return Err(GptError::EffectOutOfRange { vertex, value });
            }
        }
        Ok(Self { covec })
    }

    pub fn evaluate(&self, state: &GptState<'_>) -> f64 {
        self.covec.dot(&state.vec)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Measurement {
    pub effects: Vec<Effect>,
}

impl Measurement {
    pub fn new(system: &TheorySystem, effects: Vec<Effect>) -> Result<Self> {
        let mut total = DVector::zeros(system.dim);
        for e in &effects {
            total += &e.covec;
        }
        let residual = (total - &system.unit_effect).amax();
        if residual > TOL {
            return Err(GptError::IncompleteMeasurement(residual));
        }
        Ok(Self { effects })
    }

    pub fn outcome_probabilities(&self, state: &GptState<'_>) -> Vec<f64> {
        self.effects.iter().map(|e| e.evaluate(state)).collect()
    }
}

/// A linear map between systems that preserves the unit effect and maps
/// the input state space into the output state space.
#[derive(Debug, Clone)]
pub struct GptChannel<'a> {
    pub input: &'a TheorySystem,
    pub output: &'a TheorySystem,
    pub matrix: DMatrix<f64>,
}

fn check_shape(matrix: &DMatrix<f64>, input: &TheorySystem, output: &TheorySystem) -> Result<()> {
    if matrix.ncols() != input.dim {
        return Err(GptError::DimensionMismatch {
            field: "channel columns".into(),
            expected: input.dim,
            got: matrix.ncols(),
        });
    }
    if matrix.nrows() != output.dim {
        return Err(GptError::DimensionMismatch {
            field: "channel rows".into(),
            expected: output.dim,
            got: matrix.nrows(),
        });
    }
    Ok(())
}

impl<'a> GptChannel<'a> {
    pub fn new(
        input: &'a TheorySystem,
        output: &'a TheorySystem,
        matrix: DMatrix<f64>,
    ) -> Result<Self> {
        check_shape(&matrix, input, output)?;
        let residual = (matrix.tr_mul(&output.unit_effect) - &input.unit_effect).amax();
        if residual > TOL {
            return Err(GptError::NotNormalizationPreserving(residual));
        }
        for (i, v) in input.pure_states.iter().enumerate() {
            let image = &matrix * v;
            let cert = feasible_convex_combination(&output.pure_states, &image)?;
            if cert.status != FeasibilityStatus::Feasible {
                return Err(GptError::LeavesStateSpace(i));
            }
        }
        Ok(Self {
            input,
            output,
            matrix,
        })
    }

    pub fn identity(system: &'a TheorySystem) -> Self {
        Self {
            input: system,
            output: system,
            matrix: DMatrix::identity(system.dim, system.dim),
        }
    }

    /// The reversible channel given by a group element.
    pub fn reversible(system: &'a TheorySystem, group_index: usize) -> Self {
        Self {
            input: system,
            output: system,
            matrix: system.group[group_index].clone(),
        }
    }
}

/// A test: a list of branches whose sum is a channel.
#[derive(Debug, Clone)]
pub struct Instrument<'a> {
    pub input: &'a TheorySystem,
    pub output: &'a TheorySystem,
    pub branches: Vec<DMatrix<f64>>,
}

impl<'a> Instrument<'a> {
    pub fn new(
        input: &'a TheorySystem,
        output: &'a TheorySystem,
        branches: Vec<DMatrix<f64>>,
    ) -> Result<Self> {
        for (bi, b) in branches.iter().enumerate() {
            check_shape(b, input, output)?;
            for v in &input.pure_states {
                let norm = output.unit_effect.dot(&(b * v));
                if !(-TOL..=1.0 + TOL).contains(&norm) {
                    return Err(GptError::BranchOutOfRange { branch: bi, norm });
                }
            }
        }
        let inst = Self {
            input,
            output,
            branches,
        };
        inst.coarse_grain()?;
        Ok(inst)
    }

    /// Sum of all branches, validated as a channel.
    pub fn coarse_grain(&self) -> Result<GptChannel<'a>> {
        let mut total = DMatrix::zeros(self.output.dim, self.input.dim);
        for b in &self.branches {
            total += b;
        }
        GptChannel::new(self.input, self.output, total)
    }
}

pub fn apply_channel<'a>(ch: &GptChannel<'a>, rho: &GptState<'_>) -> Result<GptState<'a>> {
    if rho.vec.len() != ch.input.dim {
        return Err(GptError::DimensionMismatch {
            field: "state".into(),
            expected: ch.input.dim,
            got: rho.vec.len(),
        });
    }
    if rho.system != ch.input {
        return Err(GptError::SystemMismatch);
    }
    Ok(GptState {
        system: ch.output,
        vec: &ch.matrix * &rho.vec,
    })
}

/// On-disk form of a theory definition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoryFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub dim: usize,
    pub unit_effect: Vec<f64>,
    pub pure_states: Vec<Vec<f64>>,
    pub extremal_effects: Vec<Vec<f64>>,
    /// Row-major matrices.
    pub group: Vec<Vec<Vec<f64>>>,
}

impl From<&TheorySystem> for TheoryFile {
    fn from(sys: &TheorySystem) -> Self {
        let rows = |m: &DMatrix<f64>| {
            (0..m.nrows())
                .map(|i| m.row(i).iter().copied().collect())
                .collect()
        };
        Self {
            name: Some(sys.name.clone()),
            dim: sys.dim,
            unit_effect: sys.unit_effect.iter().copied().collect(),
            pure_states: sys.pure_states.iter().map(|v| v.iter().copied().collect()).collect(),
            extremal_effects: sys
                .extremal_effects
                .iter()
                .map(|v| v.iter().copied().collect())
                .collect(),
            group: sys.group.iter().map(rows).collect(),
        }
    }
}

impl TheoryFile {
    /// Convert to a system without running the invariant checks.
    pub fn to_system(&self) -> Result<TheorySystem> {
        let mut group = Vec::with_capacity(self.group.len());
        for (i, m) in self.group.iter().enumerate() {
            let ncols = m.first().map_or(0, Vec::len);
            if let Some(bad) = m.iter().find(|r| r.len() != ncols) {
                return Err(GptError::DimensionMismatch {
                    field: format!("group[{i}] row length"),
                    expected: ncols,
                    got: bad.len(),
                });
            }
            let flat: Vec<f64> = m.iter().flatten().copied().collect();
            group.push(DMatrix::from_row_slice(m.len(), ncols, &flat));
        }
        let vecs = |vs: &[Vec<f64>]| vs.iter().map(|v| DVector::from_column_slice(v)).collect();
        Ok(TheorySystem {
            name: self.name.clone().unwrap_or_else(|| "custom".into()),
            dim: self.dim,
            unit_effect: DVector::from_column_slice(&self.unit_effect),
            pure_states: vecs(&self.pure_states),
            extremal_effects: vecs(&self.extremal_effects),
            group,
        })
    }
}

/// Parse a theory definition and reject it unless every invariant holds.
pub fn load_system(json: &str) -> Result<TheorySystem> {
    let file: TheoryFile =
        serde_json::from_str(json).map_err(|e| GptError::Parse(e.to_string()))?;
    let sys = file.to_system()?;
    let report = validate_system(&sys)?;
    if !report.is_valid() {
        return Err(GptError::Invalid(report));
    }
    Ok(sys)
}

pub fn to_json(sys: &TheorySystem) -> String {
    serde_json::to_string_pretty(&TheoryFile::from(sys)).expect("theory file serializes")
}
