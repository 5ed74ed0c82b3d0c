//! Finite-dimensional quantum backend.
//!
//! Bipartite pure states are stored as amplitude vectors in the product
//! basis `|i⟩_A ⊗ |j⟩_B ↦ i·d_B + j`, so the `d_A × d_B` coefficient matrix
//! `M[i][j]` is the amplitude of `|i j⟩`. With this convention
//! `(X ⊗ Y)|Ψ⟩` has coefficient matrix `X M Yᵀ`.

mod channels;
mod eof;
mod locc;
mod schmidt;

pub use channels::{
    catalytic_erasure_possible, local_exchange_channels, local_exchange_residual,
    rare_synthesis_quantum, CatalystCertificate, KrausChannel, QuantumRaRe, UnitaryTerm,
};
pub use eof::{entanglement_of_formation, pure_state_entanglement, EofBudget, EofResult};
pub use locc::{one_way_locc_from_rare, OneWayProtocol, ProtocolCheck};
pub use schmidt::{
    lu_equivalent, marginals, nielsen_convertible, purify, reconstruction_error, schmidt_decompose,
    squared_schmidt_coefficients, symmetric_purify, SchmidtData,
};

use std::cmp::Ordering;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mixedness::MixednessError;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Hermiticity, positivity and normalization tolerance for density matrices.
pub const STATE_TOL: f64 = 1e-10;

/// Schmidt coefficients and eigenvalues below this are treated as zero.
pub const RANK_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuantumError {
    #[error("matrix is {0}x{1}, expected square")]
    NotSquare(usize, usize),
    #[error("matrix is not Hermitian (deviation {0:.3e})")]
    NotHermitian(f64),
    #[error("matrix has negative eigenvalue {0:.3e}")]
    NotPositive(f64),
    #[error("trace {0} is outside [0, 1]")]
    TraceOutOfRange(f64),
    #[error("state is not normalized (trace or norm {0})")]
    NotNormalized(f64),
    #[error("amplitude vector has length {got}, expected {expected}")]
    Length { expected: usize, got: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("Kraus operators are not trace preserving (deviation {0:.3e})")]
    NotTracePreserving(f64),
    #[error("marginal spectra disagree (deviation {0:.3e})")]
    SpectrumMismatch(f64),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Mixedness(#[from] MixednessError),
    #[error("malformed input: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, QuantumError>;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Largest absolute entry of a complex matrix.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0f64, |acc, z| acc.max(z.norm()))
}

/// Spectral data of a Hermitian matrix, eigenvalues in decreasing order.
#[derive(Debug, Clone)]
pub struct Eigh {
    pub values: Vec<f64>,
    /// Eigenvectors as columns.
    pub vectors: CMatrix,
}

fn fix_phase(v: &mut CVector) {
    if let Some(z) = v.iter().find(|z| z.norm() > 1e-12).copied() {
        let phase = z.conj() / z.norm();
        v.iter_mut().for_each(|x| *x *= phase);
    }
}

fn lex_key(v: &CVector) -> Vec<(i64, i64)> {
    v.iter()
        .map(|z| ((z.re * 1e8).round() as i64, (z.im * 1e8).round() as i64))
        .collect()
}

/// Deterministic Hermitian eigendecomposition.
///
/// Eigenvalues are sorted decreasingly; within (numerically) degenerate
/// eigenvalues the vectors are ordered lexicographically by their rounded
/// components, after rotating each so its first nonzero entry is real
/// positive.
pub fn eigh(m: &CMatrix) -> Eigh {
    let herm = (m + m.adjoint()) * c(0.5, 0.0);
    let eig = herm.symmetric_eigen();
    let mut pairs: Vec<(f64, CVector)> = (0..eig.eigenvalues.len())
        .map(|k| {
            let mut v = eig.eigenvectors.column(k).clone_owned();
            fix_phase(&mut v);
            (eig.eigenvalues[k], v)
        })
        .collect();
    pairs.sort_by(|a, b| {
        if (a.0 - b.0).abs() <= 1e-12 {
            lex_key(&b.1).cmp(&lex_key(&a.1))
        } else {
            b.0.partial_cmp(&a.0).unwrap_or(Ordering::Equal)
        }
    });
    let n = m.nrows();
    let mut vectors = CMatrix::zeros(n, n);
    for (k, (_, v)) in pairs.iter().enumerate() {
        vectors.set_column(k, v);
    }
    Eigh {
        values: pairs.into_iter().map(|p| p.0).collect(),
        vectors,
    }
}

/// `Tr_B` of an operator on `A ⊗ B`.
pub fn partial_trace_b(m: &CMatrix, da: usize, db: usize) -> CMatrix {
    CMatrix::from_fn(da, da, |i, k| {
        (0..db).map(|j| m[(i * db + j, k * db + j)]).sum()
    })
}

/// `Tr_A` of an operator on `A ⊗ B`.
pub fn partial_trace_a(m: &CMatrix, da: usize, db: usize) -> CMatrix {
    CMatrix::from_fn(db, db, |j, l| {
        (0..da).map(|i| m[(i * db + j, i * db + l)]).sum()
    })
}

/// Shannon entropy in bits with `0 log 0 = 0`.
pub fn shannon_bits(p: &[f64]) -> f64 {
    -p.iter()
        .filter(|x| **x > 0.0)
        .map(|x| x * x.log2())
        .sum::<f64>()
}

/// A density matrix: Hermitian, positive semidefinite, trace at most one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixJson", into = "MatrixJson")]
pub struct DensityMatrix {
    mat: CMatrix,
}

impl DensityMatrix {
    pub fn new(mat: CMatrix) -> Result<Self> {
        let (r, cols) = mat.shape();
        if r != cols {
            return Err(QuantumError::NotSquare(r, cols));
        }
        let herm_dev = max_abs(&(&mat - mat.adjoint()));
        if herm_dev > STATE_TOL {
            return Err(QuantumError::NotHermitian(herm_dev));
        }
        let tr = mat.trace();
        if tr.im.abs() > STATE_TOL || tr.re < -STATE_TOL || tr.re > 1.0 + STATE_TOL {
            return Err(QuantumError::TraceOutOfRange(tr.re));
        }
        let rho = Self { mat };
        if let Some(&min) = rho.spectrum().last() {
            if min < -STATE_TOL {
                return Err(QuantumError::NotPositive(min));
            }
        }
        Ok(rho)
    }

    pub fn from_diagonal(p: &[f64]) -> Result<Self> {
        let d = DVector::from_iterator(p.len(), p.iter().map(|x| c(*x, 0.0)));
        Self::new(CMatrix::from_diagonal(&d))
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self {
            mat: CMatrix::identity(d, d) * c(1.0 / d as f64, 0.0),
        }
    }

    /// `|ψ⟩⟨ψ|` for a unit vector.
    pub fn pure(psi: &CVector) -> Result<Self> {
        let norm = psi.norm();
        if (norm - 1.0).abs() > STATE_TOL {
            return Err(QuantumError::NotNormalized(norm));
        }
        Ok(Self {
            mat: psi * psi.adjoint(),
        })
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> CMatrix {
        self.mat
    }

    pub fn trace(&self) -> f64 {
        self.mat.trace().re
    }

    pub fn is_normalized(&self) -> bool {
        (self.trace() - 1.0).abs() <= STATE_TOL
    }

    pub fn eigh(&self) -> Eigh {
        eigh(&self.mat)
    }

    /// Eigenvalues in decreasing order.
    pub fn spectrum(&self) -> Vec<f64> {
        self.eigh().values
    }

    /// `Tr ρ²`.
    pub fn purity(&self) -> f64 {
        self.mat.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Tensor product `self ⊗ other`.
    pub fn kron(&self, other: &DensityMatrix) -> DensityMatrix {
        Self {
            mat: self.mat.kronecker(&other.mat),
        }
    }

    pub(crate) fn from_matrix_unchecked(mat: CMatrix) -> Self {
        Self { mat }
    }

    pub(crate) fn require_normalized(&self) -> Result<()> {
        if self.is_normalized() {
            Ok(())
        } else {
            Err(QuantumError::NotNormalized(self.trace()))
        }
    }
}

/// A unit vector in `C^{d_A} ⊗ C^{d_B}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PureStateJson", into = "PureStateJson")]
pub struct PureBipartiteState {
    da: usize,
    db: usize,
    amps: CVector,
}

impl PureBipartiteState {
    pub fn new(da: usize, db: usize, amps: CVector) -> Result<Self> {
        if amps.len() != da * db {
            return Err(QuantumError::Length {
                expected: da * db,
                got: amps.len(),
            });
        }
        let norm = amps.norm();
        if (norm - 1.0).abs() > STATE_TOL {
            return Err(QuantumError::NotNormalized(norm));
        }
        Ok(Self { da, db, amps })
    }

    /// Normalize an arbitrary nonzero vector.
    pub fn normalized(da: usize, db: usize, amps: CVector) -> Result<Self> {
        let norm = amps.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(QuantumError::NotNormalized(norm));
        }
        Self::new(da, db, amps / c(norm, 0.0))
    }

    /// `Σ_i √p_i |i⟩|i⟩` on `n ⊗ n`, where `p` are squared Schmidt coefficients.
    pub fn from_schmidt(p: &[f64]) -> Result<Self> {
        let n = p.len();
        let mut amps = CVector::zeros(n * n);
        for (i, pi) in p.iter().enumerate() {
            amps[i * n + i] = c(pi.max(0.0).sqrt(), 0.0);
        }
        Self::new(n, n, amps)
    }

    /// The maximally entangled state on `d ⊗ d`.
    pub fn maximally_entangled(d: usize) -> Self {
        Self::from_schmidt(&vec![1.0 / d as f64; d]).expect("uniform Schmidt state is normalized")
    }

    /// `|a⟩ ⊗ |b⟩` for computational basis indices.
    pub fn product_basis(da: usize, db: usize, a: usize, b: usize) -> Result<Self> {
        if a >= da || b >= db {
            return Err(QuantumError::DimensionMismatch(format!(
                "basis index ({a}, {b}) outside {da}x{db}"
            )));
        }
        let mut amps = CVector::zeros(da * db);
        amps[a * db + b] = c(1.0, 0.0);
        Self::new(da, db, amps)
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.da, self.db)
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amps
    }

    /// The `d_A × d_B` coefficient matrix.
    pub fn coefficient_matrix(&self) -> CMatrix {
        CMatrix::from_fn(self.da, self.db, |i, j| self.amps[i * self.db + j])
    }

    pub fn from_coefficient_matrix(m: &CMatrix) -> Result<Self> {
        let (da, db) = m.shape();
        let amps = CVector::from_fn(da * db, |k, _| m[(k / db, k % db)]);
        Self::new(da, db, amps)
    }

    /// The state with the two parties exchanged, on `B ⊗ A`.
    pub fn swapped(&self) -> Self {
        Self::from_coefficient_matrix(&self.coefficient_matrix().transpose())
            .expect("swap preserves the norm")
    }

    pub fn density(&self) -> DensityMatrix {
        DensityMatrix::from_matrix_unchecked(&self.amps * self.amps.adjoint())
    }
}

/// `[re, im]` pairs on the wire.
pub type ComplexPair = [f64; 2];

pub fn cvec_to_pairs(v: &CVector) -> Vec<ComplexPair> {
    v.iter().map(|z| [z.re, z.im]).collect()
}

pub fn cvec_from_pairs(v: &[ComplexPair]) -> CVector {
    CVector::from_iterator(v.len(), v.iter().map(|p| c(p[0], p[1])))
}

pub fn cmat_to_rows(m: &CMatrix) -> Vec<Vec<ComplexPair>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

pub fn cmat_from_rows(rows: &[Vec<ComplexPair>]) -> Result<CMatrix> {
    let ncols = rows.first().map_or(0, Vec::len);
    if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != ncols) {
        return Err(QuantumError::Parse(format!(
            "row {i} has {} entries, expected {ncols}",
            r.len()
        )));
    }
    Ok(CMatrix::from_fn(rows.len(), ncols, |i, j| {
        c(rows[i][j][0], rows[i][j][1])
    }))
}

/// Serialized density matrix: rows of `[re, im]` pairs.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MatrixJson(pub Vec<Vec<ComplexPair>>);

impl TryFrom<MatrixJson> for DensityMatrix {
    type Error = QuantumError;
    fn try_from(value: MatrixJson) -> Result<Self> {
        DensityMatrix::new(cmat_from_rows(&value.0)?)
    }
}

impl From<DensityMatrix> for MatrixJson {
    fn from(value: DensityMatrix) -> Self {
        MatrixJson(cmat_to_rows(&value.mat))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PureStateJson {
    pub dims: [usize; 2],
    pub amplitudes: Vec<ComplexPair>,
}

impl TryFrom<PureStateJson> for PureBipartiteState {
    type Error = QuantumError;
    fn try_from(value: PureStateJson) -> Result<Self> {
        PureBipartiteState::new(value.dims[0], value.dims[1], cvec_from_pairs(&value.amplitudes))
    }
}

impl From<PureBipartiteState> for PureStateJson {
    fn from(value: PureBipartiteState) -> Self {
        PureStateJson {
            dims: [value.da, value.db],
            amplitudes: cvec_to_pairs(&value.amps),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn density_matrix_validation() {
        assert!(DensityMatrix::from_diagonal(&[0.7, 0.3]).is_ok());
        assert!(matches!(
            DensityMatrix::from_diagonal(&[1.2, -0.2]),
            Err(QuantumError::NotPositive(_))
        ));
        assert!(matches!(
            DensityMatrix::from_diagonal(&[0.9, 0.3]),
            Err(QuantumError::TraceOutOfRange(_))
        ));
        let mut m = CMatrix::identity(2, 2) * c(0.5, 0.0);
        m[(0, 1)] = c(0.1, 0.0);
        assert!(matches!(
            DensityMatrix::new(m),
            Err(QuantumError::NotHermitian(_))
        ));
    }

    #[test]
    fn eigh_is_sorted_and_orthonormal() {
        let mut m = CMatrix::zeros(3, 3);
        m[(0, 0)] = c(0.2, 0.0);
        m[(1, 1)] = c(0.5, 0.0);
        m[(2, 2)] = c(0.3, 0.0);
        m[(0, 1)] = c(0.05, 0.02);
        m[(1, 0)] = c(0.05, -0.02);
        let e = eigh(&m);
        assert!(e.values.windows(2).all(|w| w[0] >= w[1]));
        let gram = e.vectors.adjoint() * &e.vectors;
        assert!(max_abs(&(gram - CMatrix::identity(3, 3))) < 1e-12);
        let rebuilt = &e.vectors
            * CMatrix::from_diagonal(&CVector::from_iterator(
                3,
                e.values.iter().map(|v| c(*v, 0.0)),
            ))
            * e.vectors.adjoint();
        assert!(max_abs(&(rebuilt - m)) < 1e-12);
    }

    #[test]
    fn partial_traces_of_product() {
        let a = DensityMatrix::from_diagonal(&[0.8, 0.2]).unwrap();
        let b = DensityMatrix::from_diagonal(&[0.1, 0.6, 0.3]).unwrap();
        let ab = a.kron(&b);
        assert!(max_abs(&(partial_trace_b(ab.matrix(), 2, 3) - a.matrix())) < 1e-15);
        assert!(max_abs(&(partial_trace_a(ab.matrix(), 2, 3) - b.matrix())) < 1e-15);
    }

    #[test]
    fn json_round_trip() {
        let psi = PureBipartiteState::from_schmidt(&[0.8, 0.2]).unwrap();
        let text = serde_json::to_string(&psi).unwrap();
        let back: PureBipartiteState = serde_json::from_str(&text).unwrap();
        assert_eq!(back, psi);
        let rho = DensityMatrix::from_diagonal(&[0.7, 0.3]).unwrap();
        let text = serde_json::to_string(&rho).unwrap();
        assert_eq!(text, "[[[0.7,0.0],[0.0,0.0]],[[0.0,0.0],[0.3,0.0]]]");
        let back: DensityMatrix = serde_json::from_str(&text).unwrap();
        assert_eq!(back, rho);
    }

    #[test]
    fn shannon() {
        assert!((shannon_bits(&[0.5, 0.5]) - 1.0).abs() < 1e-15);
        assert_eq!(shannon_bits(&[1.0, 0.0]), 0.0);
    }
}
