use serde::{Deserialize, Serialize};

use super::{
    c, cmat_to_rows, eigh, max_abs, ComplexPair, CMatrix, CVector, DensityMatrix,
    PureBipartiteState, QuantumError, Result, RANK_TOL,
};
use crate::mixedness::{majorizes_unchecked, sorted_desc};

/// Schmidt form `Ψ = Σ_k s_k |α_k⟩|β_k⟩` with `s_k` decreasing.
#[derive(Debug, Clone, PartialEq)]
pub struct SchmidtData {
    pub coefficients: Vec<f64>,
    /// `α_k` as columns, `d_A × r`.
    pub left: CMatrix,
    /// `β_k` as columns, `d_B × r`.
    pub right: CMatrix,
}

impl SchmidtData {
    pub fn rank(&self) -> usize {
        self.coefficients.iter().filter(|s| **s > RANK_TOL).count()
    }

    /// Squared coefficients, i.e. the common spectrum of both marginals.
    pub fn probabilities(&self) -> Vec<f64> {
        self.coefficients.iter().map(|s| s * s).collect()
    }

    pub fn reconstruct(&self) -> CVector {
        let (da, db) = (self.left.nrows(), self.right.nrows());
        let mut out = CVector::zeros(da * db);
        for (k, s) in self.coefficients.iter().enumerate() {
            for i in 0..da {
                for j in 0..db {
                    out[i * db + j] += self.left[(i, k)] * self.right[(j, k)] * c(*s, 0.0);
                }
            }
        }
        out
    }
}

#[derive(Serialize, Deserialize)]
struct SchmidtJson {
    coefficients: Vec<f64>,
    left: Vec<Vec<ComplexPair>>,
    right: Vec<Vec<ComplexPair>>,
}

impl Serialize for SchmidtData {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        // one list per Schmidt vector
        SchmidtJson {
            coefficients: self.coefficients.clone(),
            left: cmat_to_rows(&self.left.transpose()),
            right: cmat_to_rows(&self.right.transpose()),
        }
        .serialize(s)
    }
}

/// Schmidt decomposition through the singular value decomposition of the
/// coefficient matrix.
///
/// The number of terms is `min(d_A, d_B)`. Each `α_k` is rotated so its first
/// nonzero component is real positive, with the conjugate phase moved to `β_k`.
pub fn schmidt_decompose(psi: &PureBipartiteState) -> SchmidtData {
    let m = psi.coefficient_matrix();
    let svd = m.svd(true, true);
    let u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested V^T");
    let r = svd.singular_values.len();
    let mut order: Vec<usize> = (0..r).collect();
    order.sort_by(|&a, &b| {
        svd.singular_values[b]
            .total_cmp(&svd.singular_values[a])
            .then(a.cmp(&b))
    });
    let (da, db) = psi.dims();
    let mut left = CMatrix::zeros(da, r);
    let mut right = CMatrix::zeros(db, r);
    let mut coefficients = Vec::with_capacity(r);
    for (k, &src) in order.iter().enumerate() {
        let mut alpha = u.column(src).clone_owned();
        let mut beta: CVector = v_t.row(src).transpose();
        if let Some(z) = alpha.iter().find(|z| z.norm() > 1e-12).copied() {
            let phase = z.conj() / z.norm();
            alpha *= phase;
            beta *= phase.conj();
        }
        left.set_column(k, &alpha);
        right.set_column(k, &beta);
        coefficients.push(svd.singular_values[src]);
    }
    SchmidtData {
        coefficients,
        left,
        right,
    }
}

/// Squared Schmidt coefficients in decreasing order, with values below the
/// rank threshold set to zero.
pub fn squared_schmidt_coefficients(psi: &PureBipartiteState) -> Vec<f64> {
    let m = psi.coefficient_matrix();
    let mut s: Vec<f64> = m
        .singular_values()
        .iter()
        .map(|x| if *x > RANK_TOL { x * x } else { 0.0 })
        .collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Reduced states `(Tr_B Ψ, Tr_A Ψ)`.
///
/// Fails if the nonzero parts of the two spectra differ by more than `1e-9`.
pub fn marginals(psi: &PureBipartiteState) -> Result<(DensityMatrix, DensityMatrix)> {
    let m = psi.coefficient_matrix();
    let rho_a = &m * m.adjoint();
    let rho_b = (m.adjoint() * &m).transpose();
    let ea = eigh(&rho_a).values;
    let eb = eigh(&rho_b).values;
    let r = ea.len().min(eb.len());
    let mut dev = (0..r).map(|k| (ea[k] - eb[k]).abs()).fold(0.0, f64::max);
    for tail in ea[r..].iter().chain(&eb[r..]) {
        dev = dev.max(tail.abs());
    }
    if dev > 1e-9 {
        return Err(QuantumError::SpectrumMismatch(dev));
    }
    Ok((
        DensityMatrix::from_matrix_unchecked(rho_a),
        DensityMatrix::from_matrix_unchecked(rho_b),
    ))
}

/// `Σ_i √p_i |e_i⟩|i⟩` from the eigendecomposition `ρ = Σ p_i |e_i⟩⟨e_i|`.
pub fn purify(rho: &DensityMatrix) -> Result<PureBipartiteState> {
    rho.require_normalized()?;
    let d = rho.dim();
    let e = rho.eigh();
    let mut amps = CVector::zeros(d * d);
    for k in 0..d {
        let w = e.values[k].max(0.0).sqrt();
        for i in 0..d {
            amps[i * d + k] = e.vectors[(i, k)] * c(w, 0.0);
        }
    }
    PureBipartiteState::normalized(d, d, amps)
}

/// `Σ_i √p_i |e_i⟩|e_i⟩`, a purification invariant under exchanging the
/// parties.
pub fn symmetric_purify(rho: &DensityMatrix) -> Result<PureBipartiteState> {
    rho.require_normalized()?;
    let d = rho.dim();
    let e = rho.eigh();
    let mut amps = CVector::zeros(d * d);
    for k in 0..d {
        let w = c(e.values[k].max(0.0).sqrt(), 0.0);
        for i in 0..d {
            for j in 0..d {
                amps[i * d + j] += e.vectors[(i, k)] * e.vectors[(j, k)] * w;
            }
        }
    }
    PureBipartiteState::normalized(d, d, amps)
}

fn padded(mut v: Vec<f64>, n: usize) -> Vec<f64> {
    v.resize(n, 0.0);
    v
}

/// Whether `Ψ → Ψ′` is possible by LOCC: the squared Schmidt coefficients of
/// `Ψ′` must majorize those of `Ψ`.
pub fn nielsen_convertible(psi: &PureBipartiteState, target: &PureBipartiteState) -> bool {
    let a = squared_schmidt_coefficients(psi);
    let b = squared_schmidt_coefficients(target);
    let n = a.len().max(b.len());
    majorizes_unchecked(&padded(b, n), &padded(a, n), 1e-10)
}

/// Equal squared Schmidt coefficients within `1e-9`.
pub fn lu_equivalent(psi: &PureBipartiteState, other: &PureBipartiteState) -> Result<bool> {
    if psi.dims() != other.dims() {
        return Err(QuantumError::DimensionMismatch(format!(
            "{:?} vs {:?}",
            psi.dims(),
            other.dims()
        )));
    }
    let a = sorted_desc(&squared_schmidt_coefficients(psi));
    let b = sorted_desc(&squared_schmidt_coefficients(other));
    Ok(a.iter().zip(&b).all(|(x, y)| (x - y).abs() <= 1e-9))
}

/// Largest deviation of a reconstruction, for tests and reports.
pub fn reconstruction_error(psi: &PureBipartiteState, data: &SchmidtData) -> f64 {
    let diff = data.reconstruct() - psi.amplitudes();
    max_abs(&CMatrix::from_column_slice(diff.len(), 1, diff.as_slice()))
}
