use serde::{Deserialize, Serialize};

use super::{
    c, cmat_from_rows, cmat_to_rows, max_abs, schmidt_decompose, CMatrix, CVector, ComplexPair,
    DensityMatrix, PureBipartiteState, QuantumError, Result,
};
use crate::mixedness::{birkhoff_rare_synthesis, majorizes_unchecked, MixednessError, PROB_TOL};

/// A channel in Kraus form, `ρ ↦ Σ K_i ρ K_i†`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "KrausJson", into = "KrausJson")]
pub struct KrausChannel {
    input_dim: usize,
    output_dim: usize,
    ops: Vec<CMatrix>,
}

impl KrausChannel {
    /// Checks shapes and `Σ K_i†K_i = I` within `1e-9`.
    pub fn new(ops: Vec<CMatrix>) -> Result<Self> {
        let Some(first) = ops.first() else {
            return Err(QuantumError::Precondition("no Kraus operators".into()));
        };
        let (dout, din) = first.shape();
        if let Some(k) = ops.iter().find(|k| k.shape() != (dout, din)) {
            return Err(QuantumError::DimensionMismatch(format!(
                "Kraus operator {:?} vs {:?}",
                k.shape(),
                (dout, din)
            )));
        }
        let channel = Self {
            input_dim: din,
            output_dim: dout,
            ops,
        };
        let dev = channel.completeness_residual();
        if dev > 1e-9 {
            return Err(QuantumError::NotTracePreserving(dev));
        }
        Ok(channel)
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn output_dim(&self) -> usize {
        self.output_dim
    }

    pub fn operators(&self) -> &[CMatrix] {
        &self.ops
    }

    pub fn completeness_residual(&self) -> f64 {
        let mut sum = CMatrix::zeros(self.input_dim, self.input_dim);
        for k in &self.ops {
            sum += k.adjoint() * k;
        }
        max_abs(&(sum - CMatrix::identity(self.input_dim, self.input_dim)))
    }

    pub fn apply(&self, rho: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.output_dim, self.output_dim);
        for k in &self.ops {
            out += k * rho * k.adjoint();
        }
        out
    }
}

#[derive(Serialize, Deserialize)]
struct KrausJson {
    kraus: Vec<Vec<Vec<ComplexPair>>>,
}

impl TryFrom<KrausJson> for KrausChannel {
    type Error = QuantumError;
    fn try_from(value: KrausJson) -> Result<Self> {
        let ops = value
            .kraus
            .iter()
            .map(|rows| cmat_from_rows(rows))
            .collect::<Result<Vec<_>>>()?;
        KrausChannel::new(ops)
    }
}

impl From<KrausChannel> for KrausJson {
    fn from(value: KrausChannel) -> Self {
        KrausJson {
            kraus: value.ops.iter().map(cmat_to_rows).collect(),
        }
    }
}

/// Orthonormal basis (columns) of the orthogonal complement of the span of
/// the given orthonormal columns, by Gram–Schmidt over the standard basis.
pub(crate) fn orthonormal_complement(cols: &CMatrix, dim: usize) -> CMatrix {
    let mut basis: Vec<CVector> = cols.column_iter().map(|c| c.clone_owned()).collect();
    let start = basis.len();
    for e in 0..dim {
        if basis.len() == dim {
            break;
        }
        let mut v = CVector::zeros(dim);
        v[e] = c(1.0, 0.0);
        for _ in 0..2 {
            for b in &basis {
                let proj = b.dotc(&v);
                v -= b * proj;
            }
        }
        let n = v.norm();
        if n > 1e-8 {
            basis.push(v / c(n, 0.0));
        }
    }
    let rest = &basis[start..];
    let mut out = CMatrix::zeros(dim, rest.len());
    for (k, v) in rest.iter().enumerate() {
        out.set_column(k, v);
    }
    out
}

/// Kraus operators mapping the span of `from` to `to` on the Schmidt vectors
/// and sending the complement of `from` isometrically into the output.
fn exchange_channel(from: &CMatrix, to: &CMatrix) -> Result<KrausChannel> {
    let din = from.nrows();
    let dout = to.nrows();
    let main = to * from.adjoint();
    let complement = orthonormal_complement(from, din);
    let mut ops = vec![main];
    if complement.ncols() > 0 {
        if din == dout {
            ops.push(&complement * complement.adjoint());
        } else {
            // chunks of complement vectors embedded onto output basis vectors
            for chunk in 0..complement.ncols().div_ceil(dout) {
                let mut k = CMatrix::zeros(dout, din);
                for (slot, col) in (chunk * dout..complement.ncols().min((chunk + 1) * dout)).enumerate() {
                    for i in 0..din {
                        k[(slot, i)] = complement[(i, col)].conj();
                    }
                }
                ops.push(k);
            }
        }
    }
    KrausChannel::new(ops)
}

/// Channels `C: A → B` and `D: B → A` that exchange the two halves of `Ψ`.
///
/// `C = Σ |β_i⟩⟨α_i|` over the nonzero Schmidt terms, completed to a channel
/// by `I − P_α` in the square case and by isometric blocks otherwise.
pub fn local_exchange_channels(psi: &PureBipartiteState) -> Result<(KrausChannel, KrausChannel)> {
    let s = schmidt_decompose(psi);
    let r = s.rank();
    let alpha = s.left.columns(0, r).clone_owned();
    let beta = s.right.columns(0, r).clone_owned();
    Ok((exchange_channel(&alpha, &beta)?, exchange_channel(&beta, &alpha)?))
}

/// Largest entry of `(C ⊗ D)(|Ψ⟩⟨Ψ|) − SWAP|Ψ⟩⟨Ψ|SWAP`.
pub fn local_exchange_residual(psi: &PureBipartiteState, c_ab: &KrausChannel, d_ba: &KrausChannel) -> f64 {
    let m = psi.coefficient_matrix();
    let (da, db) = psi.dims();
    let n = da * db;
    let flatten = |x: &CMatrix| CVector::from_fn(n, |k, _| x[(k / da, k % da)]);
    let mut out = CMatrix::zeros(n, n);
    for k in c_ab.operators() {
        for l in d_ba.operators() {
            let phi = flatten(&(k * &m * l.transpose()));
            out += &phi * phi.adjoint();
        }
    }
    let swapped = flatten(&m.transpose());
    max_abs(&(out - &swapped * swapped.adjoint()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitaryTerm {
    pub weight: f64,
    #[serde(with = "matrix_rows")]
    pub unitary: CMatrix,
}

mod matrix_rows {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(m: &CMatrix, s: S) -> std::result::Result<S::Ok, S::Error> {
        cmat_to_rows(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<CMatrix, D::Error> {
        let rows = Vec::<Vec<ComplexPair>>::deserialize(d)?;
        cmat_from_rows(&rows).map_err(serde::de::Error::custom)
    }
}

/// A random-reversible quantum channel `σ ↦ Σ w_i U_i σ U_i†`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantumRaRe {
    pub terms: Vec<UnitaryTerm>,
}

impl QuantumRaRe {
    pub fn apply(&self, sigma: &CMatrix) -> CMatrix {
        let d = sigma.nrows();
        let mut out = CMatrix::zeros(d, d);
        for t in &self.terms {
            out += (&t.unitary * sigma * t.unitary.adjoint()) * c(t.weight, 0.0);
        }
        out
    }

    /// Largest entry of `Σ w_i U_i ρ′ U_i† − ρ`.
    pub fn residual(&self, source: &DensityMatrix, target: &DensityMatrix) -> f64 {
        max_abs(&(self.apply(source.matrix()) - target.matrix()))
    }
}

/// Unitaries `U_i = V Π_i W†` and weights with `Σ w_i U_i ρ′ U_i† = ρ`, where
/// `ρ = V diag(λ) V†`, `ρ′ = W diag(λ′) W†` and the permutations come from the
/// classical synthesis on the spectra.
pub fn rare_synthesis_quantum(rho: &DensityMatrix, rho_prime: &DensityMatrix) -> Result<QuantumRaRe> {
    if rho.dim() != rho_prime.dim() {
        return Err(QuantumError::DimensionMismatch(format!(
            "{} vs {}",
            rho.dim(),
            rho_prime.dim()
        )));
    }
    rho.require_normalized()?;
    rho_prime.require_normalized()?;
    let e = rho.eigh();
    let ep = rho_prime.eigh();
    let clip = |v: &[f64]| -> Vec<f64> {
        let v: Vec<f64> = v.iter().map(|x| x.max(0.0)).collect();
        let total: f64 = v.iter().sum();
        v.into_iter().map(|x| x / total).collect()
    };
    let (lam, lam_p) = (clip(&e.values), clip(&ep.values));
    if !majorizes_unchecked(&lam_p, &lam, PROB_TOL) {
        return Err(MixednessError::NotMajorized.into());
    }
    let (_, perms) = birkhoff_rare_synthesis(&lam_p, &lam)?;
    let total: f64 = perms.iter().map(|t| t.weight).sum();
    let to_complex = |m: &nalgebra::DMatrix<f64>| m.map(|x| c(x, 0.0));
    let terms = perms
        .iter()
        .map(|t| UnitaryTerm {
            weight: t.weight / total,
            unitary: &e.vectors * to_complex(&t.permutation.matrix()) * ep.vectors.adjoint(),
        })
        .collect();
    Ok(QuantumRaRe { terms })
}

/// Outcome of the catalytic erasure test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CatalystCertificate {
    pub erasable: bool,
    /// `Tr ρ²`.
    pub purity: f64,
    /// `1 − Tr ρ²`, the 2-norm gap an erasure would have to close.
    pub margin: f64,
}

/// A state can be erased with a catalyst under random reversible channels
/// only if it is already pure: these channels never increase `Tr ρ²`.
pub fn catalytic_erasure_possible(rho: &DensityMatrix) -> Result<CatalystCertificate> {
    rho.require_normalized()?;
    let purity = rho.purity();
    let erasable = (purity - 1.0).abs() <= 1e-9;
    Ok(CatalystCertificate {
        erasable,
        purity,
        margin: if erasable { 0.0 } else { 1.0 - purity },
    })
}
