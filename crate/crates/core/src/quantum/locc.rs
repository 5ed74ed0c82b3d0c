use serde::{Deserialize, Serialize};

use super::channels::orthonormal_complement;
use super::{
    c, cmat_from_rows, cmat_to_rows, eigh, marginals, max_abs, CMatrix, CVector, ComplexPair,
    PureBipartiteState, QuantumError, QuantumRaRe, Result, RANK_TOL,
};

/// Tolerance on the preconditions of the protocol construction.
const PRECONDITION_TOL: f64 = 1e-8;

/// One-way LOCC protocol: Bob measures `{B_i}`, announces `i`, Alice applies
/// `A_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct OneWayProtocol {
    pub bob_instrument: Vec<CMatrix>,
    pub alice_corrections: Vec<CMatrix>,
    pub outcome_probs: Vec<f64>,
}

/// Residuals of the protocol invariants on a given input/output pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProtocolCheck {
    /// `‖Σ B_i†B_i − I‖_max`.
    pub completeness: f64,
    /// `max_i | |⟨Ψ′|(A_i ⊗ B_i)|Ψ⟩| − √p_i |`.
    pub overlap: f64,
    /// `max_i | ‖(A_i ⊗ B_i)|Ψ⟩‖ − √p_i |`.
    pub norm: f64,
    /// `max_i ‖A_i†A_i − I‖_max`.
    pub unitarity: f64,
}

impl ProtocolCheck {
    pub fn max(&self) -> f64 {
        self.completeness.max(self.overlap).max(self.norm).max(self.unitarity)
    }
}

impl OneWayProtocol {
    pub fn check(&self, psi: &PureBipartiteState, target: &PureBipartiteState) -> Result<ProtocolCheck> {
        let (da, db) = psi.dims();
        let (ta, tb) = target.dims();
        if ta != da || self.bob_instrument.iter().any(|b| b.shape() != (tb, db)) {
            return Err(QuantumError::DimensionMismatch(
                "protocol does not match the given states".into(),
            ));
        }
        let mut sum = CMatrix::zeros(db, db);
        for b in &self.bob_instrument {
            sum += b.adjoint() * b;
        }
        let completeness = max_abs(&(sum - CMatrix::identity(db, db)));
        let m = psi.coefficient_matrix();
        let mt = target.coefficient_matrix();
        let (mut overlap, mut norm, mut unitarity) = (0.0f64, 0.0f64, 0.0f64);
        for ((a, b), p) in self
            .alice_corrections
            .iter()
            .zip(&self.bob_instrument)
            .zip(&self.outcome_probs)
        {
            let out = a * &m * b.transpose();
            let inner: super::C64 = mt.iter().zip(out.iter()).map(|(x, y)| x.conj() * y).sum();
            let sp = p.max(0.0).sqrt();
            overlap = overlap.max((inner.norm() - sp).abs());
            norm = norm.max((out.norm() - sp).abs());
            unitarity = unitarity.max(max_abs(&(a.adjoint() * a - CMatrix::identity(da, da))));
        }
        Ok(ProtocolCheck {
            completeness,
            overlap,
            norm,
            unitarity,
        })
    }
}

/// Turn a random-reversible decomposition `ρ = Σ w_i U_i ρ′ U_i†` of the
/// marginals into a one-way protocol converting `Ψ` into `Ψ′`.
///
/// `Γ = Σ_i √w_i (U_i ⊗ I)|Ψ′⟩|i⟩_C` has the same A-marginal as `Ψ`, so an
/// isometry `V: B → B′ ⊗ C` with `(I ⊗ V)Ψ = Γ` exists. Bob's operators are
/// `B_i = (I ⊗ ⟨i|) V` and Alice undoes `U_i`.
pub fn one_way_locc_from_rare(
    psi: &PureBipartiteState,
    target: &PureBipartiteState,
    rare: &QuantumRaRe,
) -> Result<OneWayProtocol> {
    let (da, db) = psi.dims();
    let (ta, tb) = target.dims();
    if ta != da {
        return Err(QuantumError::DimensionMismatch(format!(
            "Alice's dimension {da} vs {ta}"
        )));
    }
    if rare.terms.is_empty() || rare.terms.iter().any(|t| t.unitary.shape() != (da, da)) {
        return Err(QuantumError::Precondition(
            "decomposition does not act on Alice's system".into(),
        ));
    }
    let (rho, _) = marginals(psi)?;
    let (rho_p, _) = marginals(target)?;
    let res = rare.residual(&rho_p, &rho);
    if res > PRECONDITION_TOL {
        return Err(QuantumError::Precondition(format!(
            "decomposition misses the marginal by {res:.3e}"
        )));
    }

    // pad the classical register so V fits into B′ ⊗ C
    let n_terms = rare.terms.len();
    let m_reg = n_terms.max(db.div_ceil(tb));
    let out_dim = tb * m_reg;

    let m = psi.coefficient_matrix();
    let mp = target.coefficient_matrix();
    let mut gamma = CMatrix::zeros(da, out_dim);
    for (i, t) in rare.terms.iter().enumerate() {
        let block = (&t.unitary * &mp) * c(t.weight.max(0.0).sqrt(), 0.0);
        for bp in 0..tb {
            for a in 0..da {
                gamma[(a, bp * m_reg + i)] = block[(a, bp)];
            }
        }
    }

    // V b̃_k = g̃_k on the support, with b̃_k, g̃_k the conditional vectors
    let e = eigh(rho.matrix());
    let mut v_supp = CMatrix::zeros(out_dim, db);
    for k in 0..da {
        let lam = e.values[k];
        if lam <= RANK_TOL {
            continue;
        }
        let ak = e.vectors.column(k);
        let b_tilde: CVector = (ak.adjoint() * &m).transpose();
        let g_tilde: CVector = (ak.adjoint() * &gamma).transpose();
        v_supp += g_tilde * b_tilde.adjoint() * c(1.0 / lam, 0.0);
    }

    // polar factor on the support, then an arbitrary isometric extension
    let svd = v_supp.clone().svd(true, true);
    let u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested V^T");
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&k| svd.singular_values[k] > 0.5)
        .collect();
    let mut range = CMatrix::zeros(out_dim, keep.len());
    let mut domain = CMatrix::zeros(db, keep.len());
    for (slot, &k) in keep.iter().enumerate() {
        range.set_column(slot, &u.column(k));
        domain.set_column(slot, &v_t.row(k).adjoint());
    }
    let mut iso = &range * domain.adjoint();
    let dom_rest = orthonormal_complement(&domain, db);
    let range_rest = orthonormal_complement(&range, out_dim);
    for k in 0..dom_rest.ncols() {
        iso += range_rest.column(k) * dom_rest.column(k).adjoint();
    }

    let mut bob = Vec::with_capacity(m_reg);
    let mut alice = Vec::with_capacity(m_reg);
    let mut probs = Vec::with_capacity(m_reg);
    for i in 0..m_reg {
        let b = CMatrix::from_fn(tb, db, |bp, j| iso[(bp * m_reg + i, j)]);
        if i < n_terms {
            alice.push(rare.terms[i].unitary.adjoint());
            probs.push(rare.terms[i].weight);
        } else {
            alice.push(CMatrix::identity(da, da));
            probs.push(0.0);
        }
        bob.push(b);
    }
    Ok(OneWayProtocol {
        bob_instrument: bob,
        alice_corrections: alice,
        outcome_probs: probs,
    })
}

#[derive(Serialize, Deserialize)]
struct ProtocolJson {
    bob_instrument: Vec<Vec<Vec<ComplexPair>>>,
    alice_corrections: Vec<Vec<Vec<ComplexPair>>>,
    outcome_probs: Vec<f64>,
}

impl Serialize for OneWayProtocol {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ProtocolJson {
            bob_instrument: self.bob_instrument.iter().map(cmat_to_rows).collect(),
            alice_corrections: self.alice_corrections.iter().map(cmat_to_rows).collect(),
            outcome_probs: self.outcome_probs.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for OneWayProtocol {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = ProtocolJson::deserialize(d)?;
        let conv = |v: &[Vec<Vec<ComplexPair>>]| {
            v.iter()
                .map(|m| cmat_from_rows(m))
                .collect::<Result<Vec<_>>>()
                .map_err(serde::de::Error::custom)
        };
        Ok(OneWayProtocol {
            bob_instrument: conv(&raw.bob_instrument)?,
            alice_corrections: conv(&raw.alice_corrections)?,
            outcome_probs: raw.outcome_probs,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{purify, rare_synthesis_quantum, DensityMatrix};
    use crate::sampling;

    fn protocol_for(psi: &PureBipartiteState, target: &PureBipartiteState) -> (OneWayProtocol, ProtocolCheck) {
        let (rho, _) = marginals(psi).unwrap();
        let (rho_p, _) = marginals(target).unwrap();
        let rare = rare_synthesis_quantum(&rho, &rho_p).unwrap();
        let proto = one_way_locc_from_rare(psi, target, &rare).unwrap();
        let check = proto.check(psi, target).unwrap();
        (proto, check)
    }

    #[test]
    fn bell_to_bell_is_trivial() {
        let bell = PureBipartiteState::maximally_entangled(2);
        let (proto, check) = protocol_for(&bell, &bell);
        assert_eq!(proto.outcome_probs.len(), 1);
        assert!(check.max() <= 1e-10);
        assert!(max_abs(&(&proto.alice_corrections[0] - CMatrix::identity(2, 2))) < 1e-12);
        assert!(max_abs(&(&proto.bob_instrument[0] - CMatrix::identity(2, 2))) < 1e-12);
    }

    #[test]
    fn maximally_mixed_to_biased() {
        let psi = purify(&DensityMatrix::maximally_mixed(2)).unwrap();
        let target = purify(&DensityMatrix::from_diagonal(&[0.7, 0.3]).unwrap()).unwrap();
        let (proto, check) = protocol_for(&psi, &target);
        assert_eq!(proto.outcome_probs.len(), 2);
        assert!(check.max() <= 1e-8, "{check:?}");
    }

    #[test]
    fn random_qutrit_instances() {
        for seed in 0..20 {
            let mut rng = sampling::rng(seed, 0);
            let a = sampling::random_pure_bipartite(&mut rng, 3, 3);
            let b = sampling::random_pure_bipartite(&mut rng, 3, 3);
            let (psi, target) = if crate::quantum::nielsen_convertible(&a, &b) {
                (a, b)
            } else if crate::quantum::nielsen_convertible(&b, &a) {
                (b, a)
            } else {
                continue;
            };
            let (_, check) = protocol_for(&psi, &target);
            assert!(check.max() <= 1e-8, "seed {seed}: {check:?}");
        }
    }

    #[test]
    fn entangled_to_product_and_rank_deficient_input() {
        let psi = PureBipartiteState::from_schmidt(&[0.6, 0.4, 0.0]).unwrap();
        let target = PureBipartiteState::product_basis(3, 3, 2, 1).unwrap();
        let (_, check) = protocol_for(&psi, &target);
        assert!(check.max() <= 1e-8, "{check:?}");
    }

    #[test]
    fn rejects_mismatched_decomposition() {
        let psi = PureBipartiteState::from_schmidt(&[0.5, 0.5]).unwrap();
        let target = PureBipartiteState::from_schmidt(&[0.7, 0.3]).unwrap();
        let rare = rare_synthesis_quantum(
            &DensityMatrix::from_diagonal(&[0.6, 0.4]).unwrap(),
            &DensityMatrix::from_diagonal(&[0.7, 0.3]).unwrap(),
        )
        .unwrap();
        assert!(matches!(
            one_way_locc_from_rare(&psi, &target, &rare),
            Err(QuantumError::Precondition(_))
        ));
    }
}
