//! Convex-roof entanglement of formation for two qubits.
//!
//! Ensembles `{ψ̃_i}` of a state `ρ = Σ λ_k |e_k⟩⟨e_k|` are parameterized by
//! isometries `U ∈ C^{m×r}`: `ψ̃_i = Σ_k U_ik √λ_k |e_k⟩`. The average
//! entanglement is minimized by Riemannian gradient descent on the Stiefel
//! manifold from several seeded starting points.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    c, shannon_bits, squared_schmidt_coefficients, CMatrix, DensityMatrix, PureBipartiteState,
    QuantumError, Result, C64, RANK_TOL,
};
use crate::sampling;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EofBudget {
    /// Independent starting points; start 0 is the eigen-ensemble.
    pub starts: usize,
    /// Gradient steps per start.
    pub iterations: usize,
    /// Largest ensemble size tried, capped at `rank²`.
    pub max_ensemble: usize,
}

impl Default for EofBudget {
    fn default() -> Self {
        Self {
            starts: 8,
            iterations: 400,
            max_ensemble: 16,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EofResult {
    /// Best average entanglement found, in ebits.
    pub value: f64,
    pub ensemble_size: usize,
    pub start: usize,
    /// Probabilities of the best ensemble.
    pub weights: Vec<f64>,
}

/// Entanglement entropy of a pure state in bits.
pub fn pure_state_entanglement(psi: &PureBipartiteState) -> f64 {
    shannon_bits(&squared_schmidt_coefficients(psi))
}

struct Problem {
    /// Coefficient matrices of `√λ_k |e_k⟩`.
    v: Vec<CMatrix>,
}

struct Eval {
    value: f64,
    grad: CMatrix,
    weights: Vec<f64>,
}

fn herm2_log_entropy(s: &CMatrix) -> (f64, CMatrix) {
    // returns (−Tr σ log σ, log σ) with eigenvalues clamped away from zero
    let eig = s.clone().symmetric_eigen();
    let mut ent = 0.0;
    let mut log = CMatrix::zeros(2, 2);
    for k in 0..2 {
        let mu = eig.eigenvalues[k].max(1e-300);
        let l = mu.ln();
        if eig.eigenvalues[k] > 0.0 {
            ent -= eig.eigenvalues[k] * l;
        }
        let col = eig.eigenvectors.column(k);
        log += col * col.adjoint() * c(l, 0.0);
    }
    (ent, log)
}

impl Problem {
    fn member(&self, u: &CMatrix, i: usize) -> CMatrix {
        let mut m = CMatrix::zeros(2, 2);
        for (k, vk) in self.v.iter().enumerate() {
            m += vk * u[(i, k)];
        }
        m
    }

    /// Average entanglement in nats and its Euclidean gradient.
    fn eval(&self, u: &CMatrix, with_grad: bool) -> Eval {
        let (m_size, r) = u.shape();
        let mut value = 0.0;
        let mut grad = CMatrix::zeros(m_size, r);
        let mut weights = Vec::with_capacity(m_size);
        for i in 0..m_size {
            let mi = self.member(u, i);
            let sigma = &mi * mi.adjoint();
            let p = sigma.trace().re;
            weights.push(p);
            if p <= 1e-300 {
                continue;
            }
            let (ent, log) = herm2_log_entropy(&sigma);
            value += ent + p * p.ln();
            if with_grad {
                let g = CMatrix::identity(2, 2) * c(p.ln(), 0.0) - log;
                let gm = g * &mi;
                for (k, vk) in self.v.iter().enumerate() {
                    grad[(i, k)] = vk.iter().zip(gm.iter()).map(|(a, b)| a.conj() * b).sum::<C64>();
                }
            }
        }
        Eval {
            value,
            grad,
            weights,
        }
    }
}

fn polar(y: &CMatrix) -> CMatrix {
    let svd = y.clone().svd(true, true);
    svd.u.expect("requested U") * svd.v_t.expect("requested V^T")
}

fn descend(problem: &Problem, mut u: CMatrix, iterations: usize) -> (f64, CMatrix) {
    let mut cur = problem.eval(&u, true);
    let mut step = 0.5;
    for _ in 0..iterations {
        let e = &cur.grad;
        let uhe = u.adjoint() * e;
        let sym = (&uhe + uhe.adjoint()) * c(0.5, 0.0);
        let rgrad = e - &u * sym;
        let gnorm2: f64 = rgrad.iter().map(|z| z.norm_sqr()).sum();
        if gnorm2 < 1e-24 {
            break;
        }
        let mut t = step * 2.0;
        let mut accepted = None;
        while t > 1e-14 {
            let cand = polar(&(&u - &rgrad * c(t, 0.0)));
            let val = problem.eval(&cand, false).value;
            if val <= cur.value - 1e-4 * t * gnorm2 {
                accepted = Some(cand);
                break;
            }
            t *= 0.5;
        }
        let Some(next) = accepted else { break };
        step = t;
        u = next;
        cur = problem.eval(&u, true);
    }
    (cur.value, u)
}

/// Entanglement of formation of a two-qubit state, in ebits.
///
/// Start `s` uses ensembles of size `r + s mod (cap − r + 1)` where `r` is the
/// rank and `cap = min(r², max_ensemble)`. Results are reproducible for a
/// given seed and budget.
pub fn entanglement_of_formation(rho: &DensityMatrix, budget: &EofBudget, seed: u64) -> Result<EofResult> {
    if rho.dim() != 4 {
        return Err(QuantumError::Unsupported(format!(
            "entanglement of formation needs a two-qubit state, got dimension {}",
            rho.dim()
        )));
    }
    rho.require_normalized()?;
    let e = rho.eigh();
    let v: Vec<CMatrix> = (0..4)
        .filter(|&k| e.values[k] > RANK_TOL)
        .map(|k| {
            let w = c(e.values[k].sqrt(), 0.0);
            CMatrix::from_fn(2, 2, |i, j| e.vectors[(2 * i + j, k)] * w)
        })
        .collect();
    let r = v.len();
    let problem = Problem { v };
    let cap = (r * r).min(budget.max_ensemble).max(r);
    let starts = budget.starts.max(1);

    let results: Vec<(f64, usize, CMatrix)> = (0..starts)
        .into_par_iter()
        .map(|s| {
            let m = r + s % (cap - r + 1);
            let u0 = if s == 0 {
                CMatrix::identity(m, r)
            } else {
                let mut rng = sampling::rng(seed, s as u64);
                polar(&sampling::ginibre(&mut rng, m, r))
            };
            let (val, u) = descend(&problem, u0, budget.iterations);
            (val, s, u)
        })
        .collect();
    let (val, start, u) = results
        .into_iter()
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
        .expect("at least one start");
    let weights = problem.eval(&u, false).weights;
    Ok(EofResult {
        value: (val / std::f64::consts::LN_2).max(0.0),
        ensemble_size: u.nrows(),
        start,
        weights,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{max_abs, CVector};

    /// Closed form for two qubits through the concurrence.
    fn wootters(rho: &DensityMatrix) -> f64 {
        let y = CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)]);
        let yy = y.kronecker(&y);
        let tilde = &yy * rho.matrix().conjugate() * &yy;
        let e = rho.eigh();
        let sqrt = &e.vectors
            * CMatrix::from_diagonal(&CVector::from_iterator(
                4,
                e.values.iter().map(|x| c(x.max(0.0).sqrt(), 0.0)),
            ))
            * e.vectors.adjoint();
        let r = crate::quantum::eigh(&(&sqrt * tilde * &sqrt));
        let l: Vec<f64> = r.values.iter().map(|x| x.max(0.0).sqrt()).collect();
        let conc = (l[0] - l[1] - l[2] - l[3]).max(0.0);
        let x = (1.0 + (1.0 - conc * conc).max(0.0).sqrt()) / 2.0;
        shannon_bits(&[x, 1.0 - x])
    }

    #[test]
    fn bell_and_product() {
        let bell = PureBipartiteState::maximally_entangled(2).density();
        let res = entanglement_of_formation(&bell, &EofBudget::default(), 0).unwrap();
        assert!((res.value - 1.0).abs() < 1e-6);
        let prod = PureBipartiteState::product_basis(2, 2, 0, 1).unwrap().density();
        let res = entanglement_of_formation(&prod, &EofBudget::default(), 0).unwrap();
        assert!(res.value.abs() < 1e-9);
    }

    #[test]
    fn matches_closed_form_on_random_states() {
        for seed in 0..12 {
            let mut rng = sampling::rng(seed, 0);
            let rank = 2 + (seed as usize % 3);
            let rho = sampling::random_density(&mut rng, 4, rank);
            let res = entanglement_of_formation(&rho, &EofBudget::default(), seed).unwrap();
            let oracle = wootters(&rho);
            assert!((res.value - oracle).abs() < 1e-3, "seed {seed}: {} vs {oracle}", res.value);
        }
    }

    #[test]
    fn werner_state() {
        // p |Φ+⟩⟨Φ+| + (1 − p) I/4 has concurrence (3p − 1)/2
        let p = 0.8;
        let bell = PureBipartiteState::maximally_entangled(2).density();
        let m = bell.matrix() * c(p, 0.0) + CMatrix::identity(4, 4) * c((1.0 - p) / 4.0, 0.0);
        let rho = DensityMatrix::new(m).unwrap();
        let res = entanglement_of_formation(&rho, &EofBudget::default(), 1).unwrap();
        assert!((res.value - wootters(&rho)).abs() < 1e-3);
        assert!(max_abs(rho.matrix()) > 0.0);
    }

    #[test]
    fn rejects_other_dimensions() {
        assert!(matches!(
            entanglement_of_formation(&DensityMatrix::maximally_mixed(3), &EofBudget::default(), 0),
            Err(QuantumError::Unsupported(_))
        ));
    }
}
