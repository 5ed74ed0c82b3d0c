//! Classical RaRe synthesis: from a majorization pair `p ≻ q` build a
//! doubly stochastic matrix with `D p = q` out of T-transforms, then split it
//! into permutation matrices with Birkhoff's algorithm.

use itertools::Itertools;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{check_probability, majorizes_unchecked, MixednessError, RaReChannel, RaReTerm, Result, PROB_TOL};
use crate::gpt::MAX_CLASSICAL;

/// A permutation `π` of `0..n`, acting on vectors by `(Π p)_{π(j)} = p_j`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Permutation(pub Vec<usize>);

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Self((0..n).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        let n = self.0.len();
        let mut m = DMatrix::zeros(n, n);
        for (j, &pj) in self.0.iter().enumerate() {
            m[(pj, j)] = 1.0;
        }
        m
    }

    pub fn apply(&self, p: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; p.len()];
        for (j, &pj) in self.0.iter().enumerate() {
            out[pj] = p[j];
        }
        out
    }

    /// Position in the lexicographic listing of all permutations of `0..n`,
    /// which is the group order used by classical systems.
    pub fn lex_rank(&self) -> usize {
        let n = self.0.len();
        let mut rank = 0;
        let mut fact = (1..n).product::<usize>().max(1);
        let mut remaining: Vec<usize> = (0..n).collect();
        for (i, &x) in self.0.iter().enumerate() {
            let pos = remaining.iter().position(|&r| r == x).expect("valid permutation");
            rank += pos * fact;
            remaining.remove(pos);
            if n - i - 1 > 0 {
                fact /= n - i - 1;
            }
        }
        rank
    }
}

/// One weighted permutation in a Birkhoff decomposition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BirkhoffTerm {
    pub weight: f64,
    pub permutation: Permutation,
}

fn sort_order_desc(p: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..p.len()).collect();
    idx.sort_by(|&a, &b| p[b].total_cmp(&p[a]).then(a.cmp(&b)));
    idx
}

/// Doubly stochastic `D` with `D p = q`, assembled from at most `n − 1`
/// T-transforms on the sorted vectors.
///
/// Each step picks the largest index `j` where the running vector exceeds
/// the target and the first later index `k` where it falls short, then moves
/// mass from `j` to `k` until one of the two matches its target.
pub fn doubly_stochastic_for(p: &[f64], q: &[f64]) -> Result<DMatrix<f64>> {
    if p.len() != q.len() {
        return Err(MixednessError::LengthMismatch(p.len(), q.len()));
    }
    check_probability(p)?;
    check_probability(q)?;
    if !majorizes_unchecked(p, q, PROB_TOL) {
        return Err(MixednessError::NotMajorized);
    }
    let n = p.len();
    let sp = sort_order_desc(p);
    let sq = sort_order_desc(q);
    let mut cur: Vec<f64> = sp.iter().map(|&i| p[i]).collect();
    let target: Vec<f64> = sq.iter().map(|&i| q[i]).collect();

    let eps = 1e-15;
    let mut sorted_d = DMatrix::<f64>::identity(n, n);
    for _ in 0..n {
        let Some(j) = (0..n).rev().find(|&i| cur[i] > target[i] + eps) else {
            break;
        };
        let Some(k) = (j + 1..n).find(|&i| cur[i] < target[i] - eps) else {
            break;
        };
        let excess = cur[j] - target[j];
        let deficit = target[k] - cur[k];
        let delta = excess.min(deficit);
        let t = 1.0 - delta / (cur[j] - cur[k]);
        let row_j = sorted_d.row(j).clone_owned();
        let row_k = sorted_d.row(k).clone_owned();
        sorted_d.set_row(j, &(t * &row_j + (1.0 - t) * &row_k));
        sorted_d.set_row(k, &((1.0 - t) * &row_j + t * &row_k));
        if excess <= deficit {
            cur[k] += excess;
            cur[j] = target[j];
        } else {
            cur[j] -= deficit;
            cur[k] = target[k];
        }
    }

    let mut d = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            d[(sq[i], sp[j])] = sorted_d[(i, j)];
        }
    }
    Ok(d)
}

/// Split a doubly stochastic matrix into weighted permutation matrices.
///
/// Each round takes the permutation whose smallest entry (bottleneck) is
/// largest, preferring the lexicographically first on ties, and subtracts it.
pub fn birkhoff_decompose(d: &DMatrix<f64>) -> Result<Vec<BirkhoffTerm>> {
    let n = d.nrows();
    if n > MAX_CLASSICAL {
        return Err(MixednessError::Capacity {
            max: MAX_CLASSICAL,
            got: n,
        });
    }
    let perms: Vec<Vec<usize>> = (0..n).permutations(n).collect();
    let mut rest = d.clone();
    let mut terms = Vec::new();
    let max_terms = (n.saturating_sub(1)).pow(2) + 1;
    while terms.len() < max_terms {
        let mut best: Option<(f64, &Vec<usize>)> = None;
        for p in &perms {
            let bottleneck = p
                .iter()
                .enumerate()
                .map(|(j, &pj)| rest[(pj, j)])
                .fold(f64::INFINITY, f64::min);
            if best.is_none_or(|(b, _)| bottleneck > b) {
                best = Some((bottleneck, p));
            }
        }
        let Some((weight, perm)) = best else { break };
        if weight <= 1e-14 {
            break;
        }
        for (j, &pj) in perm.iter().enumerate() {
            rest[(pj, j)] -= weight;
            if rest[(pj, j)].abs() < 1e-15 {
                rest[(pj, j)] = 0.0;
            }
        }
        terms.push(BirkhoffTerm {
            weight,
            permutation: Permutation(perm.clone()),
        });
    }
    Ok(terms)
}

/// Weights over permutation matrices with `Σ w_i Π_i p = q`.
///
/// Group indices refer to the lexicographic permutation order of
/// [`crate::gpt::make_classical`].
pub fn birkhoff_rare_synthesis(p: &[f64], q: &[f64]) -> Result<(RaReChannel, Vec<BirkhoffTerm>)> {
    if p.len() > MAX_CLASSICAL {
        return Err(MixednessError::Capacity {
            max: MAX_CLASSICAL,
            got: p.len(),
        });
    }
    let d = doubly_stochastic_for(p, q)?;
    let terms = birkhoff_decompose(&d)?;
    let total: f64 = terms.iter().map(|t| t.weight).sum();
    let rare = RaReChannel {
        terms: terms
            .iter()
            .map(|t| RaReTerm {
                weight: t.weight / total,
                group_index: t.permutation.lex_rank(),
            })
            .collect(),
    };
    Ok((rare, terms))
}
