//! Seeded random instances.
//!
//! Every generator draws from a ChaCha8 stream selected by `(seed, stream)`,
//! so trial `i` of a suite is reproducible on its own.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::quantum::{c, CMatrix, CVector, DensityMatrix, PureBipartiteState};

pub fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> crate::quantum::C64 {
    c(normal(rng), normal(rng))
}

/// Uniform (flat Dirichlet) point of the probability simplex.
pub fn random_probability<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| Exp1.sample(rng)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / total).collect()
}

/// Haar-random unit vector in `C^{d_A} ⊗ C^{d_B}`.
pub fn random_pure_bipartite<R: Rng + ?Sized>(rng: &mut R, da: usize, db: usize) -> PureBipartiteState {
    let v = CVector::from_fn(da * db, |_, _| complex_gaussian(rng));
    PureBipartiteState::normalized(da, db, v).expect("gaussian vector is nonzero")
}

pub fn ginibre<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| complex_gaussian(rng))
}

/// `G G† / Tr(G G†)` with `G` a `d × k` Ginibre matrix; `k = d` gives the
/// Hilbert–Schmidt measure.
pub fn random_density<R: Rng + ?Sized>(rng: &mut R, d: usize, k: usize) -> DensityMatrix {
    let g = ginibre(rng, d, k);
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    DensityMatrix::new(m / c(tr, 0.0)).expect("Wishart matrix is a state")
}

/// Haar-random unitary from the QR decomposition of a Ginibre matrix.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, d: usize) -> CMatrix {
    let qr = ginibre(rng, d, d).qr();
    let (mut q, r) = qr.unpack();
    for k in 0..d {
        let z = r[(k, k)];
        if z.norm() > 0.0 {
            let phase = z / z.norm();
            let col = q.column(k) * phase;
            q.set_column(k, &col);
        }
    }
    q
}
