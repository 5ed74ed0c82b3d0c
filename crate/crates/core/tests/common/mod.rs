//! Independent oracles shared by the integration tests.

#![allow(dead_code)]

use dualkit_core::quantum::{eigh, shannon_bits, CMatrix, CVector, C64};
use dualkit_core::DensityMatrix;

/// Entanglement of formation of a two-qubit state from the concurrence
/// closed form, in ebits.
pub fn wootters_eof(rho: &DensityMatrix) -> f64 {
    let c = concurrence(rho);
    let x = (1.0 + (1.0 - c * c).max(0.0).sqrt()) / 2.0;
    shannon_bits(&[x, 1.0 - x])
}

pub fn concurrence(rho: &DensityMatrix) -> f64 {
    let z = C64::new(0.0, 0.0);
    let y = CMatrix::from_row_slice(2, 2, &[z, C64::new(0.0, -1.0), C64::new(0.0, 1.0), z]);
    let yy = y.kronecker(&y);
    let tilde = &yy * rho.matrix().conjugate() * &yy;
    let e = eigh(rho.matrix());
    let root = &e.vectors
        * CMatrix::from_diagonal(&CVector::from_iterator(
            4,
            e.values.iter().map(|x| C64::new(x.max(0.0).sqrt(), 0.0)),
        ))
        * e.vectors.adjoint();
    let r = eigh(&(&root * tilde * &root));
    let l: Vec<f64> = r.values.iter().map(|x| x.max(0.0).sqrt()).collect();
    (l[0] - l[1] - l[2] - l[3]).max(0.0)
}
