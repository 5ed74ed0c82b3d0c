//! Dense two-phase simplex for small linear programs in standard form
//!
//! ```text
//! minimize  c·x   subject to  A x = b,  x ≥ 0
//! ```
//!
//! Problem sizes in this crate are tiny (a few dozen rows, at most a few
//! hundred columns), so a dense tableau with Bland's anti-cycling rule is
//! both fast enough and fully deterministic.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("constraint matrix is {rows}x{cols} but right-hand side has length {rhs}")]
    Shape { rows: usize, cols: usize, rhs: usize },
    #[error("objective has length {got}, expected {expected}")]
    ObjectiveShape { expected: usize, got: usize },
    #[error("generator list is empty")]
    NoGenerators,
    #[error("non-finite entry in problem data")]
    NonFinite,
    #[error("ill-conditioned input: magnitude ratio {ratio:.3e} exceeds {limit:.1e}")]
    IllConditioned { ratio: f64, limit: f64 },
    #[error("simplex did not terminate within {0} pivots")]
    IterationLimit(usize),
    #[error("solution residual {residual:.3e} exceeds tolerance {tolerance:.1e}")]
    InaccurateSolution { residual: f64, tolerance: f64 },
}

#[derive(Debug, Clone, Copy)]
pub struct LpOptions {
    /// Phase-one objective below this (relative to ‖b‖₁) counts as feasible.
    pub feasibility_tol: f64,
    /// Smallest admissible pivot magnitude.
    pub pivot_tol: f64,
    /// Reduced-cost tolerance for optimality.
    pub optimality_tol: f64,
    pub max_pivots: usize,
}

impl Default for LpOptions {
    fn default() -> Self {
        Self {
            feasibility_tol: 1e-9,
            pivot_tol: 1e-11,
            optimality_tol: 1e-11,
            max_pivots: 100_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { x: DVector<f64>, objective: f64 },
    Infeasible { phase_one_objective: f64 },
    Unbounded,
}

/// Magnitude ratio beyond which input data is rejected as ill-conditioned.
pub const CONDITION_LIMIT: f64 = 1e12;

/// Reject data whose nonzero magnitudes span more than [`CONDITION_LIMIT`].
///
/// Entries below `1e-14` times the largest magnitude are treated as zeros
/// (floating-point debris from group actions and rotations).
pub fn condition_estimate(data: impl IntoIterator<Item = f64>) -> Result<f64, LpError> {
    let values: Vec<f64> = data.into_iter().collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(LpError::NonFinite);
    }
    let max = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if max == 0.0 {
        return Ok(1.0);
    }
    let floor = max * 1e-14;
    let min = values
        .iter()
        .map(|v| v.abs())
        .filter(|v| *v > floor)
        .fold(f64::INFINITY, f64::min);
    let ratio = max / min;
    if ratio > CONDITION_LIMIT {
        return Err(LpError::IllConditioned {
            ratio,
            limit: CONDITION_LIMIT,
        });
    }
    Ok(ratio)
}

struct Tableau {
    // rows 0..m are constraints, row m is the objective; last column is the rhs
    t: DMatrix<f64>,
    basis: Vec<usize>,
    m: usize,
    n_total: usize,
}

impl Tableau {
    fn rhs_col(&self) -> usize {
        self.n_total
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let p = self.t[(row, col)];
        let width = self.t.ncols();
        for j in 0..width {
            self.t[(row, j)] /= p;
        }
        for i in 0..self.t.nrows() {
            if i == row {
                continue;
            }
            let factor = self.t[(i, col)];
            if factor != 0.0 {
                for j in 0..width {
                    let v = self.t[(row, j)];
                    self.t[(i, j)] -= factor * v;
                }
                self.t[(i, col)] = 0.0;
            }
        }
        self.basis[row] = col;
    }

    /// Runs Bland's rule over the allowed columns. Returns `false` if unbounded.
    fn optimize(
        &mut self,
        allowed: &[bool],
        opts: &LpOptions,
        pivots: &mut usize,
    ) -> Result<bool, LpError> {
        let obj = self.m;
        let rhs = self.rhs_col();
        loop {
            let entering = (0..self.n_total)
                .find(|&j| allowed[j] && self.t[(obj, j)] < -opts.optimality_tol);
            let Some(col) = entering else {
                return Ok(true);
            };
            let mut leaving: Option<(usize, f64)> = None;
            for i in 0..self.m {
                let a = self.t[(i, col)];
                if a > opts.pivot_tol {
                    let ratio = self.t[(i, rhs)] / a;
                    leaving = match leaving {
                        None => Some((i, ratio)),
                        Some((r, best)) => {
                            if ratio < best - 1e-15
                                || (ratio <= best + 1e-15 && self.basis[i] < self.basis[r])
                            {
                                Some((i, ratio))
                            } else {
                                Some((r, best))
                            }
                        }
                    };
                }
            }
            let Some((row, _)) = leaving else {
                return Ok(false);
            };
            self.pivot(row, col);
            *pivots += 1;
            if *pivots > opts.max_pivots {
                return Err(LpError::IterationLimit(opts.max_pivots));
            }
        }
    }
}

/// Solve `min c·x` subject to `A x = b`, `x ≥ 0`.
pub fn solve(
    a: &DMatrix<f64>,
    b: &DVector<f64>,
    c: &DVector<f64>,
    opts: &LpOptions,
) -> Result<LpOutcome, LpError> {
    let (m, n) = a.shape();
    if b.len() != m {
        return Err(LpError::Shape {
            rows: m,
            cols: n,
            rhs: b.len(),
        });
    }
    if c.len() != n {
        return Err(LpError::ObjectiveShape {
            expected: n,
            got: c.len(),
        });
    }
    if a.iter().chain(b.iter()).chain(c.iter()).any(|v| !v.is_finite()) {
        return Err(LpError::NonFinite);
    }

    let n_total = n + m;
    let mut t = DMatrix::<f64>::zeros(m + 1, n_total + 1);
    for i in 0..m {
        let sign = if b[i] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..n {
            t[(i, j)] = sign * a[(i, j)];
        }
        t[(i, n + i)] = 1.0;
        t[(i, n_total)] = sign * b[i];
    }
    // phase-one objective: sum of artificials, expressed in non-basic terms
    for i in 0..m {
        for j in 0..=n_total {
            if j < n || j == n_total {
                t[(m, j)] -= t[(i, j)];
            }
        }
    }
    let mut tab = Tableau {
        t,
        basis: (n..n_total).collect(),
        m,
        n_total,
    };
    let mut pivots = 0usize;
    let all_allowed = vec![true; n_total];
    tab.optimize(&all_allowed, opts, &mut pivots)?;

    let phase_one = -tab.t[(m, n_total)];
    let scale = b.iter().map(|v| v.abs()).sum::<f64>().max(1.0);
    if phase_one > opts.feasibility_tol * scale {
        return Ok(LpOutcome::Infeasible {
            phase_one_objective: phase_one,
        });
    }

    // drive artificials out of the basis where possible; rows where no
    // original column can enter are redundant and are dropped
    let mut active_rows = vec![true; m];
    for i in 0..m {
        if tab.basis[i] >= n {
            let candidate = (0..n)
                .filter(|&j| tab.t[(i, j)].abs() > 1e-9)
                .max_by(|&p, &q| {
                    tab.t[(i, p)]
                        .abs()
                        .partial_cmp(&tab.t[(i, q)].abs())
                        .unwrap()
                        .then(q.cmp(&p))
                });
            match candidate {
                Some(j) => tab.pivot(i, j),
                None => active_rows[i] = false,
            }
        }
    }
    if active_rows.iter().any(|r| !r) {
        let keep: Vec<usize> = (0..m).filter(|&i| active_rows[i]).chain([m]).collect();
        tab.t = tab.t.select_rows(keep.iter());
        tab.basis = (0..m)
            .filter(|&i| active_rows[i])
            .map(|i| tab.basis[i])
            .collect();
        tab.m = tab.basis.len();
    }

    // phase two
    let obj = tab.m;
    for j in 0..=n_total {
        tab.t[(obj, j)] = if j < n { c[j] } else { 0.0 };
    }
    for i in 0..tab.m {
        let col = tab.basis[i];
        let cost = tab.t[(obj, col)];
        if cost != 0.0 {
            for j in 0..=n_total {
                let v = tab.t[(i, j)];
                tab.t[(obj, j)] -= cost * v;
            }
        }
    }
    let allowed: Vec<bool> = (0..n_total).map(|j| j < n).collect();
    if !tab.optimize(&allowed, opts, &mut pivots)? {
        return Ok(LpOutcome::Unbounded);
    }

    let mut x = DVector::<f64>::zeros(n);
    for i in 0..tab.m {
        let col = tab.basis[i];
        if col < n {
            x[col] = tab.t[(i, n_total)].max(0.0);
        }
    }
    let x = refine(a, b, &tab.basis, x);
    let objective = c.dot(&x);
    Ok(LpOutcome::Optimal { x, objective })
}

/// Re-solve the basic variables against the original data to wash out
/// tableau round-off. Keeps whichever of the two points has the smaller
/// residual.
fn refine(a: &DMatrix<f64>, b: &DVector<f64>, basis: &[usize], x: DVector<f64>) -> DVector<f64> {
    let cols: Vec<usize> = basis.iter().copied().filter(|&j| j < a.ncols()).collect();
    if cols.is_empty() {
        return x;
    }
    let sub = a.select_columns(cols.iter());
    let svd = sub.svd(true, true);
    let Ok(sol) = svd.solve(b, 1e-13) else {
        return x;
    };
    if sol.iter().any(|v| *v < -1e-9) {
        return x;
    }
    let mut refined = DVector::<f64>::zeros(a.ncols());
    for (k, &j) in cols.iter().enumerate() {
        refined[j] = sol[k].max(0.0);
    }
    if residual(a, b, &refined) <= residual(a, b, &x) {
        refined
    } else {
        x
    }
}

/// Max-norm residual `‖A x − b‖∞`.
pub fn residual(a: &DMatrix<f64>, b: &DVector<f64>, x: &DVector<f64>) -> f64 {
    (a * x - b).amax()
}

/// Phase-one only: find `x ≥ 0` with `A x = b`, or `None` if infeasible.
pub fn find_feasible(
    a: &DMatrix<f64>,
    b: &DVector<f64>,
    opts: &LpOptions,
) -> Result<Option<DVector<f64>>, LpError> {
    let c = DVector::zeros(a.ncols());
    match solve(a, b, &c, opts)? {
        LpOutcome::Optimal { x, .. } => Ok(Some(x)),
        LpOutcome::Infeasible { .. } => Ok(None),
        // zero objective cannot be unbounded
        LpOutcome::Unbounded => unreachable!("zero objective reported unbounded"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts() -> LpOptions {
        LpOptions::default()
    }

    #[test]
    fn small_optimum() {
        // min -x - y  s.t. x + 2y + s1 = 4, 3x + y + s2 = 6
        let a = DMatrix::from_row_slice(2, 4, &[1.0, 2.0, 1.0, 0.0, 3.0, 1.0, 0.0, 1.0]);
        let b = DVector::from_vec(vec![4.0, 6.0]);
        let c = DVector::from_vec(vec![-1.0, -1.0, 0.0, 0.0]);
        match solve(&a, &b, &c, &opts()).unwrap() {
            LpOutcome::Optimal { x, objective } => {
                assert!((objective + 2.8).abs() < 1e-12);
                assert!((x[0] - 1.6).abs() < 1e-12);
                assert!((x[1] - 1.2).abs() < 1e-12);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn detects_infeasible() {
        // x + y = 1 and x + y = 2
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let b = DVector::from_vec(vec![1.0, 2.0]);
        assert!(find_feasible(&a, &b, &opts()).unwrap().is_none());
    }

    #[test]
    fn detects_unbounded() {
        // min -x s.t. x - y = 0
        let a = DMatrix::from_row_slice(1, 2, &[1.0, -1.0]);
        let b = DVector::from_vec(vec![0.0]);
        let c = DVector::from_vec(vec![-1.0, 0.0]);
        assert_eq!(solve(&a, &b, &c, &opts()).unwrap(), LpOutcome::Unbounded);
    }

    #[test]
    fn redundant_rows_are_tolerated() {
        let a = DMatrix::from_row_slice(3, 2, &[1.0, 1.0, 2.0, 2.0, 1.0, 0.0]);
        let b = DVector::from_vec(vec![1.0, 2.0, 0.25]);
        let x = find_feasible(&a, &b, &opts()).unwrap().unwrap();
        assert!(residual(&a, &b, &x) < 1e-12);
        assert!((x[0] - 0.25).abs() < 1e-12);
    }

    #[test]
    fn negative_rhs_is_normalized() {
        let a = DMatrix::from_row_slice(1, 2, &[-1.0, -1.0]);
        let b = DVector::from_vec(vec![-3.0]);
        let x = find_feasible(&a, &b, &opts()).unwrap().unwrap();
        assert!((x.sum() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn condition_check() {
        assert!(condition_estimate([1.0, 0.5, 0.0, 1e-17]).is_ok());
        assert!(matches!(
            condition_estimate([1e6, 1e-7]),
            Err(LpError::IllConditioned { .. })
        ));
        assert_eq!(condition_estimate([f64::NAN]), Err(LpError::NonFinite));
    }
}
