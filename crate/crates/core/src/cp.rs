//! Alternating least squares CP decomposition of a three-way array.

use nalgebra::DMatrix;

use crate::error::{MsmError, Result};
use crate::tensor::{assemble_gamma, Tensor3, TensorState};

const RIDGE: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct CpFit {
    pub factors: TensorState,
    /// `‖X - X̂‖ / ‖X‖` after the final sweep.
    pub rel_error: f64,
    /// Relative error after each sweep.
    pub history: Vec<f64>,
    pub iterations: usize,
}

fn unfold(x: &Tensor3, mode: usize) -> DMatrix<f64> {
    let (a, b, c) = x.dims();
    match mode {
        0 => DMatrix::from_fn(a, b * c, |i, j| x.get(i, j / c, j % c)),
        1 => DMatrix::from_fn(b, a * c, |i, j| x.get(j / c, i, j % c)),
        _ => DMatrix::from_fn(c, a * b, |i, j| x.get(j / b, j % b, i)),
    }
}

fn leading_vectors(m: &DMatrix<f64>, rank: usize) -> DMatrix<f64> {
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("requested U");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    DMatrix::from_fn(m.nrows(), rank, |i, k| match order.get(k) {
        Some(&col) if svd.singular_values[col] > 0.0 => u[(i, col)],
        // deterministic filler when the unfolding has fewer directions than the rank
        _ => ((i + 1) as f64 * (k + 1) as f64).cos() / (m.nrows() as f64).sqrt(),
    })
}

/// Solves `F G = M` for `F` with `G` symmetric; ridge only if `G` is singular.
fn solve_right(m: &DMatrix<f64>, g: &DMatrix<f64>) -> DMatrix<f64> {
    let chol = g.clone().cholesky().or_else(|| {
        let n = g.nrows();
        (g + DMatrix::identity(n, n) * RIDGE * (1.0 + g.diagonal().amax())).cholesky()
    });
    match chol {
        Some(c) => c.solve(&m.transpose()).transpose(),
        None => {
            let n = g.nrows();
            let pinv = (g + DMatrix::identity(n, n) * RIDGE)
                .pseudo_inverse(1e-14)
                .unwrap_or_else(|_| DMatrix::zeros(n, n));
            m * pinv
        }
    }
}

/// MTTKRP for mode `mode`: `Σ X[i,j,k] * (other two factors)`.
fn mttkrp(x: &Tensor3, f: &TensorState, mode: usize) -> DMatrix<f64> {
    let (a, b, c) = x.dims();
    let k = f.rank();
    let rows = [a, b, c][mode];
    let mut out = DMatrix::zeros(rows, k);
    for i in 0..a {
        for j in 0..b {
            for l in 0..c {
                let v = x.get(i, j, l);
                if v == 0.0 {
                    continue;
                }
                for r in 0..k {
                    match mode {
                        0 => out[(i, r)] += v * f.t2[(j, r)] * f.t3[(l, r)],
                        1 => out[(j, r)] += v * f.t1[(i, r)] * f.t3[(l, r)],
                        _ => out[(l, r)] += v * f.t1[(i, r)] * f.t2[(j, r)],
                    }
                }
            }
        }
    }
    out
}

fn rel_error(x: &Tensor3, f: &TensorState, norm_x: f64) -> f64 {
    let d = x.distance(&assemble_gamma(f));
    if norm_x > 0.0 {
        d / norm_x
    } else {
        d
    }
}

/// Rank-`rank` CP fit of `x` by ALS, initialized from leading singular
/// vectors of the mode unfoldings. Stops once the relative error changes by
/// less than `tol` or after `max_iter` sweeps.
pub fn cp_decompose(x: &Tensor3, rank: usize, max_iter: usize, tol: f64) -> Result<CpFit> {
    if rank == 0 {
        return Err(MsmError::config("rank", "CP rank must be at least 1"));
    }
    let norm_x = x.norm();
    let mut f = TensorState::new(
        leading_vectors(&unfold(x, 0), rank),
        leading_vectors(&unfold(x, 1), rank),
        leading_vectors(&unfold(x, 2), rank),
    )?;
    let mut history = Vec::new();
    let mut prev = f64::INFINITY;
    let mut iterations = 0;
    for _ in 0..max_iter {
        iterations += 1;
        let g = (f.t2.transpose() * &f.t2).component_mul(&(f.t3.transpose() * &f.t3));
        f.t1 = solve_right(&mttkrp(x, &f, 0), &g);
        let g = (f.t1.transpose() * &f.t1).component_mul(&(f.t3.transpose() * &f.t3));
        f.t2 = solve_right(&mttkrp(x, &f, 1), &g);
        let g = (f.t1.transpose() * &f.t1).component_mul(&(f.t2.transpose() * &f.t2));
        f.t3 = solve_right(&mttkrp(x, &f, 2), &g);
        if !f.is_finite() {
            return Err(MsmError::Singular("CP-ALS produced non-finite factors".into()));
        }
        let err = rel_error(x, &f, norm_x);
        history.push(err);
        if (prev - err).abs() < tol {
            break;
        }
        prev = err;
    }
    Ok(CpFit {
        rel_error: *history.last().unwrap_or(&rel_error(x, &f, norm_x)),
        factors: f,
        history,
        iterations,
    })
}
