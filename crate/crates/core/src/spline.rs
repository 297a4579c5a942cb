//! Cubic B-spline basis over the normalized eigenvalue axis.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{MsmError, Result};

const DEGREE: usize = 3;

/// Coordinate used to place spatial scales on `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SplineAxis {
    /// `t_i = (w_i - w_S) / (w_1 - w_S)`.
    #[default]
    Eigenvalue,
    /// `t_i = 1 - i / (S - 1)` for the i-th eigenvalue in descending order.
    RankIndex,
}

/// Basis evaluations at every spectral row plus the knot vector that
/// generated them. `n_basis == 1` is the constant basis.
#[derive(Debug, Clone, PartialEq)]
pub struct SplineBasis {
    matrix: DMatrix<f64>,
    knots: Vec<f64>,
    coords: Vec<f64>,
    axis: SplineAxis,
    w_min: f64,
    w_max: f64,
}

impl SplineBasis {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn n_basis(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn n_rows(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    /// Normalized coordinate of each spectral row.
    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn axis(&self) -> SplineAxis {
        self.axis
    }

    pub fn is_constant(&self) -> bool {
        self.n_basis() == 1
    }

    /// Basis values at normalized coordinate `t ∈ [0, 1]`.
    pub fn eval(&self, t: f64) -> Vec<f64> {
        if self.is_constant() {
            return vec![1.0];
        }
        bspline_row(&self.knots, self.n_basis(), t)
    }

    /// Normalized coordinate of an eigenvalue on the eigenvalue axis.
    pub fn coord_of_eigenvalue(&self, w: f64) -> f64 {
        if self.w_max > self.w_min {
            ((w - self.w_min) / (self.w_max - self.w_min)).clamp(0.0, 1.0)
        } else {
            0.0
        }
    }

    /// Inverse of [`coord_of_eigenvalue`](Self::coord_of_eigenvalue).
    pub fn eigenvalue_of_coord(&self, t: f64) -> f64 {
        self.w_min + t * (self.w_max - self.w_min)
    }
}

fn clamped_knots(n_basis: usize) -> Vec<f64> {
    let n_interior = n_basis - DEGREE - 1;
    let mut knots = vec![0.0; DEGREE + 1];
    for j in 1..=n_interior {
        knots.push(j as f64 / (n_interior + 1) as f64);
    }
    knots.extend(std::iter::repeat_n(1.0, DEGREE + 1));
    knots
}

/// Cox-de Boor evaluation of all `n_basis` cubic B-splines at `t`.
fn bspline_row(knots: &[f64], n_basis: usize, t: f64) -> Vec<f64> {
    let t = t.clamp(0.0, 1.0);
    let mut out = vec![0.0; n_basis];
    if t >= 1.0 {
        out[n_basis - 1] = 1.0;
        return out;
    }
    // knot span with knots[span] <= t < knots[span + 1]
    let span = (DEGREE..n_basis)
        .rev()
        .find(|&j| knots[j] <= t)
        .unwrap_or(DEGREE);

    let mut n = vec![0.0; DEGREE + 1];
    let mut left = vec![0.0; DEGREE + 1];
    let mut right = vec![0.0; DEGREE + 1];
    n[0] = 1.0;
    for j in 1..=DEGREE {
        left[j] = t - knots[span + 1 - j];
        right[j] = knots[span + j] - t;
        let mut saved = 0.0;
        for r in 0..j {
            let denom = right[r + 1] + left[j - r];
            let temp = if denom > 0.0 { n[r] / denom } else { 0.0 };
            n[r] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        n[j] = saved;
    }
    for (j, v) in n.into_iter().enumerate() {
        out[span - DEGREE + j] = v;
    }
    out
}

fn normalized_coords(w: &DVector<f64>, axis: SplineAxis) -> Result<(Vec<f64>, f64, f64)> {
    let s = w.len();
    let w_max = w.max();
    let w_min = w.min();
    if !(w_max > w_min) {
        return Err(MsmError::config(
            "eigenvalues",
            "constant eigenvalues cannot index a spline basis",
        ));
    }
    let coords = match axis {
        SplineAxis::Eigenvalue => w.iter().map(|&wi| (wi - w_min) / (w_max - w_min)).collect(),
        SplineAxis::RankIndex => (0..s)
            .map(|i| 1.0 - i as f64 / (s - 1) as f64)
            .collect(),
    };
    Ok((coords, w_min, w_max))
}

/// Cubic B-spline basis with `n_basis - 4` equally spaced interior knots,
/// evaluated at the eigenvalue-axis coordinate of every spectral row.
pub fn make_spline_basis(w: &DVector<f64>, n_basis: usize) -> Result<SplineBasis> {
    make_spline_basis_on(w, n_basis, SplineAxis::Eigenvalue)
}

pub fn make_spline_basis_on(
    w: &DVector<f64>,
    n_basis: usize,
    axis: SplineAxis,
) -> Result<SplineBasis> {
    if n_basis < DEGREE + 1 {
        return Err(MsmError::config(
            "L",
            format!("a cubic spline basis needs L >= 4, got {n_basis}"),
        ));
    }
    if w.len() <= n_basis {
        return Err(MsmError::config(
            "L",
            format!("L = {n_basis} must be smaller than S = {}", w.len()),
        ));
    }
    let (coords, w_min, w_max) = normalized_coords(w, axis)?;
    let knots = clamped_knots(n_basis);
    let mut matrix = DMatrix::zeros(w.len(), n_basis);
    for (i, &t) in coords.iter().enumerate() {
        for (l, v) in bspline_row(&knots, n_basis, t).into_iter().enumerate() {
            matrix[(i, l)] = v;
        }
    }
    Ok(SplineBasis {
        matrix,
        knots,
        coords,
        axis,
        w_min,
        w_max,
    })
}

/// Single column of ones: coefficients that do not vary with scale.
pub fn constant_basis(w: &DVector<f64>) -> SplineBasis {
    let (coords, w_min, w_max) = normalized_coords(w, SplineAxis::Eigenvalue)
        .unwrap_or_else(|_| (vec![0.0; w.len()], w.min(), w.max()));
    SplineBasis {
        matrix: DMatrix::from_element(w.len(), 1, 1.0),
        knots: Vec::new(),
        coords,
        axis: SplineAxis::Eigenvalue,
        w_min,
        w_max,
    }
}

/// `L == 1` gives the constant basis, otherwise a cubic spline basis.
pub fn basis_for(w: &DVector<f64>, n_basis: usize, axis: SplineAxis) -> Result<SplineBasis> {
    if n_basis == 1 {
        Ok(constant_basis(w))
    } else {
        make_spline_basis_on(w, n_basis, axis)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn descending(s: usize) -> DVector<f64> {
        DVector::from_fn(s, |i, _| 8.0 * ((s - 1 - i) as f64 / (s - 1) as f64).powf(1.3))
    }

    #[test]
    fn partition_of_unity_and_nonnegative() {
        let b = make_spline_basis(&descending(400), 10).unwrap();
        assert_eq!(b.matrix().shape(), (400, 10));
        for i in 0..400 {
            let row = b.matrix().row(i);
            assert!((row.sum() - 1.0).abs() < 1e-12);
            assert!(row.iter().all(|&v| v >= 0.0));
            assert!(row.iter().filter(|&&v| v != 0.0).count() <= 4);
        }
    }

    #[test]
    fn endpoints_interpolate() {
        let b = make_spline_basis(&descending(50), 6).unwrap();
        let first = b.matrix().row(0);
        let last = b.matrix().row(49);
        assert_eq!(first[5], 1.0);
        assert_eq!(first.sum(), 1.0);
        assert_eq!(last[0], 1.0);
        assert_eq!(last.sum(), 1.0);
        assert_eq!(b.eval(1.0), first.iter().copied().collect::<Vec<_>>());
    }

    #[test]
    fn matches_independent_recursion() {
        // plain recursive Cox-de Boor as oracle
        fn basis(knots: &[f64], i: usize, p: usize, t: f64) -> f64 {
            if p == 0 {
                return if knots[i] <= t && t < knots[i + 1] { 1.0 } else { 0.0 };
            }
            let mut v = 0.0;
            let d1 = knots[i + p] - knots[i];
            if d1 > 0.0 {
                v += (t - knots[i]) / d1 * basis(knots, i, p - 1, t);
            }
            let d2 = knots[i + p + 1] - knots[i + 1];
            if d2 > 0.0 {
                v += (knots[i + p + 1] - t) / d2 * basis(knots, i + 1, p - 1, t);
            }
            v
        }
        let knots = clamped_knots(8);
        for step in 0..200 {
            let t = step as f64 / 200.0;
            let row = bspline_row(&knots, 8, t);
            for (l, v) in row.iter().enumerate() {
                assert!((v - basis(&knots, l, 3, t)).abs() < 1e-13, "t={t} l={l}");
            }
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(make_spline_basis(&descending(50), 3).is_err());
        assert!(make_spline_basis(&descending(5), 5).is_err());
        assert!(make_spline_basis(&DVector::from_element(20, 1.0), 5).is_err());
    }

    #[test]
    fn rank_axis_is_linear_in_index() {
        let b = make_spline_basis_on(&descending(11), 4, SplineAxis::RankIndex).unwrap();
        assert_eq!(b.coords()[0], 1.0);
        assert!((b.coords()[5] - 0.5).abs() < 1e-15);
        assert_eq!(b.coords()[10], 0.0);
    }

    #[test]
    fn constant_basis_is_ones() {
        let b = basis_for(&descending(20), 1, SplineAxis::Eigenvalue).unwrap();
        assert!(b.is_constant());
        assert!(b.matrix().iter().all(|&v| v == 1.0));
        assert_eq!(b.eval(0.3), vec![1.0]);
    }
}
