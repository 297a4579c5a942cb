use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::diagnostics::{effective_sample_size, mean, quantile, sd};
use crate::spline::SplineBasis;
use crate::tensor::{beta_at, Tensor3};

/// Thinned post-burn-in output of one chain.
#[derive(Debug, Clone, Default)]
pub struct PosteriorDraws {
    /// Sweep index of each stored draw.
    pub iterations: Vec<usize>,
    /// `L x E x R` spline coefficients per draw.
    pub gamma: Vec<Tensor3>,
    /// `E x R` local-scale coefficients per draw.
    pub beta_local: Vec<DMatrix<f64>>,
    /// `F x R` fixed-effect coefficients per draw.
    pub eta: Vec<DMatrix<f64>>,
    /// `R x Q` loadings per draw.
    pub loadings: Vec<DMatrix<f64>>,
    pub tau2: Vec<Vec<f64>>,
    pub sigma2: Vec<Vec<f64>>,
    pub lambda_c: Vec<f64>,
    pub tau2_global: Vec<f64>,
    /// MH acceptance rate after burn-in.
    pub acceptance_rate: f64,
    pub burn_in_acceptance_rate: f64,
}

/// Posterior summary of a single scalar.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub mean: f64,
    pub sd: f64,
    pub q025: f64,
    pub q50: f64,
    pub q975: f64,
    pub prob_positive: f64,
}

impl CellSummary {
    pub fn from_draws(x: &[f64]) -> Self {
        Self {
            mean: mean(x),
            sd: sd(x),
            q025: quantile(x, 0.025),
            q50: quantile(x, 0.5),
            q975: quantile(x, 0.975),
            prob_positive: x.iter().filter(|&&v| v > 0.0).count() as f64 / x.len().max(1) as f64,
        }
    }
}

impl PosteriorDraws {
    pub fn n_draws(&self) -> usize {
        self.beta_local.len()
    }

    pub fn dims(&self) -> (usize, usize) {
        self.beta_local.first().map(|m| m.shape()).unwrap_or((0, 0))
    }

    /// Draws of the local coefficient for exposure `e`, outcome `r`.
    pub fn cell(&self, e: usize, r: usize) -> Vec<f64> {
        self.beta_local.iter().map(|m| m[(e, r)]).collect()
    }

    fn map_cells(&self, f: impl Fn(&[f64]) -> f64) -> DMatrix<f64> {
        let (e, r) = self.dims();
        DMatrix::from_fn(e, r, |i, j| f(&self.cell(i, j)))
    }

    pub fn posterior_mean(&self) -> DMatrix<f64> {
        self.map_cells(mean)
    }

    pub fn posterior_sd(&self) -> DMatrix<f64> {
        self.map_cells(sd)
    }

    pub fn quantiles(&self, p: f64) -> DMatrix<f64> {
        self.map_cells(|x| quantile(x, p))
    }

    pub fn ess(&self) -> DMatrix<f64> {
        self.map_cells(effective_sample_size)
    }

    pub fn summary(&self) -> Vec<Vec<CellSummary>> {
        let (e, r) = self.dims();
        (0..e)
            .map(|i| (0..r).map(|j| CellSummary::from_draws(&self.cell(i, j))).collect())
            .collect()
    }

    /// Per-draw coefficients at normalized scale `t`.
    pub fn beta_at(&self, spline: &SplineBasis, t: f64) -> Vec<DMatrix<f64>> {
        self.gamma.iter().map(|g| beta_at(spline, g, t)).collect()
    }

    /// Fraction of draws in which the most global coefficient (`t = 0`)
    /// exceeds the local one (`t = 1`), per cell.
    pub fn prob_global_exceeds_local(&self, spline: &SplineBasis) -> DMatrix<f64> {
        let global = self.beta_at(spline, 0.0);
        let (e, r) = self.dims();
        let n = self.n_draws().max(1) as f64;
        DMatrix::from_fn(e, r, |i, j| {
            global
                .iter()
                .zip(&self.beta_local)
                .filter(|(g, l)| g[(i, j)] > l[(i, j)])
                .count() as f64
                / n
        })
    }

    /// Mean of a per-draw matrix trace.
    pub fn mean_matrix(trace: &[DMatrix<f64>]) -> Option<DMatrix<f64>> {
        let first = trace.first()?;
        let mut acc = DMatrix::zeros(first.nrows(), first.ncols());
        for m in trace {
            acc += m;
        }
        Some(acc / trace.len() as f64)
    }

    pub fn mean_vec(trace: &[Vec<f64>]) -> Vec<f64> {
        let n = trace.first().map_or(0, |v| v.len());
        (0..n)
            .map(|j| trace.iter().map(|v| v[j]).sum::<f64>() / trace.len() as f64)
            .collect()
    }

    pub fn mean_gamma(&self) -> Option<Tensor3> {
        let first = self.gamma.first()?;
        let (a, b, c) = first.dims();
        let n = self.gamma.len() as f64;
        Some(Tensor3::from_fn(a, b, c, |i, j, k| {
            self.gamma.iter().map(|g| g.get(i, j, k)).sum::<f64>() / n
        }))
    }
}
