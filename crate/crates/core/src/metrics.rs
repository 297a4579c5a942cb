//! Replicate-study metrics and the held-out log score.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::baselines::BaselineFit;
use crate::car::spectral_variance;
use crate::error::{MsmError, Result};
use crate::rng::rng_from_seed;
use crate::sampler::{run_chain, ChainConfig, ModelData, PosteriorDraws};
use crate::spline::{basis_for, SplineAxis, SplineBasis};
use crate::tensor::{beta_at, Tensor3};

/// Which truth cells a metric is computed over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Split {
    All,
    Zero,
    Nonzero,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::All, Split::Zero, Split::Nonzero];

    pub fn as_str(self) -> &'static str {
        match self {
            Split::All => "all",
            Split::Zero => "zero",
            Split::Nonzero => "nonzero",
        }
    }
}

/// Cells of `truth` in `split`, optionally skipping one exposure row.
pub fn cells(truth: &DMatrix<f64>, split: Split, skip_row: Option<usize>) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for e in 0..truth.nrows() {
        if skip_row == Some(e) {
            continue;
        }
        for r in 0..truth.ncols() {
            let keep = match split {
                Split::All => true,
                Split::Zero => truth[(e, r)] == 0.0,
                Split::Nonzero => truth[(e, r)] != 0.0,
            };
            if keep {
                out.push((e, r));
            }
        }
    }
    out
}

fn cell_count(cells: &[(usize, usize)], n: usize) -> f64 {
    (cells.len() * n) as f64
}

/// Mean squared error over cells and replicates.
pub fn mse(estimates: &[DMatrix<f64>], truth: &DMatrix<f64>, cells: &[(usize, usize)]) -> f64 {
    let mut acc = 0.0;
    for b in estimates {
        for &(e, r) in cells {
            let d = b[(e, r)] - truth[(e, r)];
            acc += d * d;
        }
    }
    acc / cell_count(cells, estimates.len())
}

/// Absolute value of the replicate-mean bias, averaged over cells.
pub fn mab(estimates: &[DMatrix<f64>], truth: &DMatrix<f64>, cells: &[(usize, usize)]) -> f64 {
    let n = estimates.len() as f64;
    let mut acc = 0.0;
    for &(e, r) in cells {
        let bias: f64 = estimates.iter().map(|b| b[(e, r)] - truth[(e, r)]).sum::<f64>() / n;
        acc += bias.abs();
    }
    acc / cells.len() as f64
}

/// Mean of `|error|` over cells and replicates; bounds [`mab`] from above.
pub fn mean_abs_error(estimates: &[DMatrix<f64>], truth: &DMatrix<f64>, cells: &[(usize, usize)]) -> f64 {
    let mut acc = 0.0;
    for b in estimates {
        for &(e, r) in cells {
            acc += (b[(e, r)] - truth[(e, r)]).abs();
        }
    }
    acc / cell_count(cells, estimates.len())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoverageStats {
    pub coverage: f64,
    pub width: f64,
    pub sd: f64,
}

pub fn coverage_and_width(
    lows: &[DMatrix<f64>],
    highs: &[DMatrix<f64>],
    sds: &[DMatrix<f64>],
    truth: &DMatrix<f64>,
    cells: &[(usize, usize)],
) -> CoverageStats {
    let (mut hit, mut width, mut sd) = (0usize, 0.0, 0.0);
    for ((lo, hi), s) in lows.iter().zip(highs).zip(sds) {
        for &(e, r) in cells {
            let t = truth[(e, r)];
            if lo[(e, r)] <= t && t <= hi[(e, r)] {
                hit += 1;
            }
            width += hi[(e, r)] - lo[(e, r)];
            sd += s[(e, r)];
        }
    }
    let n = cell_count(cells, lows.len());
    CoverageStats {
        coverage: hit as f64 / n,
        width: width / n,
        sd: sd / n,
    }
}

/// Delete-one jackknife standard error of a statistic of replicate subsets.
/// Zero with fewer than two replicates.
pub fn jackknife_se(n: usize, stat: impl Fn(&[usize]) -> f64) -> f64 {
    if n < 2 {
        return 0.0;
    }
    let loo: Vec<f64> = (0..n)
        .map(|i| {
            let idx: Vec<usize> = (0..n).filter(|&j| j != i).collect();
            stat(&idx)
        })
        .collect();
    let m = loo.iter().sum::<f64>() / n as f64;
    let ss: f64 = loo.iter().map(|v| (v - m) * (v - m)).sum();
    ((n - 1) as f64 / n as f64 * ss).sqrt()
}

/// One line of the long-format report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub setting: String,
    pub method: String,
    pub metric: String,
    pub split: String,
    #[serde(serialize_with = "crate::io::sci::f64")]
    pub value: f64,
    #[serde(serialize_with = "crate::io::sci::f64")]
    pub se: f64,
}

pub const METRIC_NAMES: [&str; 5] = ["mse", "mab", "coverage", "width", "sd"];

fn metric_value(name: &str, fits: &[&BaselineFit], truth: &DMatrix<f64>, cells: &[(usize, usize)]) -> f64 {
    let pick = |f: fn(&BaselineFit) -> &DMatrix<f64>| fits.iter().map(|b| f(b).clone()).collect::<Vec<_>>();
    match name {
        "mse" => mse(&pick(|b| &b.beta_hat), truth, cells),
        "mab" => mab(&pick(|b| &b.beta_hat), truth, cells),
        _ => {
            let c = coverage_and_width(&pick(|b| &b.low), &pick(|b| &b.high), &pick(|b| &b.sd), truth, cells);
            match name {
                "coverage" => c.coverage,
                "width" => c.width,
                _ => c.sd,
            }
        }
    }
}

/// All metrics for one method over its replicate fits, with jackknife SEs.
/// Splits without cells are omitted.
pub fn method_metrics(
    setting: &str,
    method: &str,
    fits: &[BaselineFit],
    truth: &DMatrix<f64>,
    skip_row: Option<usize>,
) -> Vec<MetricRow> {
    let mut rows = Vec::new();
    if fits.is_empty() {
        return rows;
    }
    for split in Split::ALL {
        let cs = cells(truth, split, skip_row);
        if cs.is_empty() {
            continue;
        }
        for name in METRIC_NAMES {
            let all: Vec<&BaselineFit> = fits.iter().collect();
            let value = metric_value(name, &all, truth, &cs);
            let se = jackknife_se(fits.len(), |idx| {
                let sub: Vec<&BaselineFit> = idx.iter().map(|&i| &fits[i]).collect();
                metric_value(name, &sub, truth, &cs)
            });
            rows.push(MetricRow {
                setting: setting.to_string(),
                method: method.to_string(),
                metric: name.to_string(),
                split: split.as_str().to_string(),
                value,
                se,
            });
        }
    }
    rows
}

/// Gaussian log density averaged over cells. Every variance must be positive.
pub fn gaussian_log_score(y: &DMatrix<f64>, mean: &DMatrix<f64>, var: &DMatrix<f64>) -> Result<f64> {
    if y.shape() != mean.shape() || y.shape() != var.shape() {
        return Err(MsmError::dimension(
            "log score",
            format!("{:?}", y.shape()),
            format!("{:?}/{:?}", mean.shape(), var.shape()),
        ));
    }
    let mut acc = 0.0;
    for ((yv, m), v) in y.iter().zip(mean.iter()).zip(var.iter()) {
        if !(*v > 0.0) || !v.is_finite() {
            return Err(MsmError::Contract(format!("predictive variance {v} is not positive")));
        }
        acc += -0.5 * (2.0 * PI * v).ln() - 0.5 * (yv - m) * (yv - m) / v;
    }
    Ok(acc / y.len() as f64)
}

/// Posterior means of the quantities the predictive density needs.
#[derive(Debug, Clone)]
pub struct PointEstimate {
    pub gamma: Tensor3,
    pub eta: DMatrix<f64>,
    pub loadings: DMatrix<f64>,
    pub sigma2: Vec<f64>,
    pub lambda: f64,
    pub tau2: Vec<f64>,
}

impl PointEstimate {
    pub fn from_draws(d: &PosteriorDraws) -> Result<Self> {
        let none = || MsmError::Contract("no posterior draws".into());
        Ok(Self {
            gamma: d.mean_gamma().ok_or_else(none)?,
            eta: PosteriorDraws::mean_matrix(&d.eta).ok_or_else(none)?,
            loadings: PosteriorDraws::mean_matrix(&d.loadings).ok_or_else(none)?,
            sigma2: PosteriorDraws::mean_vec(&d.sigma2),
            lambda: d.lambda_c.iter().sum::<f64>() / d.lambda_c.len() as f64,
            tau2: PosteriorDraws::mean_vec(&d.tau2),
        })
    }
}

/// Predictive mean and variance of held-out spectral rows. The variance is
/// the noise variance plus the marginal variance of the latent factors.
pub fn predictive_moments(
    point: &PointEstimate,
    spline: &SplineBasis,
    test: &ModelData,
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    if spline.axis() != SplineAxis::Eigenvalue && !spline.is_constant() {
        return Err(MsmError::config(
            "spline_axis",
            "held-out rows need the eigenvalue axis to place them on the spline",
        ));
    }
    let (n, r) = (test.n_rows(), test.n_outcomes());
    let x = test.xstar();
    let f = test.fixed();
    let mut mean = DMatrix::zeros(n, r);
    let mut var = DMatrix::zeros(n, r);
    for i in 0..n {
        let w = test.eigenvalues()[i];
        let b = beta_at(spline, &point.gamma, spline.coord_of_eigenvalue(w));
        let row = x.row(i) * b + f.row(i) * &point.eta;
        for k in 0..r {
            mean[(i, k)] = row[k];
            let latent: f64 = (0..point.sigma2.len())
                .map(|q| {
                    point.loadings[(k, q)].powi(2)
                        * spectral_variance(point.sigma2[q], point.lambda, w.max(0.0))
                })
                .sum();
            var[(i, k)] = point.tau2[k] + latent;
        }
    }
    Ok((mean, var))
}

pub fn log_score(draws: &PosteriorDraws, spline: &SplineBasis, test: &ModelData) -> Result<f64> {
    let point = PointEstimate::from_draws(draws)?;
    let (mean, var) = predictive_moments(&point, spline, test)?;
    gaussian_log_score(test.ystar(), &mean, &var)
}

/// Random disjoint `(train, test)` row split, both sorted.
pub fn split_rows(n: usize, test_fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(MsmError::config("test_fraction", "must lie in (0, 1)"));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut rng_from_seed(seed));
    let n_test = ((test_fraction * n as f64).round() as usize).clamp(1, n.saturating_sub(1));
    let mut test = idx[..n_test].to_vec();
    let mut train = idx[n_test..].to_vec();
    test.sort_unstable();
    train.sort_unstable();
    Ok((train, test))
}

/// Fits on the training rows and scores the held-out rows.
pub fn holdout_log_score(data: &ModelData, cfg: &ChainConfig, test_fraction: f64, split_seed: u64) -> Result<f64> {
    let (train_idx, test_idx) = split_rows(data.n_rows(), test_fraction, split_seed)?;
    let train = data.select_rows(&train_idx)?;
    let test = data.select_rows(&test_idx)?;
    let spline = basis_for(train.eigenvalues(), cfg.n_basis, cfg.spline_axis)?;
    let draws = run_chain(&train, cfg)?;
    log_score(&draws, &spline, &test)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(v: &[f64]) -> DMatrix<f64> {
        DMatrix::from_row_slice(1, v.len(), v)
    }

    #[test]
    fn single_cell_arithmetic() {
        let truth = m(&[1.0]);
        let c = cells(&truth, Split::All, None);
        assert!((mse(&[m(&[1.2])], &truth, &c) - 0.04).abs() < 1e-15);
        assert_eq!(mse(&[truth.clone()], &truth, &c), 0.0);
    }

    #[test]
    fn mab_cancels_alternating_errors() {
        let truth = m(&[0.0]);
        let c = cells(&truth, Split::All, None);
        let est = [m(&[0.3]), m(&[-0.3])];
        assert!(mab(&est, &truth, &c).abs() < 1e-15);
        assert!((mean_abs_error(&est, &truth, &c) - 0.3).abs() < 1e-15);
        let shifted = [m(&[0.1]), m(&[0.1])];
        assert!((mab(&shifted, &truth, &c) - 0.1).abs() < 1e-15);
    }

    #[test]
    fn coverage_extremes() {
        let truth = m(&[1.0, 0.0]);
        let c = cells(&truth, Split::All, None);
        let s = coverage_and_width(&[truth.clone()], &[truth.clone()], &[m(&[0.0, 0.0])], &truth, &c);
        assert_eq!((s.coverage, s.width), (1.0, 0.0));
        let s = coverage_and_width(&[m(&[2.0, 2.0])], &[m(&[3.0, 3.0])], &[m(&[0.0, 0.0])], &truth, &c);
        assert_eq!(s.coverage, 0.0);
    }

    #[test]
    fn splits_partition_cells() {
        let truth = DMatrix::from_row_slice(2, 2, &[0.5, 0.0, 0.0, 1.0]);
        assert_eq!(cells(&truth, Split::Zero, None), vec![(0, 1), (1, 0)]);
        assert_eq!(cells(&truth, Split::Nonzero, Some(0)), vec![(1, 1)]);
    }

    #[test]
    fn jackknife_of_mean_matches_standard_error() {
        let x = [1.0, 4.0, 2.0, 8.0, 5.0];
        let se = jackknife_se(5, |idx| idx.iter().map(|&i| x[i]).sum::<f64>() / idx.len() as f64);
        let mu = x.iter().sum::<f64>() / 5.0;
        let var = x.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / 4.0;
        assert!((se - (var / 5.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn gaussian_score_at_mode() {
        let y = m(&[0.3]);
        let s = gaussian_log_score(&y, &y, &m(&[1.0])).unwrap();
        assert!((s + 0.5 * (2.0 * PI).ln()).abs() < 1e-12);
        let worse = gaussian_log_score(&y, &m(&[1.0]), &m(&[1.0])).unwrap();
        assert!(worse < s);
        assert!(gaussian_log_score(&y, &y, &m(&[0.0])).is_err());
    }

    #[test]
    fn split_is_disjoint_and_complete() {
        let (tr, te) = split_rows(100, 0.2, 9).unwrap();
        assert_eq!((tr.len(), te.len()), (80, 20));
        let mut all = [tr, te].concat();
        all.sort_unstable();
        assert_eq!(all, (0..100).collect::<Vec<_>>());
    }
}
