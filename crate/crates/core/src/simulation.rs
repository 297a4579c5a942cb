//! Synthetic confounded data on a square grid, the closed-form confounding
//! bias by eigenvalue, and per-scale exposure/confounder correlations.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::car::{sample_car_matrix, CarParams};
use crate::error::{MsmError, Result};
use crate::graph::{grid_coordinates, spectral_basis, AdjacencyGraph, SpectralBasis};
use crate::rng::{derive_seed, rng_from_seed};

/// Coefficients used by every setting: rows are the intercept and nine
/// exposures, columns the five outcomes.
pub const FULL_BETA: [[f64; 5]; 10] = [
    [0.3, -0.3, 0.2, 0.3, 0.5],
    [0.4, -0.2, 0.4, 0.5, 0.7],
    [0.2, -0.3, 0.3, 0.4, 0.6],
    [0.1, -0.4, 0.2, 0.3, 0.4],
    [0.5, 0.1, 0.3, 0.4, 0.6],
    [0.0; 5],
    [0.0; 5],
    [0.0; 5],
    [0.0; 5],
    [0.0; 5],
];

/// `(φ, β_XZ)` of the four standard settings (1-based).
pub fn setting(index: usize) -> Result<(f64, f64)> {
    match index {
        1 => Ok((1.0, 1.0)),
        2 => Ok((1.0, 2.0)),
        3 => Ok((2.0, 1.0)),
        4 => Ok((2.0, 2.0)),
        _ => Err(MsmError::config("setting", format!("must be 1-4, got {index}"))),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    /// Grid side; `S = grid_side²`.
    pub grid_side: usize,
    /// Columns of `X` including the intercept.
    pub n_exposures: usize,
    pub n_outcomes: usize,
    pub n_u: usize,
    pub phi: f64,
    pub beta_xz: f64,
    /// Apply the Gaussian kernel to the latent factors (`G = I` otherwise).
    pub smooth: bool,
    pub lambda_u: f64,
    pub lambda_x: f64,
    pub lambda_theta: f64,
    pub lambda_v: f64,
    pub sigma2_x: f64,
    pub sigma2_theta: f64,
    pub sigma2_u: f64,
    pub tau2: Vec<f64>,
    pub rho1: f64,
    pub rho2: f64,
    /// `n_u x (E − 1)`.
    pub b1: DMatrix<f64>,
    /// `n_u x R`.
    pub b2: DMatrix<f64>,
    /// `E x R`, intercept in row 0.
    pub beta: DMatrix<f64>,
    pub seed: u64,
}

fn uniform_matrix(rows: usize, cols: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = rng_from_seed(seed);
    DMatrix::from_fn(rows, cols, |_, _| rng.random::<f64>())
}

impl SimulationConfig {
    /// Full-size design: 20 x 20 grid, nine exposures plus an intercept,
    /// five outcomes, ten latent factors, setting 1.
    pub fn full_size(seed: u64) -> Self {
        let beta = DMatrix::from_fn(10, 5, |e, r| FULL_BETA[e][r]);
        Self::with_beta(20, 10, beta, seed)
    }

    /// Reduced design: intercept, two active and one null exposure, three
    /// outcomes.
    pub fn scaled(grid_side: usize, seed: u64) -> Self {
        let rows = [0usize, 1, 2, 5];
        let beta = DMatrix::from_fn(4, 3, |e, r| FULL_BETA[rows[e]][r]);
        Self::with_beta(grid_side, 10, beta, seed)
    }

    /// Standard constants with the given coefficients; `B1`, `B2` drawn
    /// from `Uniform(0, 1)` with a stream derived from `seed`.
    pub fn with_beta(grid_side: usize, n_u: usize, beta: DMatrix<f64>, seed: u64) -> Self {
        let (e, r) = beta.shape();
        Self {
            grid_side,
            n_exposures: e,
            n_outcomes: r,
            n_u,
            phi: 1.0,
            beta_xz: 1.0,
            smooth: true,
            lambda_u: 0.9999,
            lambda_x: 0.9,
            lambda_theta: 0.9,
            lambda_v: 0.9999,
            sigma2_x: 3.0,
            sigma2_theta: 2.0,
            sigma2_u: 16.0,
            tau2: vec![4.0; r],
            rho1: 0.9,
            rho2: 0.9,
            b1: uniform_matrix(n_u, e.saturating_sub(1), derive_seed(seed, u64::MAX)),
            b2: uniform_matrix(n_u, r, derive_seed(seed, u64::MAX - 1)),
            beta,
            seed,
        }
    }

    pub fn with_setting(mut self, index: usize) -> Result<Self> {
        (self.phi, self.beta_xz) = setting(index)?;
        Ok(self)
    }

    pub fn n_sites(&self) -> usize {
        self.grid_side * self.grid_side
    }

    pub fn validate(&self) -> Result<()> {
        let e = self.n_exposures;
        let r = self.n_outcomes;
        if self.grid_side < 2 {
            return Err(MsmError::config("grid_side", "must be at least 2"));
        }
        if e < 2 || r < 1 || self.n_u < 1 {
            return Err(MsmError::config("dims", "need E >= 2 (with intercept), R >= 1, n_u >= 1"));
        }
        if self.b1.shape() != (self.n_u, e - 1) {
            return Err(MsmError::dimension("B1", format!("{}x{}", self.n_u, e - 1), format!("{:?}", self.b1.shape())));
        }
        if self.b2.shape() != (self.n_u, r) {
            return Err(MsmError::dimension("B2", format!("{}x{r}", self.n_u), format!("{:?}", self.b2.shape())));
        }
        if self.beta.shape() != (e, r) {
            return Err(MsmError::dimension("beta", format!("{e}x{r}"), format!("{:?}", self.beta.shape())));
        }
        if self.tau2.len() != r || self.tau2.iter().any(|&t| !(t > 0.0)) {
            return Err(MsmError::config("tau2", "need one positive variance per outcome"));
        }
        for (name, v) in [
            ("sigma2_x", self.sigma2_x),
            ("sigma2_theta", self.sigma2_theta),
            ("sigma2_u", self.sigma2_u),
        ] {
            if !(v > 0.0) {
                return Err(MsmError::config(name, "must be > 0"));
            }
        }
        for (name, v) in [
            ("lambda_u", self.lambda_u),
            ("lambda_x", self.lambda_x),
            ("lambda_theta", self.lambda_theta),
            ("lambda_v", self.lambda_v),
        ] {
            if !(v > 0.0 && v < 1.0) {
                return Err(MsmError::config(name, "must lie in (0, 1)"));
            }
        }
        for (name, v) in [("rho1", self.rho1), ("rho2", self.rho2)] {
            if !(v.abs() < 1.0) {
                return Err(MsmError::config(name, "must lie in (-1, 1)"));
            }
        }
        if self.smooth && !(self.phi > 0.0) {
            return Err(MsmError::config("phi", "must be > 0"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedDataset {
    /// `S x E`, column 0 all ones.
    pub x: DMatrix<f64>,
    pub theta: DMatrix<f64>,
    pub y: DMatrix<f64>,
    pub u: DMatrix<f64>,
    pub beta: DMatrix<f64>,
}

/// Row-normalized Gaussian kernel over the lattice points of a
/// `side x side` grid.
pub fn kernel_matrix(side: usize, phi: f64) -> DMatrix<f64> {
    let pts = grid_coordinates(side, side);
    let s = pts.len();
    let mut g = DMatrix::from_fn(s, s, |i, j| {
        let d2 = (pts[i].0 - pts[j].0).powi(2) + (pts[i].1 - pts[j].1).powi(2);
        (-d2 / (phi * phi)).exp()
    });
    for i in 0..s {
        let total: f64 = g.row(i).sum();
        g.row_mut(i).scale_mut(1.0 / total);
    }
    g
}

/// `Σ_ij = ρ^{|i − j|}`.
pub fn ar1_correlation(n: usize, rho: f64) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |i, j| rho.powi((i as i32 - j as i32).abs()))
}

/// Symmetric square root of a positive semidefinite matrix.
pub fn symmetric_sqrt(m: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(m.clone());
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|v| v.max(0.0).sqrt()));
    &eig.eigenvectors * d * eig.eigenvectors.transpose()
}

/// Precomputed geometry for repeated draws from one configuration.
pub struct Simulator {
    cfg: SimulationConfig,
    basis: SpectralBasis,
    kernel: Option<DMatrix<f64>>,
    s1_half: DMatrix<f64>,
    s2_half: DMatrix<f64>,
}

impl Simulator {
    pub fn new(cfg: SimulationConfig) -> Result<Self> {
        cfg.validate()?;
        let basis = spectral_basis(&AdjacencyGraph::grid(cfg.grid_side, cfg.grid_side)?)?;
        let kernel = cfg.smooth.then(|| kernel_matrix(cfg.grid_side, cfg.phi));
        let s1_half = symmetric_sqrt(&ar1_correlation(cfg.n_exposures - 1, cfg.rho1));
        let s2_half = symmetric_sqrt(&ar1_correlation(cfg.n_outcomes, cfg.rho2));
        Ok(Self {
            cfg,
            basis,
            kernel,
            s1_half,
            s2_half,
        })
    }

    pub fn config(&self) -> &SimulationConfig {
        &self.cfg
    }

    pub fn basis(&self) -> &SpectralBasis {
        &self.basis
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<SimulatedDataset> {
        let c = &self.cfg;
        let s = c.n_sites();
        let v = sample_car_matrix(&CarParams::new(c.sigma2_u, c.lambda_v)?, &self.basis, c.n_u, rng);
        let u = match &self.kernel {
            Some(g) => g * v * c.beta_xz,
            None => v * c.beta_xz,
        };
        let m1 = sample_car_matrix(
            &CarParams::new(c.sigma2_x, c.lambda_x)?,
            &self.basis,
            c.n_exposures - 1,
            rng,
        );
        let m2 = sample_car_matrix(
            &CarParams::new(c.sigma2_theta, c.lambda_theta)?,
            &self.basis,
            c.n_outcomes,
            rng,
        );
        let x_exp = &u * &c.b1 + m1 * &self.s1_half;
        let theta = &u * &c.b2 + m2 * &self.s2_half;
        let mut x = DMatrix::from_element(s, c.n_exposures, 1.0);
        x.view_mut((0, 1), (s, c.n_exposures - 1)).copy_from(&x_exp);
        let mut y = &x * &c.beta + &theta;
        for r in 0..c.n_outcomes {
            let sd = c.tau2[r].sqrt();
            for i in 0..s {
                y[(i, r)] += sd * rng.sample::<f64, _>(StandardNormal);
            }
        }
        Ok(SimulatedDataset {
            x,
            theta,
            y,
            u,
            beta: c.beta.clone(),
        })
    }

    /// Replicate `index` with its own derived RNG stream.
    pub fn replicate(&self, index: u64) -> Result<SimulatedDataset> {
        self.draw(&mut rng_from_seed(derive_seed(self.cfg.seed, index)))
    }
}

/// One dataset from `cfg.seed`.
pub fn generate(cfg: &SimulationConfig) -> Result<SimulatedDataset> {
    Simulator::new(cfg.clone())?.draw(&mut rng_from_seed(cfg.seed))
}

/// Confounding bias `α(w)` (`(E−1) x R`) of a regression of `θ*_i` on
/// `X*_i` at eigenvalue `w`, with unit latent and exposure variances.
pub fn bias_oracle(
    b1: &DMatrix<f64>,
    b2: &DMatrix<f64>,
    s1: &DMatrix<f64>,
    lambda_u: f64,
    lambda_x: f64,
    w: f64,
) -> Result<DMatrix<f64>> {
    bias_oracle_with_variances(b1, b2, s1, lambda_u, lambda_x, 1.0, 1.0, w)
}

/// As [`bias_oracle`] with latent-factor variance `sigma2_u` (including any
/// `β_XZ²` scaling) and exposure-noise variance `sigma2_x`.
#[allow(clippy::too_many_arguments)]
pub fn bias_oracle_with_variances(
    b1: &DMatrix<f64>,
    b2: &DMatrix<f64>,
    s1: &DMatrix<f64>,
    lambda_u: f64,
    lambda_x: f64,
    sigma2_u: f64,
    sigma2_x: f64,
    w: f64,
) -> Result<DMatrix<f64>> {
    if b1.nrows() != b2.nrows() || s1.shape() != (b1.ncols(), b1.ncols()) {
        return Err(MsmError::dimension(
            "bias oracle inputs",
            format!("B1 n_u x E, B2 n_u x R, S1 E x E with E = {}", b1.ncols()),
            format!("{:?}, {:?}, {:?}", b1.shape(), b2.shape(), s1.shape()),
        ));
    }
    let ratio = (sigma2_x * (1.0 - lambda_u + lambda_u * w)) / (sigma2_u * (1.0 - lambda_x + lambda_x * w));
    let bracket = b1.transpose() * b1 + s1 * ratio;
    let lu = bracket.lu();
    lu.solve(&(b1.transpose() * b2))
        .filter(|m| m.iter().all(|v| v.is_finite()))
        .ok_or_else(|| MsmError::Singular(format!("bias oracle bracket is singular at eigenvalue {w}")))
}

/// Per-bin sample correlations of projected exposure and confounder columns.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationBin {
    pub w_low: f64,
    pub w_high: f64,
    pub w_mean: f64,
    pub n_rows: usize,
    /// `E x R` correlations.
    pub pairs: DMatrix<f64>,
    /// Mean over all pairs.
    pub mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationTable {
    /// Bins in ascending eigenvalue order.
    pub bins: Vec<CorrelationBin>,
    /// Whether the mean absolute correlation never increases across bins.
    pub monotone_decreasing: bool,
}

fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let mut sab = 0.0;
    let mut saa = 0.0;
    let mut sbb = 0.0;
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    if saa == 0.0 || sbb == 0.0 {
        0.0
    } else {
        sab / (saa * sbb).sqrt()
    }
}

/// Splits the spectral rows into `n_bins` equal-count eigenvalue bins
/// (bins with fewer than three rows are merged into a neighbour) and
/// correlates every projected exposure column with every projected
/// confounder column within each bin.
pub fn correlation_by_scale(
    x: &DMatrix<f64>,
    theta: &DMatrix<f64>,
    basis: &SpectralBasis,
    n_bins: usize,
) -> Result<CorrelationTable> {
    if n_bins == 0 {
        return Err(MsmError::config("n_bins", "must be at least 1"));
    }
    let xs = basis.project(x)?;
    let ts = basis.project(theta)?;
    let s = basis.n();
    // ascending eigenvalue order is the reverse of the basis order
    let order: Vec<usize> = (0..s).rev().collect();
    let mut edges: Vec<(usize, usize)> = (0..n_bins)
        .map(|b| (b * s / n_bins, (b + 1) * s / n_bins))
        .filter(|(a, b)| b > a)
        .collect();
    let mut merged: Vec<(usize, usize)> = Vec::new();
    for (a, b) in edges.drain(..) {
        match merged.last_mut() {
            Some(last) if last.1 - last.0 < 3 => last.1 = b,
            _ => merged.push((a, b)),
        }
    }
    if merged.len() > 1 && merged.last().is_some_and(|(a, b)| b - a < 3) {
        let (_, b) = merged.pop().unwrap();
        merged.last_mut().unwrap().1 = b;
    }

    let w = basis.eigenvalues();
    let bins: Vec<CorrelationBin> = merged
        .into_iter()
        .map(|(a, b)| {
            let rows: Vec<usize> = order[a..b].to_vec();
            let col = |m: &DMatrix<f64>, j: usize| rows.iter().map(|&i| m[(i, j)]).collect::<Vec<_>>();
            let pairs = DMatrix::from_fn(xs.ncols(), ts.ncols(), |e, r| pearson(&col(&xs, e), &col(&ts, r)));
            let ws: Vec<f64> = rows.iter().map(|&i| w[i]).collect();
            CorrelationBin {
                w_low: ws.iter().copied().fold(f64::INFINITY, f64::min),
                w_high: ws.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                w_mean: ws.iter().sum::<f64>() / ws.len() as f64,
                n_rows: rows.len(),
                mean: pairs.mean(),
                pairs,
            }
        })
        .collect();
    let abs_means: Vec<f64> = bins.iter().map(|b| b.pairs.abs().mean()).collect();
    let monotone_decreasing = abs_means.windows(2).all(|p| p[1] <= p[0]);
    Ok(CorrelationTable {
        bins,
        monotone_decreasing,
    })
}

/// Singular values of `β` and the share of their sum carried by the top two.
pub fn beta_spectrum(beta: &DMatrix<f64>) -> (DVector<f64>, f64) {
    let mut sv: Vec<f64> = beta.clone().svd(false, false).singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    let total: f64 = sv.iter().sum();
    let top2: f64 = sv.iter().take(2).sum();
    (DVector::from_vec(sv), top2 / total)
}
