//! Competing estimators: single-outcome chains, the scale-invariant
//! model, Spatial+ on local spectral rows and ordinary least squares.

use std::fmt;
use std::str::FromStr;

use log::warn;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{MsmError, Result};
use crate::fit::{fit_msm, MsmFit, SpatialData};
use crate::graph::SpectralBasis;
use crate::sampler::{constant_column, ChainConfig};

/// Eigenvalues below this count as the null space of `Q`.
const NULL_TOL: f64 = 1e-9;
/// Relative singular value below which a design is treated as rank deficient.
const RANK_TOL: f64 = 1e-10;
pub const OLS_RIDGE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Method {
    Msm,
    Usm,
    Naive,
    /// Retained fraction of spectral rows.
    SpatialPlus(f64),
    Ols,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::Msm => write!(f, "msm"),
            Method::Usm => write!(f, "usm"),
            Method::Naive => write!(f, "naive"),
            Method::SpatialPlus(p) => write!(f, "spatialplus{p}"),
            Method::Ols => write!(f, "ols"),
        }
    }
}

impl FromStr for Method {
    type Err = MsmError;

    /// `msm`, `usm`, `naive`, `ols`, `spatialplus` (0.8) or `spatialplus0.4`.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase();
        match t.as_str() {
            "msm" => Ok(Method::Msm),
            "usm" => Ok(Method::Usm),
            "naive" => Ok(Method::Naive),
            "ols" => Ok(Method::Ols),
            "spatialplus" | "spatial+" => Ok(Method::SpatialPlus(0.8)),
            _ => {
                let rest = t
                    .strip_prefix("spatialplus")
                    .or_else(|| t.strip_prefix("spatial+"))
                    .ok_or_else(|| MsmError::config("method", format!("unknown method '{s}'")))?;
                let f: f64 = rest
                    .trim_start_matches(['-', '_', ':', '='])
                    .parse()
                    .map_err(|_| MsmError::config("method", format!("bad fraction in '{s}'")))?;
                check_fraction(f)?;
                Ok(Method::SpatialPlus(f))
            }
        }
    }
}

fn check_fraction(f: f64) -> Result<()> {
    if f > 0.0 && f <= 1.0 {
        Ok(())
    } else {
        Err(MsmError::config("fraction", format!("must lie in (0, 1], got {f}")))
    }
}

/// Point estimates with 95% intervals for every exposure/outcome cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineFit {
    pub method: Method,
    pub beta_hat: DMatrix<f64>,
    pub low: DMatrix<f64>,
    pub high: DMatrix<f64>,
    /// Posterior SD or standard error.
    pub sd: DMatrix<f64>,
    /// Effective sample sizes, chain-based methods only.
    pub ess: Option<DMatrix<f64>>,
    pub warnings: Vec<String>,
}

impl BaselineFit {
    pub fn from_msm(method: Method, fit: &MsmFit) -> Self {
        let d = &fit.draws;
        Self {
            method,
            beta_hat: d.posterior_mean(),
            low: d.quantiles(0.025),
            high: d.quantiles(0.975),
            sd: d.posterior_sd(),
            ess: Some(d.ess()),
            warnings: Vec::new(),
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        self.beta_hat.shape()
    }

    pub fn is_finite(&self) -> bool {
        [&self.beta_hat, &self.low, &self.high, &self.sd]
            .iter()
            .all(|m| m.iter().all(|v| v.is_finite()))
    }
}

/// Chain settings for a single outcome. The rank is capped so the
/// identifiability constraint still holds with one outcome.
pub fn usm_config(cfg: &ChainConfig, s: usize, e: usize, outcome: usize) -> ChainConfig {
    let mut c = cfg.clone();
    c.n_factors = 1;
    let max_k = (s / (cfg.n_basis + e + 1)).max(1);
    c.rank = cfg.rank.min(max_k);
    c.seed = cfg.seed.wrapping_add(outcome as u64);
    c
}

/// One chain per outcome.
pub fn fit_usm_chains(
    data: &SpatialData,
    basis: &SpectralBasis,
    cfg: &ChainConfig,
) -> Result<Vec<MsmFit>> {
    (0..data.y.ncols())
        .map(|r| {
            let c = usm_config(cfg, data.n_sites(), data.x.ncols(), r);
            fit_msm(&data.outcome(r), basis, &c)
        })
        .collect()
}

pub fn fit_usm(data: &SpatialData, basis: &SpectralBasis, cfg: &ChainConfig) -> Result<BaselineFit> {
    Ok(collate_usm(&fit_usm_chains(data, basis, cfg)?))
}

/// Stacks single-outcome fits column by column.
pub fn collate_usm(fits: &[MsmFit]) -> BaselineFit {
    let parts: Vec<BaselineFit> = fits.iter().map(|f| BaselineFit::from_msm(Method::Usm, f)).collect();
    let cols = |get: &dyn Fn(&BaselineFit) -> &DMatrix<f64>| {
        DMatrix::from_columns(&parts.iter().map(|p| get(p).column(0).into_owned()).collect::<Vec<_>>())
    };
    BaselineFit {
        method: Method::Usm,
        beta_hat: cols(&|p| &p.beta_hat),
        low: cols(&|p| &p.low),
        high: cols(&|p| &p.high),
        sd: cols(&|p| &p.sd),
        ess: Some(cols(&|p| p.ess.as_ref().expect("chain fit has ess"))),
        warnings: Vec::new(),
    }
}

/// Constant-over-scales coefficients (`L = 1`).
pub fn fit_naive_chain(
    data: &SpatialData,
    basis: &SpectralBasis,
    cfg: &ChainConfig,
) -> Result<MsmFit> {
    let mut c = cfg.clone();
    c.n_basis = 1;
    fit_msm(data, basis, &c)
}

pub fn fit_naive(data: &SpatialData, basis: &SpectralBasis, cfg: &ChainConfig) -> Result<BaselineFit> {
    Ok(BaselineFit::from_msm(Method::Naive, &fit_naive_chain(data, basis, cfg)?))
}

/// Least squares fit of every outcome column on a shared design.
#[derive(Debug, Clone, PartialEq)]
pub struct OlsFit {
    /// `P x R`.
    pub coef: DMatrix<f64>,
    pub se: DMatrix<f64>,
    pub df: usize,
    pub sigma2: Vec<f64>,
    pub ridged: bool,
}

fn numerical_rank(design: &DMatrix<f64>) -> usize {
    let sv = design.clone().svd(false, false).singular_values;
    let max = sv.max();
    sv.iter().filter(|&&v| v > RANK_TOL * max).count()
}

/// Normal-equation least squares. A rank-deficient design gets a ridge of
/// [`OLS_RIDGE`] on the diagonal.
pub fn ols(design: &DMatrix<f64>, y: &DMatrix<f64>) -> Result<OlsFit> {
    let (n, p) = design.shape();
    if y.nrows() != n {
        return Err(MsmError::dimension("ols rows", n, y.nrows()));
    }
    if n <= p {
        return Err(MsmError::config(
            "rows",
            format!("{n} rows cannot support {p} regressors plus a residual variance"),
        ));
    }
    let ridged = numerical_rank(design) < p;
    let mut xtx = design.tr_mul(design);
    if ridged {
        for j in 0..p {
            xtx[(j, j)] += OLS_RIDGE;
        }
    }
    let chol = xtx
        .cholesky()
        .ok_or_else(|| MsmError::Singular("least squares normal equations".into()))?;
    let coef = chol.solve(&design.tr_mul(y));
    let inv = chol.inverse();
    let df = n - p;
    let resid = y - design * &coef;
    let sigma2: Vec<f64> = resid
        .column_iter()
        .map(|c| c.norm_squared() / df as f64)
        .collect();
    let se = DMatrix::from_fn(p, y.ncols(), |j, r| (sigma2[r] * inv[(j, j)]).sqrt());
    Ok(OlsFit {
        coef,
        se,
        df,
        sigma2,
        ridged,
    })
}

/// `[X | Z | 1]`, the intercept only when `X` has no constant column.
pub fn regression_design(data: &SpatialData) -> DMatrix<f64> {
    let mut cols: Vec<DVector<f64>> = data.x.column_iter().map(|c| c.into_owned()).collect();
    if let Some(z) = &data.z {
        cols.extend(z.column_iter().map(|c| c.into_owned()));
    }
    if constant_column(&data.x).is_none() {
        cols.push(DVector::from_element(data.n_sites(), 1.0));
    }
    DMatrix::from_columns(&cols)
}

fn ols_baseline(method: Method, fit: &OlsFit, e: usize, mut warnings: Vec<String>) -> Result<BaselineFit> {
    let t = StudentsT::new(0.0, 1.0, fit.df as f64)
        .map_err(|err| MsmError::config("df", err.to_string()))?
        .inverse_cdf(0.975);
    let beta_hat = fit.coef.rows(0, e).into_owned();
    let sd = fit.se.rows(0, e).into_owned();
    if fit.ridged {
        let msg = format!("{method}: rank-deficient design, ridge {OLS_RIDGE:e} added");
        warn!("{msg}");
        warnings.push(msg);
    }
    Ok(BaselineFit {
        method,
        low: &beta_hat - &sd * t,
        high: &beta_hat + &sd * t,
        beta_hat,
        sd,
        ess: None,
        warnings,
    })
}

pub fn fit_ols(data: &SpatialData) -> Result<BaselineFit> {
    let fit = ols(&regression_design(data), &data.y)?;
    ols_baseline(Method::Ols, &fit, data.x.ncols(), Vec::new())
}

/// Spectral rows kept by Spatial+: the `⌈fraction·S⌉` largest eigenvalues
/// plus the null space of `Q`, which carries the intercept.
pub fn retained_rows(basis: &SpectralBasis, fraction: f64) -> Result<Vec<usize>> {
    check_fraction(fraction)?;
    let s = basis.n();
    let m = ((fraction * s as f64).ceil() as usize).min(s);
    let w = basis.eigenvalues();
    let mut rows: Vec<usize> = (0..m).collect();
    rows.extend((m..s).filter(|&i| w[i].abs() < NULL_TOL));
    Ok(rows)
}

fn check_retained(n_rows: usize, p: usize) -> Result<()> {
    if n_rows < p + 1 {
        return Err(MsmError::config(
            "fraction",
            format!("{n_rows} retained rows is fewer than {} regressors plus one", p),
        ));
    }
    Ok(())
}

/// Least squares on the retained spectral rows.
pub fn spatial_plus_ols(data: &SpatialData, basis: &SpectralBasis, fraction: f64) -> Result<OlsFit> {
    if data.n_sites() != basis.n() {
        return Err(MsmError::dimension("data rows vs graph nodes", basis.n(), data.n_sites()));
    }
    let rows = retained_rows(basis, fraction)?;
    let design = regression_design(data);
    check_retained(rows.len(), design.ncols())?;
    let ds = basis.project(&design)?.select_rows(&rows);
    let ys = basis.project(&data.y)?.select_rows(&rows);
    ols(&ds, &ys)
}

/// Same estimator computed in the spatial domain: the design is replaced
/// by its projection `Γ_sub Γ_subᵀ D` onto the retained eigenvectors.
pub fn spatial_plus_filtered(
    data: &SpatialData,
    basis: &SpectralBasis,
    fraction: f64,
) -> Result<OlsFit> {
    let rows = retained_rows(basis, fraction)?;
    let design = regression_design(data);
    check_retained(rows.len(), design.ncols())?;
    let g = basis.vectors().select_columns(&rows);
    let filtered = &g * g.tr_mul(&design);
    ols(&filtered, &data.y)
}

pub fn fit_spatial_plus(data: &SpatialData, basis: &SpectralBasis, fraction: f64) -> Result<BaselineFit> {
    let fit = spatial_plus_ols(data, basis, fraction)?;
    ols_baseline(Method::SpatialPlus(fraction), &fit, data.x.ncols(), Vec::new())
}

/// Dispatches on `method`.
pub fn fit_method(
    method: Method,
    data: &SpatialData,
    basis: &SpectralBasis,
    cfg: &ChainConfig,
) -> Result<BaselineFit> {
    match method {
        Method::Msm => Ok(BaselineFit::from_msm(Method::Msm, &fit_msm(data, basis, cfg)?)),
        Method::Usm => fit_usm(data, basis, cfg),
        Method::Naive => fit_naive(data, basis, cfg),
        Method::SpatialPlus(f) => fit_spatial_plus(data, basis, f),
        Method::Ols => fit_ols(data),
    }
}
