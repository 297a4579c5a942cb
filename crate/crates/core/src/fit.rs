//! Spatial-domain inputs, exposure standardization and the multiscale fit.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{MsmError, Result};
use crate::graph::SpectralBasis;
use crate::sampler::{constant_column, run_chain, ChainConfig, ModelData, PosteriorDraws};
use crate::spline::{basis_for, SplineBasis};
use crate::tensor::{beta_local, Tensor3};

/// Outcomes `S x R`, exposures `S x E` (optionally with a constant
/// intercept column) and optional covariates `S x P`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialData {
    pub y: DMatrix<f64>,
    pub x: DMatrix<f64>,
    pub z: Option<DMatrix<f64>>,
}

impl SpatialData {
    pub fn new(y: DMatrix<f64>, x: DMatrix<f64>, z: Option<DMatrix<f64>>) -> Result<Self> {
        let s = y.nrows();
        if x.nrows() != s {
            return Err(MsmError::dimension("exposure rows vs outcome rows", s, x.nrows()));
        }
        if let Some(z) = &z {
            if z.nrows() != s {
                return Err(MsmError::dimension("covariate rows vs outcome rows", s, z.nrows()));
            }
        }
        Ok(Self { y, x, z })
    }

    pub fn n_sites(&self) -> usize {
        self.y.nrows()
    }

    /// Single outcome column `r`.
    pub fn outcome(&self, r: usize) -> Self {
        Self {
            y: self.y.columns(r, 1).into_owned(),
            x: self.x.clone(),
            z: self.z.clone(),
        }
    }
}

/// Column centering and scaling. Constant columns are left untouched;
/// centering is only applied when `x` has an intercept column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardization {
    pub means: Vec<f64>,
    pub scales: Vec<f64>,
    /// Index and value of the constant (intercept) column.
    pub intercept: Option<(usize, f64)>,
}

fn col_moments(x: &DMatrix<f64>, j: usize) -> (f64, f64) {
    let n = x.nrows() as f64;
    let m = x.column(j).sum() / n;
    let v = x.column(j).iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1.0).max(1.0);
    (m, v.sqrt())
}

impl Standardization {
    pub fn fit(x: &DMatrix<f64>) -> Result<Self> {
        let intercept = constant_column(x).map(|j| (j, x[(0, j)]));
        let mut means = vec![0.0; x.ncols()];
        let mut scales = vec![1.0; x.ncols()];
        for j in 0..x.ncols() {
            if intercept.is_some_and(|(c, _)| c == j) {
                continue;
            }
            let (m, s) = col_moments(x, j);
            if !(s > 0.0) {
                return Err(MsmError::config(
                    "exposures",
                    format!("column {j} has zero variance and is not an intercept"),
                ));
            }
            if intercept.is_some() {
                means[j] = m;
            }
            scales[j] = s;
        }
        Ok(Self {
            means,
            scales,
            intercept,
        })
    }

    /// Identity transform for `n` columns.
    pub fn identity(n: usize) -> Self {
        Self {
            means: vec![0.0; n],
            scales: vec![1.0; n],
            intercept: None,
        }
    }

    pub fn apply(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        DMatrix::from_fn(x.nrows(), x.ncols(), |i, j| (x[(i, j)] - self.means[j]) / self.scales[j])
    }

    /// Coefficients (rows = columns of `x`) on the original scale.
    pub fn back_transform(&self, b: &DMatrix<f64>) -> DMatrix<f64> {
        let mut out = DMatrix::from_fn(b.nrows(), b.ncols(), |e, r| b[(e, r)] / self.scales[e]);
        if let Some((j, c)) = self.intercept {
            for r in 0..b.ncols() {
                let shift: f64 = (0..b.nrows())
                    .filter(|&e| e != j)
                    .map(|e| self.means[e] * out[(e, r)])
                    .sum();
                out[(j, r)] -= shift / c;
            }
        }
        out
    }

    /// Applies [`back_transform`](Self::back_transform) to every basis slice.
    pub fn back_transform_gamma(&self, g: &Tensor3) -> Tensor3 {
        let (l, e, r) = g.dims();
        let mut out = Tensor3::zeros(l, e, r);
        for a in 0..l {
            let slice = self.back_transform(&g.slice0(a));
            for b in 0..e {
                for c in 0..r {
                    out.set(a, b, c, slice[(b, c)]);
                }
            }
        }
        out
    }
}

/// Spectral data ready for sampling plus the exposure transform.
#[derive(Debug, Clone)]
pub struct PreparedData {
    pub model: ModelData,
    pub standardization: Standardization,
}

/// Standardizes exposures and covariates and projects everything.
pub fn prepare(data: &SpatialData, basis: &SpectralBasis) -> Result<PreparedData> {
    if data.n_sites() != basis.n() {
        return Err(MsmError::dimension("data rows vs graph nodes", basis.n(), data.n_sites()));
    }
    let standardization = Standardization::fit(&data.x)?;
    let x = standardization.apply(&data.x);
    let z = match &data.z {
        Some(z) if z.ncols() > 0 => Some(Standardization::fit(z)?.apply(z)),
        _ => None,
    };
    let model = ModelData::from_spatial(&data.y, &x, z.as_ref(), basis)?;
    Ok(PreparedData {
        model,
        standardization,
    })
}

/// Posterior draws on the original exposure scale.
#[derive(Debug, Clone)]
pub struct MsmFit {
    /// `gamma` and `beta_local` are back-transformed; nuisance traces are
    /// unchanged.
    pub draws: PosteriorDraws,
    pub spline: SplineBasis,
    pub standardization: Standardization,
    pub config: ChainConfig,
}

/// Maps `gamma` to the original scale and recomputes the local slice with
/// the same spline evaluation used everywhere else.
pub fn back_transform_draws(
    draws: &mut PosteriorDraws,
    spline: &SplineBasis,
    st: &Standardization,
) {
    for (g, b) in draws.gamma.iter_mut().zip(draws.beta_local.iter_mut()) {
        *g = st.back_transform_gamma(g);
        *b = beta_local(spline, g);
    }
}

/// Standardize, project, sample, back-transform.
pub fn fit_msm(data: &SpatialData, basis: &SpectralBasis, cfg: &ChainConfig) -> Result<MsmFit> {
    let prepared = prepare(data, basis)?;
    let spline = basis_for(prepared.model.eigenvalues(), cfg.n_basis, cfg.spline_axis)?;
    let mut draws = run_chain(&prepared.model, cfg)?;
    back_transform_draws(&mut draws, &spline, &prepared.standardization);
    Ok(MsmFit {
        draws,
        spline,
        standardization: prepared.standardization,
        config: cfg.clone(),
    })
}
