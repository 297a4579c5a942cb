use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::car::LmcSpec;
use crate::error::{MsmError, Result};
use crate::graph::SpectralBasis;
use crate::spline::{SplineAxis, SplineBasis};
use crate::tensor::{assemble_gamma, beta_local, check_rank_constraint, RankCheck, TensorState};

/// Spectral-domain data: outcomes `Y*`, exposures `X*` (whose coefficients
/// vary by scale) and a fixed-effect design `F*` (intercept and covariates
/// with scale-constant coefficients `η`).
#[derive(Debug, Clone)]
pub struct ModelData {
    ystar: DMatrix<f64>,
    xstar: DMatrix<f64>,
    fixed: DMatrix<f64>,
    eigenvalues: DVector<f64>,
}

/// Column index of a nonzero constant column, if any.
pub fn constant_column(x: &DMatrix<f64>) -> Option<usize> {
    (0..x.ncols()).find(|&j| {
        let c = x.column(j);
        c[0] != 0.0 && c.iter().all(|&v| v == c[0])
    })
}

impl ModelData {
    pub fn new(
        ystar: DMatrix<f64>,
        xstar: DMatrix<f64>,
        fixed: DMatrix<f64>,
        eigenvalues: DVector<f64>,
    ) -> Result<Self> {
        let s = eigenvalues.len();
        for (name, m) in [("Y*", &ystar), ("X*", &xstar), ("fixed design", &fixed)] {
            if m.nrows() != s {
                return Err(MsmError::dimension(format!("{name} rows"), s, m.nrows()));
            }
            if m.iter().any(|v| !v.is_finite()) {
                return Err(MsmError::Contract(format!("{name} contains non-finite values")));
            }
        }
        if ystar.ncols() == 0 {
            return Err(MsmError::config("R", "at least one outcome is required"));
        }
        if xstar.ncols() == 0 {
            return Err(MsmError::config("E", "at least one exposure is required"));
        }
        Ok(Self {
            ystar,
            xstar,
            fixed,
            eigenvalues,
        })
    }

    /// Projects spatial-domain blocks. The projected intercept is added to
    /// the fixed design unless `x` already carries a constant column.
    pub fn from_spatial(
        y: &DMatrix<f64>,
        x: &DMatrix<f64>,
        z: Option<&DMatrix<f64>>,
        basis: &SpectralBasis,
    ) -> Result<Self> {
        let s = basis.n();
        let mut fixed_cols: Vec<DVector<f64>> = Vec::new();
        if constant_column(x).is_none() {
            fixed_cols.push(DVector::from_element(s, 1.0));
        }
        if let Some(z) = z {
            if z.nrows() != s {
                return Err(MsmError::dimension("covariate rows", s, z.nrows()));
            }
            fixed_cols.extend(z.column_iter().map(|c| c.into_owned()));
        }
        let fixed = if fixed_cols.is_empty() {
            DMatrix::zeros(s, 0)
        } else {
            basis.project(&DMatrix::from_columns(&fixed_cols))?
        };
        Self::new(
            basis.project(y)?,
            basis.project(x)?,
            fixed,
            basis.eigenvalues().clone(),
        )
    }

    pub fn ystar(&self) -> &DMatrix<f64> {
        &self.ystar
    }

    pub fn xstar(&self) -> &DMatrix<f64> {
        &self.xstar
    }

    pub fn fixed(&self) -> &DMatrix<f64> {
        &self.fixed
    }

    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    pub fn n_rows(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn n_outcomes(&self) -> usize {
        self.ystar.ncols()
    }

    pub fn n_exposures(&self) -> usize {
        self.xstar.ncols()
    }

    pub fn n_fixed(&self) -> usize {
        self.fixed.ncols()
    }

    /// Same design with different outcomes.
    pub fn with_outcomes(&self, ystar: DMatrix<f64>) -> Result<Self> {
        Self::new(ystar, self.xstar.clone(), self.fixed.clone(), self.eigenvalues.clone())
    }

    /// Keeps only the listed spectral rows.
    pub fn select_rows(&self, rows: &[usize]) -> Result<Self> {
        Self::new(
            self.ystar.select_rows(rows),
            self.xstar.select_rows(rows),
            self.fixed.select_rows(rows),
            self.eigenvalues.select_rows(rows),
        )
    }

    /// Keeps a single outcome column.
    pub fn outcome(&self, r: usize) -> Result<Self> {
        self.with_outcomes(self.ystar.columns(r, 1).into_owned())
    }
}

/// Inverse-gamma and normal prior settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Priors {
    /// Shape and rate of the inverse-gamma prior on each `τ_r²`.
    pub tau_shape: f64,
    pub tau_rate: f64,
    /// Shape and rate of the inverse-gamma prior on each `σ_q²`.
    pub sigma_shape: f64,
    pub sigma_rate: f64,
    /// Prior variance of each free loading.
    pub loading_var: f64,
    /// Prior variance of each fixed-effect coefficient.
    pub eta_var: f64,
}

impl Default for Priors {
    fn default() -> Self {
        Self {
            tau_shape: 0.1,
            tau_rate: 0.1,
            sigma_shape: 0.1,
            sigma_rate: 0.1,
            loading_var: 0.25,
            eta_var: 1e4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainConfig {
    pub n_iter: usize,
    pub n_burn: usize,
    pub thin: usize,
    /// Number of spline basis functions `L` (1 means scale-constant effects).
    pub n_basis: usize,
    /// CP rank `K`.
    pub rank: usize,
    /// Number of latent LMC factors `Q`.
    pub n_factors: usize,
    pub spline_axis: SplineAxis,
    pub seed: u64,
    pub priors: Priors,
    /// Target acceptance rate for the dependence-parameter proposal.
    pub mh_target: f64,
    /// Starting value of the dependence parameter.
    pub lambda_init: f64,
}

impl Default for ChainConfig {
    fn default() -> Self {
        Self {
            n_iter: 5000,
            n_burn: 1000,
            thin: 1,
            n_basis: 10,
            rank: 5,
            n_factors: 1,
            spline_axis: SplineAxis::Eigenvalue,
            seed: 1,
            priors: Priors::default(),
            mh_target: 0.4,
            lambda_init: 0.5,
        }
    }
}

impl ChainConfig {
    pub fn n_draws(&self) -> usize {
        (self.n_iter.saturating_sub(self.n_burn)) / self.thin.max(1)
    }

    /// Checks run lengths, model sizes and the rank bound.
    pub fn validate(&self, s: usize, e: usize, r: usize) -> Result<RankCheck> {
        if self.thin == 0 {
            return Err(MsmError::config("thin", "must be at least 1"));
        }
        if self.n_burn >= self.n_iter {
            return Err(MsmError::config(
                "n_burn",
                format!("burn-in {} must be smaller than n_iter {}", self.n_burn, self.n_iter),
            ));
        }
        if self.n_draws() == 0 {
            return Err(MsmError::config("thin", "no draws would be stored"));
        }
        if self.rank == 0 {
            return Err(MsmError::config("K", "must be at least 1"));
        }
        if self.n_factors > r {
            return Err(MsmError::config(
                "Q",
                format!("Q = {} exceeds the number of outcomes {r}", self.n_factors),
            ));
        }
        if self.n_basis == 0 || (2..4).contains(&self.n_basis) {
            return Err(MsmError::config("L", "must be 1 or at least 4"));
        }
        if !(self.mh_target > 0.0 && self.mh_target < 1.0) {
            return Err(MsmError::config("mh_target", "must lie in (0, 1)"));
        }
        let p = self.priors;
        if [p.tau_shape, p.tau_rate, p.sigma_shape, p.sigma_rate, p.loading_var, p.eta_var]
            .iter()
            .any(|v| !(*v > 0.0))
        {
            return Err(MsmError::config("priors", "all prior parameters must be > 0"));
        }
        let check = check_rank_constraint(s, r, e, self.n_basis, self.rank);
        if !check.passes {
            return Err(MsmError::RankConstraint(check.message));
        }
        Ok(check)
    }
}

/// Local and global scales of the horseshoe hierarchy with their auxiliary
/// variables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HorseshoeState {
    pub lambda1: Vec<f64>,
    pub lambda2: Vec<f64>,
    pub lambda3: Vec<f64>,
    pub nu1: Vec<f64>,
    pub nu2: Vec<f64>,
    pub nu3: Vec<f64>,
    pub tau2_global: f64,
    pub nu_tau: f64,
}

impl HorseshoeState {
    pub fn ones(k: usize, e: usize, r: usize) -> Self {
        Self {
            lambda1: vec![1.0; k],
            lambda2: vec![1.0; e],
            lambda3: vec![1.0; r],
            nu1: vec![1.0; k],
            nu2: vec![1.0; e],
            nu3: vec![1.0; r],
            tau2_global: 1.0,
            nu_tau: 1.0,
        }
    }

    pub fn all_positive(&self) -> bool {
        self.lambda1
            .iter()
            .chain(&self.lambda2)
            .chain(&self.lambda3)
            .chain(&self.nu1)
            .chain(&self.nu2)
            .chain(&self.nu3)
            .chain([&self.tau2_global, &self.nu_tau])
            .all(|&v| v > 0.0 && v.is_finite())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainState {
    pub tensor: TensorState,
    pub horseshoe: HorseshoeState,
    /// Loadings, factor variances and the dependence parameter `λ_C`.
    pub lmc: LmcSpec,
    /// Spectral latent factors, `S x Q`.
    pub cstar: DMatrix<f64>,
    /// Fixed-effect coefficients, `F x R`.
    pub eta: DMatrix<f64>,
    /// Residual variances `τ_r²`.
    pub tau2: Vec<f64>,
}

impl ChainState {
    /// Small random CP factors, unit scales, identity-patterned loadings,
    /// zero latent factors and outcome variances as residual variances.
    pub fn initial<R: Rng + ?Sized>(
        data: &ModelData,
        cfg: &ChainConfig,
        rng: &mut R,
    ) -> Result<Self> {
        let (s, e, r) = (data.n_rows(), data.n_exposures(), data.n_outcomes());
        let k = cfg.rank;
        let mut small = |rows: usize| {
            DMatrix::from_fn(rows, k, |_, _| 0.1 * rng.sample::<f64, _>(StandardNormal))
        };
        let tensor = TensorState::new(small(cfg.n_basis), small(e), small(r))?;
        let tau2 = (0..r)
            .map(|j| {
                let col: Vec<f64> = data.ystar().column(j).iter().copied().collect();
                crate::diagnostics::variance(&col).max(1e-3)
            })
            .collect();
        Ok(Self {
            tensor,
            horseshoe: HorseshoeState::ones(k, e, r),
            lmc: LmcSpec::identity(r, cfg.n_factors, cfg.lambda_init)?,
            cstar: DMatrix::zeros(s, cfg.n_factors),
            eta: DMatrix::zeros(data.n_fixed(), r),
            tau2,
        })
    }

    pub fn lambda_c(&self) -> f64 {
        self.lmc.lambda()
    }

    /// `E x R` local-scale coefficients.
    pub fn beta_local(&self, spline: &SplineBasis) -> DMatrix<f64> {
        beta_local(spline, &assemble_gamma(&self.tensor))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn draw_count() {
        let cfg = ChainConfig {
            n_iter: 5000,
            n_burn: 1000,
            thin: 1,
            ..Default::default()
        };
        assert_eq!(cfg.n_draws(), 4000);
        let cfg = ChainConfig { thin: 3, ..cfg };
        assert_eq!(cfg.n_draws(), 1333);
    }

    #[test]
    fn validation_errors() {
        let base = ChainConfig::default();
        assert!(base.validate(100, 4, 3).is_ok());
        assert!(ChainConfig { n_burn: 5000, ..base.clone() }.validate(100, 4, 3).is_err());
        assert!(ChainConfig { thin: 0, ..base.clone() }.validate(100, 4, 3).is_err());
        assert!(ChainConfig { n_factors: 4, ..base.clone() }.validate(100, 4, 3).is_err());
        assert!(ChainConfig { n_basis: 3, ..base.clone() }.validate(100, 4, 3).is_err());
        let err = ChainConfig { n_basis: 387, rank: 5, ..base }
            .validate(400, 9, 5)
            .unwrap_err();
        assert!(matches!(err, MsmError::RankConstraint(_)));
    }

    #[test]
    fn detects_constant_column() {
        let x = DMatrix::from_row_slice(3, 2, &[0.5, 1.0, 0.2, 1.0, 0.1, 1.0]);
        assert_eq!(constant_column(&x), Some(1));
        assert_eq!(constant_column(&DMatrix::zeros(3, 2)), None);
    }
}
