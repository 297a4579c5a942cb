//! Leroux CAR processes and the linear model of coregionalization.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{MsmError, Result};
use crate::graph::SpectralBasis;

/// Distance kept between the dependence parameter and the ends of (0, 1).
pub const LAMBDA_MARGIN: f64 = 1e-6;

pub fn clamp_lambda(lambda: f64) -> f64 {
    lambda.clamp(LAMBDA_MARGIN, 1.0 - LAMBDA_MARGIN)
}

/// Variance of the spectral coefficient at eigenvalue `w`:
/// `σ² / (1 − λ + λ w)`.
pub fn spectral_variance(sigma2: f64, lambda: f64, w: f64) -> f64 {
    sigma2 / (1.0 - lambda + lambda * w)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CarParams {
    sigma2: f64,
    lambda: f64,
}

impl CarParams {
    /// `lambda` must lie in `[0, 1]`; it is clamped into the open interval.
    pub fn new(sigma2: f64, lambda: f64) -> Result<Self> {
        if !(sigma2 > 0.0 && sigma2.is_finite()) {
            return Err(MsmError::config("sigma2", format!("must be > 0, got {sigma2}")));
        }
        if !(0.0..=1.0).contains(&lambda) {
            return Err(MsmError::config(
                "lambda",
                format!("must lie in (0, 1), got {lambda}"),
            ));
        }
        Ok(Self {
            sigma2,
            lambda: clamp_lambda(lambda),
        })
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn spectral_variance(&self, w: f64) -> f64 {
        spectral_variance(self.sigma2, self.lambda, w)
    }
}

/// One draw in the spectral domain: independent normals with the CAR
/// spectral variances.
pub fn sample_car_spectral<R: Rng + ?Sized>(
    p: &CarParams,
    basis: &SpectralBasis,
    rng: &mut R,
) -> DVector<f64> {
    DVector::from_iterator(
        basis.n(),
        basis.eigenvalues().iter().map(|&w| {
            let z: f64 = rng.sample(StandardNormal);
            z * p.spectral_variance(w.max(0.0)).sqrt()
        }),
    )
}

/// One draw of `CAR(σ², λ)` in the spatial domain (`Γ V*`).
pub fn sample_car<R: Rng + ?Sized>(
    p: &CarParams,
    basis: &SpectralBasis,
    rng: &mut R,
) -> DVector<f64> {
    let spectral = sample_car_spectral(p, basis, rng);
    basis.vectors() * spectral
}

/// `m` independent CAR columns.
pub fn sample_car_matrix<R: Rng + ?Sized>(
    p: &CarParams,
    basis: &SpectralBasis,
    m: usize,
    rng: &mut R,
) -> DMatrix<f64> {
    let mut spectral = DMatrix::zeros(basis.n(), m);
    for j in 0..m {
        spectral.set_column(j, &sample_car_spectral(p, basis, rng));
    }
    basis.vectors() * spectral
}

/// Loadings, factor variances and the shared dependence parameter of the LMC.
///
/// `loadings` is `R x Q` with unit diagonal and zeros above it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LmcSpec {
    loadings: DMatrix<f64>,
    sigma2: Vec<f64>,
    lambda: f64,
}

impl LmcSpec {
    pub fn new(loadings: DMatrix<f64>, sigma2: Vec<f64>, lambda: f64) -> Result<Self> {
        let (r, q) = loadings.shape();
        if q > r {
            return Err(MsmError::config(
                "Q",
                format!("number of factors {q} exceeds number of outcomes {r}"),
            ));
        }
        if sigma2.len() != q {
            return Err(MsmError::dimension("LMC factor variances", q, sigma2.len()));
        }
        if sigma2.iter().any(|&s| !(s > 0.0)) {
            return Err(MsmError::config("sigma2_q", "factor variances must be > 0"));
        }
        if !(0.0..=1.0).contains(&lambda) {
            return Err(MsmError::config("lambda_C", format!("must lie in (0,1), got {lambda}")));
        }
        let spec = Self {
            loadings,
            sigma2,
            lambda: clamp_lambda(lambda),
        };
        if !spec.mask_holds() {
            return Err(MsmError::config(
                "A",
                "loadings must have unit diagonal and zero upper triangle",
            ));
        }
        Ok(spec)
    }

    /// Identity-patterned loadings (`A_qq = 1`, everything else 0).
    pub fn identity(n_outcomes: usize, n_factors: usize, lambda: f64) -> Result<Self> {
        let a = DMatrix::from_fn(n_outcomes, n_factors, |r, q| if r == q { 1.0 } else { 0.0 });
        Self::new(a, vec![1.0; n_factors], lambda)
    }

    pub fn loadings(&self) -> &DMatrix<f64> {
        &self.loadings
    }

    pub fn sigma2(&self) -> &[f64] {
        &self.sigma2
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn n_factors(&self) -> usize {
        self.loadings.ncols()
    }

    pub fn n_outcomes(&self) -> usize {
        self.loadings.nrows()
    }

    /// Whether `(r, q)` is a free (sampled) loading.
    pub fn is_free(r: usize, q: usize) -> bool {
        r > q
    }

    pub fn mask_holds(&self) -> bool {
        let (nr, nq) = self.loadings.shape();
        (0..nr).all(|r| {
            (0..nq).all(|q| match r.cmp(&q) {
                std::cmp::Ordering::Equal => self.loadings[(r, q)] == 1.0,
                std::cmp::Ordering::Less => self.loadings[(r, q)] == 0.0,
                std::cmp::Ordering::Greater => self.loadings[(r, q)].is_finite(),
            })
        })
    }

    pub(crate) fn set_loading(&mut self, r: usize, q: usize, value: f64) {
        debug_assert!(Self::is_free(r, q));
        self.loadings[(r, q)] = value;
    }

    pub(crate) fn set_sigma2(&mut self, q: usize, value: f64) {
        self.sigma2[q] = value;
    }

    pub(crate) fn set_lambda(&mut self, value: f64) {
        self.lambda = clamp_lambda(value);
    }

    /// Correlation between outcomes `r` and `r'` at the same location.
    pub fn cross_correlation(&self) -> DMatrix<f64> {
        let a = &self.loadings;
        let cov = DMatrix::from_fn(a.nrows(), a.nrows(), |r, s| {
            (0..a.ncols())
                .map(|q| self.sigma2[q] * a[(r, q)] * a[(s, q)])
                .sum::<f64>()
        });
        DMatrix::from_fn(cov.nrows(), cov.ncols(), |r, s| {
            cov[(r, s)] / (cov[(r, r)] * cov[(s, s)]).sqrt()
        })
    }
}

/// `θ = C Aᵀ`, i.e. `θ_sr = Σ_q A_rq C_sq`.
pub fn lmc_assemble(spec: &LmcSpec, latent: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if latent.ncols() != spec.n_factors() {
        return Err(MsmError::dimension(
            "lmc_assemble latent columns",
            spec.n_factors(),
            latent.ncols(),
        ));
    }
    Ok(latent * spec.loadings().transpose())
}
