//! Forward simulation from the joint prior and the likelihood, used for
//! simulation-based calibration of the sampler.

use nalgebra::DMatrix;
use rand::Rng;

use super::conditionals::{clamp_scale, inv_gamma, normal};
use super::model::{ChainConfig, ChainState, HorseshoeState, ModelData};
use crate::car::{spectral_variance, LmcSpec, LAMBDA_MARGIN};
use crate::error::Result;
use crate::spline::SplineBasis;
use crate::tensor::TensorState;

/// `λ | ν ~ IG(1/2, 1/ν)`, `ν ~ IG(1/2, 1)`, so that `√λ` is half-Cauchy.
pub fn sample_half_cauchy_scale<R: Rng + ?Sized>(rng: &mut R) -> (f64, f64) {
    let nu = clamp_scale(inv_gamma(rng, 0.5, 1.0));
    let lambda = clamp_scale(inv_gamma(rng, 0.5, 1.0 / nu));
    (lambda, nu)
}

/// One draw of every parameter from its prior.
pub fn sample_prior<R: Rng + ?Sized>(
    data: &ModelData,
    n_basis: usize,
    cfg: &ChainConfig,
    rng: &mut R,
) -> Result<ChainState> {
    let (s, e, r) = (data.n_rows(), data.n_exposures(), data.n_outcomes());
    let (k, q) = (cfg.rank, cfg.n_factors);
    let p = cfg.priors;

    let mut hs = HorseshoeState::ones(k, e, r);
    for j in 0..k {
        (hs.lambda1[j], hs.nu1[j]) = sample_half_cauchy_scale(rng);
    }
    for j in 0..e {
        (hs.lambda2[j], hs.nu2[j]) = sample_half_cauchy_scale(rng);
    }
    for j in 0..r {
        (hs.lambda3[j], hs.nu3[j]) = sample_half_cauchy_scale(rng);
    }
    (hs.tau2_global, hs.nu_tau) = sample_half_cauchy_scale(rng);

    let tau2: Vec<f64> = (0..r).map(|_| inv_gamma(rng, p.tau_shape, p.tau_rate)).collect();

    let t1 = DMatrix::from_fn(n_basis, k, |_, c| normal(rng, 0.0, hs.lambda1[c]));
    let t2 = DMatrix::from_fn(e, k, |a, _| normal(rng, 0.0, hs.lambda2[a]));
    let t3 = DMatrix::from_fn(r, k, |a, _| {
        normal(rng, 0.0, hs.tau2_global * hs.lambda3[a] * tau2[a])
    });

    let lambda = rng.random_range(LAMBDA_MARGIN..1.0 - LAMBDA_MARGIN);
    let sigma2: Vec<f64> = (0..q).map(|_| inv_gamma(rng, p.sigma_shape, p.sigma_rate)).collect();
    let loadings = DMatrix::from_fn(r, q, |a, b| match a.cmp(&b) {
        std::cmp::Ordering::Equal => 1.0,
        std::cmp::Ordering::Less => 0.0,
        std::cmp::Ordering::Greater => normal(rng, 0.0, p.loading_var),
    });
    let w = data.eigenvalues();
    let cstar = DMatrix::from_fn(s, q, |i, b| {
        normal(rng, 0.0, spectral_variance(sigma2[b], lambda, w[i].max(0.0)))
    });
    let eta = DMatrix::from_fn(data.n_fixed(), r, |_, _| normal(rng, 0.0, p.eta_var));

    Ok(ChainState {
        tensor: TensorState::new(t1, t2, t3)?,
        horseshoe: hs,
        lmc: LmcSpec::new(loadings, sigma2, lambda)?,
        cstar,
        eta,
        tau2,
    })
}

/// Noise-free mean `Σ_k g_k T3_kᵀ + F η + C* Aᵀ` of the spectral outcomes.
pub fn outcome_mean(state: &ChainState, data: &ModelData, spline: &SplineBasis) -> DMatrix<f64> {
    let t = &state.tensor;
    let g = (spline.matrix() * &t.t1).component_mul(&(data.xstar() * &t.t2));
    g * t.t3.transpose() + data.fixed() * &state.eta + &state.cstar * state.lmc.loadings().transpose()
}

/// `Y* ~ N(mean, τ_r²)` independently.
pub fn simulate_outcomes<R: Rng + ?Sized>(
    state: &ChainState,
    data: &ModelData,
    spline: &SplineBasis,
    rng: &mut R,
) -> DMatrix<f64> {
    let mut y = outcome_mean(state, data, spline);
    for r in 0..y.ncols() {
        for i in 0..y.nrows() {
            y[(i, r)] = normal(rng, y[(i, r)], state.tau2[r]);
        }
    }
    y
}
