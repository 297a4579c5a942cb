//! Gibbs sampler with a Metropolis-Hastings step for the latent-factor
//! dependence parameter.

pub mod conditionals;
mod draws;
mod gibbs;
pub mod mh;
mod model;
pub mod prior;

pub use draws::{CellSummary, PosteriorDraws};
pub use gibbs::Sampler;
pub use model::{
    constant_column, ChainConfig, ChainState, HorseshoeState, ModelData, Priors,
};

use crate::error::Result;
use crate::tensor::assemble_gamma;

/// Copies the current state into the draw store.
pub fn record(sampler: &Sampler, draws: &mut PosteriorDraws) {
    let st = sampler.state();
    let gamma = assemble_gamma(&st.tensor);
    draws.iterations.push(sampler.iteration());
    draws
        .beta_local
        .push(crate::tensor::beta_local(sampler.spline(), &gamma));
    draws.gamma.push(gamma);
    draws.eta.push(st.eta.clone());
    draws.loadings.push(st.lmc.loadings().clone());
    draws.tau2.push(st.tau2.clone());
    draws.sigma2.push(st.lmc.sigma2().to_vec());
    draws.lambda_c.push(st.lmc.lambda());
    draws.tau2_global.push(st.horseshoe.tau2_global);
}

/// Runs `n_iter` sweeps and keeps every `thin`-th draw after burn-in.
pub fn run_chain(data: &ModelData, cfg: &ChainConfig) -> Result<PosteriorDraws> {
    let mut sampler = Sampler::new(data.clone(), cfg.clone())?;
    let mut draws = PosteriorDraws::default();
    for it in 0..cfg.n_iter {
        sampler.sweep()?;
        if it >= cfg.n_burn && (it + 1 - cfg.n_burn) % cfg.thin == 0 {
            record(&sampler, &mut draws);
        }
        if it + 1 == cfg.n_burn {
            log::debug!(
                "burn-in done: MH acceptance {:.3}, log step {:.3}",
                sampler.burn_in_acceptance_rate(),
                sampler.log_step()
            );
        }
    }
    draws.acceptance_rate = sampler.acceptance_rate();
    draws.burn_in_acceptance_rate = sampler.burn_in_acceptance_rate();
    Ok(draws)
}
