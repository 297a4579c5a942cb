//! Random-walk Metropolis-Hastings on the logit of a (0, 1) parameter.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::car::LAMBDA_MARGIN;

pub fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

pub fn expit(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Accept with probability `min(1, exp(log_ratio))`.
pub fn metropolis_accept<R: Rng + ?Sized>(rng: &mut R, log_ratio: f64) -> bool {
    if log_ratio >= 0.0 {
        return true;
    }
    let u: f64 = rng.random();
    u.ln() < log_ratio
}

/// Log acceptance ratio for a logit-scale move from `current` to `proposal`
/// under a uniform prior: the target on the logit scale picks up the
/// Jacobian `λ(1 − λ)`.
pub fn logit_log_ratio(current: f64, proposal: f64, lp_current: f64, lp_proposal: f64) -> f64 {
    (lp_proposal + (proposal * (1.0 - proposal)).ln())
        - (lp_current + (current * (1.0 - current)).ln())
}

/// Outcome of one proposal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MhStep {
    pub value: f64,
    pub accepted: bool,
    /// `min(1, ratio)`, used for step-size adaptation.
    pub accept_prob: f64,
}

/// One logit random-walk step with standard deviation `step`. Proposals
/// outside `[LAMBDA_MARGIN, 1 − LAMBDA_MARGIN]` are rejected, which is the
/// same as a uniform prior on that interval.
pub fn logit_rw_step<R: Rng + ?Sized>(
    rng: &mut R,
    current: f64,
    step: f64,
    log_density: impl Fn(f64) -> f64,
) -> MhStep {
    let z: f64 = rng.sample(StandardNormal);
    let proposal = expit(logit(current) + step * z);
    if !(LAMBDA_MARGIN..=1.0 - LAMBDA_MARGIN).contains(&proposal) {
        return MhStep {
            value: current,
            accepted: false,
            accept_prob: 0.0,
        };
    }
    let log_ratio = logit_log_ratio(current, proposal, log_density(current), log_density(proposal));
    let accept_prob = log_ratio.min(0.0).exp();
    if metropolis_accept(rng, log_ratio) {
        MhStep {
            value: proposal,
            accepted: true,
            accept_prob,
        }
    } else {
        MhStep {
            value: current,
            accepted: false,
            accept_prob,
        }
    }
}

/// Robbins-Monro update of the log step size toward `target` acceptance.
pub fn adapt_log_step(log_step: f64, accept_prob: f64, target: f64, t: usize) -> f64 {
    (log_step + (accept_prob - target) / ((t + 1) as f64).powf(0.6)).clamp(-10.0, 5.0)
}
