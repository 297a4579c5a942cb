//! Chain summaries: moments, quantiles, effective sample size, Geweke z.

use statrs::statistics::{Data, OrderStatistics};

pub fn mean(x: &[f64]) -> f64 {
    if x.is_empty() {
        return f64::NAN;
    }
    x.iter().sum::<f64>() / x.len() as f64
}

/// Unbiased sample variance (0 for fewer than two values).
pub fn variance(x: &[f64]) -> f64 {
    if x.len() < 2 {
        return 0.0;
    }
    let m = mean(x);
    x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (x.len() - 1) as f64
}

pub fn sd(x: &[f64]) -> f64 {
    variance(x).sqrt()
}

/// Sample quantile (median-unbiased definition).
pub fn quantile(x: &[f64], p: f64) -> f64 {
    Data::new(x.to_vec()).quantile(p)
}

fn autocovariance(x: &[f64], m: f64, lag: usize) -> f64 {
    let n = x.len();
    (0..n - lag).map(|t| (x[t] - m) * (x[t + lag] - m)).sum::<f64>() / n as f64
}

/// Effective sample size with Geyer's initial positive sequence estimator.
pub fn effective_sample_size(x: &[f64]) -> f64 {
    let n = x.len();
    if n < 4 {
        return n as f64;
    }
    let m = mean(x);
    let c0 = autocovariance(x, m, 0);
    if !(c0 > 0.0) {
        return n as f64;
    }
    let mut sum_pairs = 0.0;
    let mut lag = 0;
    while lag + 1 < n {
        let pair = autocovariance(x, m, lag) + autocovariance(x, m, lag + 1);
        if pair <= 0.0 {
            break;
        }
        sum_pairs += pair;
        lag += 2;
    }
    // tau = -1 + 2 Σ Γ_m / c0 with Γ_m the paired autocovariances
    let tau = (-1.0 + 2.0 * sum_pairs / c0).max(1.0 / n as f64);
    (n as f64 / tau).min(n as f64 * (n as f64).log10().max(1.0))
}

/// Standard error of the mean of an autocorrelated series.
pub fn mcse(x: &[f64]) -> f64 {
    (variance(x) / effective_sample_size(x)).sqrt()
}

/// Two-sample z statistic for equality of means: `iid` is an independent
/// sample, `chain` a correlated one whose variance is ESS-adjusted.
pub fn geweke_z(iid: &[f64], chain: &[f64]) -> f64 {
    let v = variance(iid) / iid.len() as f64 + variance(chain) / effective_sample_size(chain);
    (mean(iid) - mean(chain)) / v.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use rand::Rng;
    use rand_distr::StandardNormal;

    #[test]
    fn moments() {
        let x = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(mean(&x), 2.5);
        assert!((variance(&x) - 5.0 / 3.0).abs() < 1e-15);
        assert_eq!(quantile(&x, 0.0), 1.0);
        assert_eq!(quantile(&x, 1.0), 4.0);
    }

    #[test]
    fn ess_of_iid_is_near_n() {
        let mut rng = rng_from_seed(1);
        let x: Vec<f64> = (0..4000).map(|_| rng.sample(StandardNormal)).collect();
        let ess = effective_sample_size(&x);
        assert!(ess > 3000.0 && ess < 5200.0, "ess {ess}");
    }

    #[test]
    fn ess_of_ar1_matches_theory() {
        // AR(1) with phi: ESS ≈ n (1 - phi) / (1 + phi)
        let phi = 0.8;
        let mut rng = rng_from_seed(2);
        let mut x = vec![0.0; 40000];
        for t in 1..x.len() {
            let z: f64 = rng.sample(StandardNormal);
            x[t] = phi * x[t - 1] + z;
        }
        let expected = 40000.0 * (1.0 - phi) / (1.0 + phi);
        let ess = effective_sample_size(&x);
        assert!((ess / expected - 1.0).abs() < 0.2, "ess {ess} vs {expected}");
    }
}
