//! Replicate studies: simulate, fit every method, aggregate metrics.

use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{fit_method, BaselineFit, Method};
use crate::error::{MsmError, Result};
use crate::fit::SpatialData;
use crate::metrics::{method_metrics, MetricRow};
use crate::rng::derive_seed;
use crate::sampler::ChainConfig;
use crate::simulation::{SimulationConfig, Simulator};

/// Offset separating chain seeds from data seeds.
const CHAIN_STREAM: u64 = 1 << 32;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    /// Settings 1 to 4 (kernel range and confounding strength).
    pub settings: Vec<usize>,
    pub methods: Vec<Method>,
    pub n_replicates: usize,
    /// Data-generating template; `phi` and `beta_xz` are overwritten per
    /// setting and `seed` per setting.
    pub simulation: SimulationConfig,
    /// Chain template; `seed` is overwritten per replicate.
    pub chain: ChainConfig,
    pub seed: u64,
    /// Leave the intercept row out of the metrics.
    pub skip_intercept: bool,
}

impl StudyConfig {
    /// Reduced design on a `side x side` grid.
    pub fn scaled(side: usize, n_replicates: usize, seed: u64) -> Self {
        Self {
            settings: vec![1],
            methods: vec![Method::Msm],
            n_replicates,
            simulation: SimulationConfig::scaled(side, seed),
            chain: ChainConfig::default(),
            seed,
            skip_intercept: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_replicates == 0 {
            return Err(MsmError::config("N", "at least one replicate is required"));
        }
        if self.methods.is_empty() {
            return Err(MsmError::config("methods", "no methods selected"));
        }
        for &s in &self.settings {
            self.setting_config(s)?.validate()?;
        }
        Ok(())
    }

    pub fn setting_config(&self, setting: usize) -> Result<SimulationConfig> {
        let mut c = self.simulation.clone().with_setting(setting)?;
        c.seed = derive_seed(self.seed, setting as u64);
        Ok(c)
    }

    fn chain_for(&self, setting: usize, replicate: usize) -> ChainConfig {
        let mut c = self.chain.clone();
        c.seed = derive_seed(self.seed ^ CHAIN_STREAM, (setting as u64) << 32 | replicate as u64);
        c
    }
}

/// A fit that did not complete.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub setting: usize,
    pub method: String,
    pub replicate: usize,
    pub error: String,
}

/// Every fit of one replicate.
#[derive(Debug, Clone)]
pub struct ReplicateFits {
    pub replicate: usize,
    pub fits: Vec<(Method, std::result::Result<BaselineFit, String>)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodCount {
    pub setting: usize,
    pub method: String,
    pub succeeded: usize,
    pub failed: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyReport {
    pub rows: Vec<MetricRow>,
    pub counts: Vec<MethodCount>,
    pub failures: Vec<Failure>,
}

impl StudyReport {
    pub fn value(&self, setting: &str, method: &str, metric: &str, split: &str) -> Option<f64> {
        self.find(setting, method, metric, split).map(|r| r.value)
    }

    pub fn find(&self, setting: &str, method: &str, metric: &str, split: &str) -> Option<&MetricRow> {
        self.rows
            .iter()
            .find(|r| r.setting == setting && r.method == method && r.metric == metric && r.split == split)
    }
}

pub fn setting_label(setting: usize) -> String {
    format!("setting{setting}")
}

/// Fits every method on every replicate of one setting, replicates in
/// parallel.
pub fn fit_replicates(cfg: &StudyConfig, setting: usize) -> Result<Vec<ReplicateFits>> {
    let sim = Simulator::new(cfg.setting_config(setting)?)?;
    let out: Vec<ReplicateFits> = (0..cfg.n_replicates)
        .into_par_iter()
        .map(|rep| {
            let fits = match sim.replicate(rep as u64) {
                Ok(d) => {
                    let data = SpatialData {
                        y: d.y,
                        x: d.x,
                        z: None,
                    };
                    let chain = cfg.chain_for(setting, rep);
                    cfg.methods
                        .iter()
                        .map(|&m| {
                            let res = fit_method(m, &data, sim.basis(), &chain).map_err(|e| e.to_string());
                            (m, res)
                        })
                        .collect()
                }
                Err(e) => cfg.methods.iter().map(|&m| (m, Err(e.to_string()))).collect(),
            };
            ReplicateFits { replicate: rep, fits }
        })
        .collect();
    Ok(out)
}

/// Metrics of already-computed fits for one setting.
pub fn aggregate(
    setting: usize,
    methods: &[Method],
    reps: &[ReplicateFits],
    truth: &nalgebra::DMatrix<f64>,
    skip_intercept: bool,
    report: &mut StudyReport,
) {
    let label = setting_label(setting);
    let skip = skip_intercept.then_some(0);
    for (j, m) in methods.iter().enumerate() {
        let mut ok = Vec::new();
        let mut failed = 0;
        for rf in reps {
            match &rf.fits[j].1 {
                Ok(f) => ok.push(f.clone()),
                Err(e) => {
                    failed += 1;
                    warn!("{label} {m} replicate {}: {e}", rf.replicate);
                    report.failures.push(Failure {
                        setting,
                        method: m.to_string(),
                        replicate: rf.replicate,
                        error: e.clone(),
                    });
                }
            }
        }
        report.counts.push(MethodCount {
            setting,
            method: m.to_string(),
            succeeded: ok.len(),
            failed,
        });
        report.rows.extend(method_metrics(&label, &m.to_string(), &ok, truth, skip));
    }
}

pub fn run_study(cfg: &StudyConfig) -> Result<StudyReport> {
    cfg.validate()?;
    let mut report = StudyReport {
        rows: Vec::new(),
        counts: Vec::new(),
        failures: Vec::new(),
    };
    for &setting in &cfg.settings {
        info!("setting {setting}: {} replicates", cfg.n_replicates);
        let reps = fit_replicates(cfg, setting)?;
        let truth = cfg.simulation.beta.clone();
        aggregate(setting, &cfg.methods, &reps, &truth, cfg.skip_intercept, &mut report);
    }
    Ok(report)
}

/// One `(L, K)` cell of a sensitivity grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityRow {
    pub n_basis: usize,
    pub rank: usize,
    pub metric: String,
    pub split: String,
    #[serde(serialize_with = "crate::io::sci::f64")]
    pub value: f64,
    #[serde(serialize_with = "crate::io::sci::f64")]
    pub se: f64,
}

/// MSM metrics for every `(L, K)` combination on the first configured
/// setting. All cells see the same datasets and chain seeds.
pub fn run_sensitivity(cfg: &StudyConfig, ls: &[usize], ks: &[usize]) -> Result<Vec<SensitivityRow>> {
    let setting = *cfg
        .settings
        .first()
        .ok_or_else(|| MsmError::config("settings", "no setting selected"))?;
    let mut rows = Vec::new();
    for &l in ls {
        for &k in ks {
            let mut c = cfg.clone();
            c.settings = vec![setting];
            c.methods = vec![Method::Msm];
            c.chain.n_basis = l;
            c.chain.rank = k;
            let rep = run_study(&c)?;
            if !rep.failures.is_empty() {
                warn!("L={l} K={k}: {} failed fits", rep.failures.len());
            }
            rows.extend(rep.rows.into_iter().map(|r| SensitivityRow {
                n_basis: l,
                rank: k,
                metric: r.metric,
                split: r.split,
                value: r.value,
                se: r.se,
            }));
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> StudyConfig {
        let mut c = StudyConfig::scaled(6, 2, 11);
        c.methods = vec![Method::Ols, Method::SpatialPlus(0.8)];
        c.settings = vec![1, 3];
        c
    }

    #[test]
    fn deterministic_under_seed() {
        let a = run_study(&tiny()).unwrap();
        let b = run_study(&tiny()).unwrap();
        assert_eq!(a, b);
        assert!(a.failures.is_empty());
        assert!(a.rows.iter().all(|r| r.value.is_finite() && r.se.is_finite()));
    }

    #[test]
    fn single_replicate_matches_direct_metrics() {
        let mut c = tiny();
        c.n_replicates = 1;
        c.methods = vec![Method::Ols];
        c.settings = vec![1];
        let rep = run_study(&c).unwrap();
        let sim = Simulator::new(c.setting_config(1).unwrap()).unwrap();
        let d = sim.replicate(0).unwrap();
        let fit = crate::baselines::fit_ols(&SpatialData { y: d.y, x: d.x, z: None }).unwrap();
        let direct = method_metrics("setting1", "ols", &[fit], &c.simulation.beta, None);
        assert_eq!(rep.rows, direct);
    }

    #[test]
    fn zero_replicates_rejected() {
        let mut c = tiny();
        c.n_replicates = 0;
        assert!(run_study(&c).is_err());
    }
}
