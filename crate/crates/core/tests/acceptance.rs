//! Acceptance criteria 1-11. Runs as a plain binary so every criterion
//! prints one PASS/FAIL line; exits non-zero if any fails.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use msm_core::baselines::{fit_ols, spatial_plus_filtered, spatial_plus_ols, Method};
use msm_core::car::{sample_car_matrix, spectral_variance, CarParams};
use msm_core::diagnostics::geweke_z;
use msm_core::fit::{prepare, SpatialData};
use msm_core::graph::{ring_eigenpairs, spectral_basis, structure_matrix, AdjacencyGraph};
use msm_core::metrics::{cells, coverage_and_width, holdout_log_score, mab, mse, Split};
use msm_core::rng::{derive_seed, rng_from_seed};
use msm_core::sampler::prior::{sample_prior, simulate_outcomes};
use msm_core::sampler::{ChainConfig, ChainState, ModelData, Priors, Sampler};
use msm_core::simulation::{ar1_correlation, bias_oracle, SimulationConfig, Simulator};
use msm_core::spline::{basis_for, SplineAxis};
use msm_core::study::{aggregate, fit_replicates, run_sensitivity, StudyConfig, StudyReport};
use msm_core::tensor::check_rank_constraint;
use msm_core::MsmError;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn within(t: Duration, limit_s: f64) -> bool {
    t.as_secs_f64() < limit_s
}

fn normal<R: Rng>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

/// Ring eigenvalues and analytic eigenspaces.
fn criterion_1() -> Outcome {
    let start = Instant::now();
    let n = 50;
    let basis = spectral_basis(&AdjacencyGraph::ring(n).unwrap()).unwrap();
    let mut analytic: Vec<f64> = (0..n)
        .map(|k| 2.0 - 2.0 * (2.0 * PI * k as f64 / n as f64).cos())
        .collect();
    analytic.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let eig_err = analytic
        .iter()
        .zip(basis.eigenvalues().iter())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let mut resid: f64 = 0.0;
    for pair in ring_eigenpairs(n).unwrap() {
        let idx: Vec<usize> = (0..n)
            .filter(|&i| (basis.eigenvalues()[i] - pair.eigenvalue).abs() < 1e-8)
            .collect();
        let g = basis.vectors().select_columns(&idx);
        for v in &pair.vectors {
            let r = v - &g * g.tr_mul(v);
            resid = resid.max(r.norm());
        }
    }
    let t = start.elapsed();
    outcome(
        eig_err < 1e-10 && resid < 1e-8 && within(t, 1.0),
        format!("max eigenvalue error {eig_err:.2e}, subspace residual {resid:.2e}, {t:.2?}"),
    )
}

/// Spectral variances of CAR draws generated through the precision
/// Cholesky factor, independently of the eigen-based sampler.
fn criterion_2() -> Outcome {
    let start = Instant::now();
    let (sigma2, lambda, n_draws) = (2.0, 0.9, 5000);
    let g = AdjacencyGraph::grid(10, 10).unwrap();
    let basis = spectral_basis(&g).unwrap();
    let q = structure_matrix(&g).as_matrix().clone();
    let s = q.nrows();
    let prec = (DMatrix::identity(s, s) * (1.0 - lambda) + q * lambda) / sigma2;
    let chol = prec.cholesky().unwrap();
    let l_t = chol.l().transpose();
    let mut rng = rng_from_seed(202);
    let z = DMatrix::from_fn(s, n_draws, |_, _| normal(&mut rng));
    // x = L^{-T} z has covariance prec^{-1}
    let x = l_t.solve_upper_triangular(&z).unwrap();
    let xs = basis.vectors().tr_mul(&x);
    let chi = ChiSquared::new(n_draws as f64).unwrap();
    let (lo, hi) = (chi.inverse_cdf(0.005), chi.inverse_cdf(0.995));
    let mut violations = 0;
    for i in 0..s {
        let v = spectral_variance(sigma2, lambda, basis.eigenvalues()[i].max(0.0));
        let stat = xs.row(i).norm_squared() / v;
        if stat < lo || stat > hi {
            violations += 1;
        }
    }
    let t = start.elapsed();
    outcome(
        violations <= 3 && within(t, 10.0),
        format!("{violations} of {s} eigenvalues outside 99% chi-square band, {t:.2?}"),
    )
}

/// Monte Carlo regression slopes against the closed-form bias.
fn criterion_3() -> Outcome {
    let start = Instant::now();
    let (n_u, e1, r) = (4, 3, 2);
    let beta = DMatrix::from_element(e1 + 1, r, 0.0);
    let mut cfg = SimulationConfig::with_beta(6, n_u, beta, 33);
    cfg.smooth = false;
    cfg.sigma2_u = 1.0;
    cfg.sigma2_x = 1.0;
    cfg.sigma2_theta = 1.0;
    cfg.beta_xz = 1.0;
    cfg.lambda_v = cfg.lambda_u;
    let sim = Simulator::new(cfg.clone()).unwrap();
    let basis = sim.basis().clone();
    let s = basis.n();
    let rows: Vec<usize> = (0..10).map(|j| j * (s - 1) / 9).collect();
    let n_rep = 2000;
    let mut xs = vec![DMatrix::zeros(n_rep, e1); rows.len()];
    let mut ts = vec![DMatrix::zeros(n_rep, r); rows.len()];
    for k in 0..n_rep {
        let d = sim.replicate(k as u64).unwrap();
        let xstar = basis.project(&d.x).unwrap();
        let tstar = basis.project(&d.theta).unwrap();
        for (j, &i) in rows.iter().enumerate() {
            for e in 0..e1 {
                xs[j][(k, e)] = xstar[(i, e + 1)];
            }
            for c in 0..r {
                ts[j][(k, c)] = tstar[(i, c)];
            }
        }
    }
    let s1 = ar1_correlation(e1, cfg.rho1);
    let mut worst: f64 = 0.0;
    for (j, &i) in rows.iter().enumerate() {
        let w = basis.eigenvalues()[i];
        let alpha = bias_oracle(&cfg.b1, &cfg.b2, &s1, cfg.lambda_u, cfg.lambda_x, w).unwrap();
        let xtx_inv = (xs[j].transpose() * &xs[j]).try_inverse().unwrap();
        let hat = &xtx_inv * xs[j].transpose() * &ts[j];
        let resid = &ts[j] - &xs[j] * &hat;
        for c in 0..r {
            let s2 = resid.column(c).norm_squared() / (n_rep - e1) as f64;
            for e in 0..e1 {
                let se = (s2 * xtx_inv[(e, e)]).sqrt();
                worst = worst.max((hat[(e, c)] - alpha[(e, c)]).abs() / se);
            }
        }
    }
    // attenuation from the smoothest to the roughest scale, same B1, B2
    let w_max = basis.eigenvalues()[0];
    let a0 = bias_oracle(&cfg.b1, &cfg.b2, &s1, cfg.lambda_u, cfg.lambda_x, 0.0).unwrap().norm();
    let a1 = bias_oracle(&cfg.b1, &cfg.b2, &s1, cfg.lambda_u, cfg.lambda_x, w_max).unwrap().norm();
    // same ratio for the full-size design (nine exposures, ten factors)
    let full = SimulationConfig::full_size(1);
    let s1f = ar1_correlation(full.n_exposures - 1, full.rho1);
    let f0 = bias_oracle(&full.b1, &full.b2, &s1f, 0.9999, 0.9, 0.0).unwrap().norm();
    let f1 = bias_oracle(&full.b1, &full.b2, &s1f, 0.9999, 0.9, w_max).unwrap().norm();
    let t = start.elapsed();
    outcome(
        worst < 3.0 && a1 < 0.25 * a0 && within(t, 60.0),
        format!(
            "max |slope - oracle| = {worst:.2} SE over 10 eigenvalues; |alpha(w_max)|/|alpha(0)| = {:.4} \
             (full-size B1, B2: {:.4}), {t:.2?}",
            a1 / a0,
            f1 / f0
        ),
    )
}

/// Geweke joint-distribution test.
fn criterion_4() -> Outcome {
    let start = Instant::now();
    let side = 6;
    let basis = spectral_basis(&AdjacencyGraph::grid(side, side).unwrap()).unwrap();
    let s = basis.n();
    let mut rng = rng_from_seed(404);
    let x = DMatrix::from_fn(s, 2, |_, j| if j == 0 { 1.0 } else { normal(&mut rng) });
    let xstar = basis.project(&x).unwrap();
    let w = basis.eigenvalues().clone();
    let data = ModelData::new(DMatrix::zeros(s, 2), xstar, DMatrix::zeros(s, 0), w.clone()).unwrap();
    let cfg = ChainConfig {
        n_iter: 50_000,
        n_burn: 0,
        n_basis: 4,
        rank: 2,
        n_factors: 1,
        priors: Priors {
            tau_shape: 2.0,
            tau_rate: 2.0,
            sigma_shape: 2.0,
            sigma_rate: 2.0,
            ..Priors::default()
        },
        ..ChainConfig::default()
    };
    cfg.validate(s, 2, 2).unwrap();
    let spline = basis_for(&w, 4, SplineAxis::Eigenvalue).unwrap();
    let n = 50_000;
    let stats = |st: &ChainState| -> Vec<f64> {
        let b = st.beta_local(&spline);
        let mut v: Vec<f64> = b.iter().map(|x| x.atan()).collect();
        v.extend(st.tau2.iter().map(|t| t.ln()));
        v.push(st.lambda_c());
        v
    };
    let mut marginal: Vec<Vec<f64>> = Vec::with_capacity(n);
    for _ in 0..n {
        let st = sample_prior(&data, 4, &cfg, &mut rng).unwrap();
        marginal.push(stats(&st));
    }
    let init = sample_prior(&data, 4, &cfg, &mut rng).unwrap();
    let y0 = simulate_outcomes(&init, &data, &spline, &mut rng);
    let mut sampler = Sampler::from_state(
        data.with_outcomes(y0).unwrap(),
        spline.clone(),
        cfg.clone(),
        init,
        rng_from_seed(405),
    )
    .unwrap();
    let mut successive: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut yrng = rng_from_seed(406);
    for _ in 0..n {
        sampler.sweep().unwrap();
        let y = simulate_outcomes(sampler.state(), sampler.data(), sampler.spline(), &mut yrng);
        sampler.set_outcomes(y).unwrap();
        successive.push(stats(sampler.state()));
    }
    let names = ["atan b00", "atan b10", "atan b01", "atan b11", "log tau2_0", "log tau2_1", "lambda_C"];
    let mut worst = (0.0f64, String::new());
    for (j, name) in names.iter().enumerate() {
        for power in [1, 2] {
            let m: Vec<f64> = marginal.iter().map(|v| v[j].powi(power)).collect();
            let c: Vec<f64> = successive.iter().map(|v| v[j].powi(power)).collect();
            let z = geweke_z(&m, &c);
            if std::env::var("MSM_GEWEKE_VERBOSE").is_ok() {
                let mm = m.iter().sum::<f64>() / n as f64;
                let cm = c.iter().sum::<f64>() / n as f64;
                eprintln!("{name} moment {power}: prior {mm:.4} chain {cm:.4} z {z:.2}");
            }
            if z.abs() > worst.0 {
                worst = (z.abs(), format!("{name} moment {power}"));
            }
        }
    }
    let t = start.elapsed();
    outcome(
        worst.0 < 4.0 && within(t, 600.0),
        format!("max |z| = {:.2} ({}), 14 statistics, {t:.2?}", worst.0, worst.1),
    )
}

/// Coverage on data drawn from the model class without confounding.
fn criterion_5() -> Outcome {
    let start = Instant::now();
    let basis = spectral_basis(&AdjacencyGraph::grid(10, 10).unwrap()).unwrap();
    let s = basis.n();
    let beta = DMatrix::from_row_slice(3, 2, &[0.5, -0.3, 1.0, 0.0, -0.5, 0.8]);
    let loadings = DMatrix::from_row_slice(2, 1, &[1.0, 0.5]);
    let mut hits = 0;
    let mut total = 0;
    for rep in 0..20u64 {
        let mut rng = rng_from_seed(derive_seed(505, rep));
        let xe = sample_car_matrix(&CarParams::new(1.0, 0.9).unwrap(), &basis, 2, &mut rng);
        let mut x = DMatrix::from_element(s, 3, 1.0);
        x.view_mut((0, 1), (s, 2)).copy_from(&xe);
        let c = sample_car_matrix(&CarParams::new(1.0, 0.5).unwrap(), &basis, 1, &mut rng);
        let noise = DMatrix::from_fn(s, 2, |_, _| normal(&mut rng));
        let y = &x * &beta + c * loadings.transpose() + noise;
        let data = SpatialData::new(y, x, None).unwrap();
        let cfg = ChainConfig {
            seed: derive_seed(506, rep),
            ..ChainConfig::default()
        };
        let fit = msm_core::fit::fit_msm(&data, &basis, &cfg).unwrap();
        let lo = fit.draws.quantiles(0.025);
        let hi = fit.draws.quantiles(0.975);
        for e in 0..3 {
            for r in 0..2 {
                total += 1;
                if lo[(e, r)] <= beta[(e, r)] && beta[(e, r)] <= hi[(e, r)] {
                    hits += 1;
                }
            }
        }
    }
    let cov = hits as f64 / total as f64;
    let t = start.elapsed();
    outcome(
        cov >= 0.90 && within(t, 1200.0),
        format!("coverage {cov:.3} ({hits}/{total} cells), {t:.2?}"),
    )
}

/// Scaled simulation study.
fn criterion_6() -> Outcome {
    let start = Instant::now();
    let mut cfg = StudyConfig::scaled(10, 20, 2024);
    cfg.settings = vec![1, 3];
    cfg.methods = vec![Method::Msm, Method::Naive, Method::Usm];
    cfg.skip_intercept = true;
    // one set of fits, aggregated with and without the intercept row
    let mut rep = StudyReport { rows: Vec::new(), counts: Vec::new(), failures: Vec::new() };
    let mut with_int = rep.clone();
    for &setting in &cfg.settings {
        let reps = fit_replicates(&cfg, setting).unwrap();
        aggregate(setting, &cfg.methods, &reps, &cfg.simulation.beta, true, &mut rep);
        aggregate(setting, &cfg.methods, &reps, &cfg.simulation.beta, false, &mut with_int);
    }
    let vi = |m: &str, metric: &str| with_int.value("setting1", m, metric, "all").unwrap();
    let v = |set: &str, m: &str, metric: &str| rep.value(set, m, metric, "all").unwrap();
    let cov1 = v("setting1", "msm", "coverage");
    let cov3 = v("setting3", "msm", "coverage");
    let naive1 = v("setting1", "naive", "coverage");
    let mab_msm = v("setting1", "msm", "mab");
    let mab_naive = v("setting1", "naive", "mab");
    let sd_msm = v("setting1", "msm", "sd");
    let sd_usm = v("setting1", "usm", "sd");
    let a = cov1 >= 0.90 && cov3 >= 0.90;
    let b = naive1 < cov1;
    let c = mab_msm < mab_naive;
    let d = sd_msm < sd_usm;
    let t = start.elapsed();
    let mark = |ok: bool| if ok { "ok" } else { "FAIL" };
    outcome(
        a && b && c && d && rep.failures.is_empty() && within(t, 7200.0),
        format!(
            "(a) MSM coverage {cov1:.3}/{cov3:.3} {}; (b) naive {naive1:.3} < {cov1:.3} {}; \
             (c) MAB msm {mab_msm:.3} < naive {mab_naive:.3} {}; (d) SD msm {sd_msm:.3} < usm {sd_usm:.3} {}; \
             {} failed fits; intercept included: MAB msm {:.3} naive {:.3}, coverage msm {:.3}, {t:.2?}",
            mark(a),
            mark(b),
            mark(c),
            mark(d),
            rep.failures.len(),
            vi("msm", "mab"),
            vi("naive", "mab"),
            vi("msm", "coverage"),
        ),
    )
}

/// Spatial+ computed on spectral rows and with filtered covariates.
fn criterion_7() -> Outcome {
    let start = Instant::now();
    let mut rng = rng_from_seed(707);
    let mut worst_paths: f64 = 0.0;
    let mut worst_full: f64 = 0.0;
    for _ in 0..20 {
        let side = rng.random_range(5..9);
        let e = rng.random_range(2..5);
        let r = rng.random_range(1..4);
        let fraction = rng.random_range(0.5..1.0);
        let basis = spectral_basis(&AdjacencyGraph::grid(side, side).unwrap()).unwrap();
        let s = basis.n();
        let x = DMatrix::from_fn(s, e, |_, j| if j == 0 { 1.0 } else { normal(&mut rng) });
        let y = DMatrix::from_fn(s, r, |_, _| normal(&mut rng));
        let d = SpatialData::new(y, x, None).unwrap();
        let a = spatial_plus_ols(&d, &basis, fraction).unwrap();
        let b = spatial_plus_filtered(&d, &basis, fraction).unwrap();
        worst_paths = worst_paths.max((a.coef - b.coef).amax());
        let full = spatial_plus_ols(&d, &basis, 1.0).unwrap();
        let ols = fit_ols(&d).unwrap();
        worst_full = worst_full.max((full.coef.rows(0, e) - &ols.beta_hat).amax());
    }
    let t = start.elapsed();
    outcome(
        worst_paths < 1e-8 && worst_full < 1e-8 && within(t, 5.0),
        format!("path difference {worst_paths:.2e}, full-fraction vs OLS {worst_full:.2e}, {t:.2?}"),
    )
}

fn criterion_8() -> Outcome {
    let start = Instant::now();
    let bad = check_rank_constraint(400, 5, 9, 387, 5);
    let good = check_rank_constraint(400, 5, 9, 386, 5);
    let mk = |l| ChainConfig {
        n_basis: l,
        rank: 5,
        ..ChainConfig::default()
    };
    let rejected = matches!(mk(387).validate(400, 9, 5), Err(MsmError::RankConstraint(_)));
    let accepted = mk(386).validate(400, 9, 5).is_ok();
    let t = start.elapsed();
    outcome(
        !bad.passes && good.passes && rejected && accepted,
        format!("L=387 rejected: {rejected}, L=386 accepted: {accepted}, {t:.2?}"),
    )
}

/// L x K sensitivity grid.
fn criterion_9() -> Outcome {
    let start = Instant::now();
    let mut cfg = StudyConfig::scaled(10, 10, 909);
    cfg.skip_intercept = true;
    let rows = run_sensitivity(&cfg, &[5, 10], &[2, 5]).unwrap();
    let get = |l: usize, k: usize, metric: &str| {
        rows.iter()
            .find(|r| r.n_basis == l && r.rank == k && r.metric == metric && r.split == "all")
            .unwrap()
            .value
    };
    let mses: Vec<f64> = [(5, 2), (5, 5), (10, 2), (10, 5)]
        .iter()
        .map(|&(l, k)| get(l, k, "mse"))
        .collect();
    let lo = mses.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = mses.iter().cloned().fold(0.0, f64::max);
    let spread = (hi - lo) / lo;
    let cov_ok = [5, 10].iter().all(|&l| get(l, 2, "coverage") <= get(l, 5, "coverage"));
    let t = start.elapsed();
    outcome(
        spread < 0.5 && cov_ok && within(t, 7200.0),
        format!(
            "MSE (L,K)=(5,2) {:.3} (5,5) {:.3} (10,2) {:.3} (10,5) {:.3}, relative spread {spread:.2}; \
             coverage K=2 vs K=5: L=5 {:.3}/{:.3}, L=10 {:.3}/{:.3}; {t:.2?}",
            mses[0],
            mses[1],
            mses[2],
            mses[3],
            get(5, 2, "coverage"),
            get(5, 5, "coverage"),
            get(10, 2, "coverage"),
            get(10, 5, "coverage"),
        ),
    )
}

/// Held-out log score of a richer and a leaner model.
fn criterion_10() -> Outcome {
    let start = Instant::now();
    let sim = Simulator::new(SimulationConfig::scaled(10, 1010)).unwrap();
    let d = sim.replicate(0).unwrap();
    let data = SpatialData::new(d.y, d.x, None).unwrap();
    let prepared = prepare(&data, sim.basis()).unwrap();
    let score = |l: usize, k: usize| {
        let cfg = ChainConfig {
            n_basis: l,
            rank: k,
            seed: 1011,
            ..ChainConfig::default()
        };
        holdout_log_score(&prepared.model, &cfg, 0.2, 1012).unwrap()
    };
    let rich = score(10, 10);
    let lean = score(5, 5);
    let t = start.elapsed();
    outcome(
        rich >= lean - 0.02 && within(t, 1800.0),
        format!("log score (K=10,L=10) {rich:.4} vs (K=5,L=5) {lean:.4}, {t:.2?}"),
    )
}

/// Metric operations against straightforward loops.
fn criterion_11() -> Outcome {
    let start = Instant::now();
    let mut rng = rng_from_seed(1111);
    let mut all_equal = true;
    for _ in 0..50 {
        let truth = DMatrix::from_fn(3, 3, |_, _| if rng.random::<f64>() < 0.3 { 0.0 } else { normal(&mut rng) });
        let est: Vec<DMatrix<f64>> = (0..5).map(|_| DMatrix::from_fn(3, 3, |_, _| normal(&mut rng))).collect();
        let half: Vec<DMatrix<f64>> = (0..5).map(|_| DMatrix::from_fn(3, 3, |_, _| rng.random::<f64>())).collect();
        let lows: Vec<DMatrix<f64>> = est.iter().zip(&half).map(|(e, h)| e - h).collect();
        let highs: Vec<DMatrix<f64>> = est.iter().zip(&half).map(|(e, h)| e + h).collect();
        for split in Split::ALL {
            let cs = cells(&truth, split, None);
            if cs.is_empty() {
                continue;
            }
            let (mut sq, mut hit, mut width, mut sdsum) = (0.0, 0usize, 0.0, 0.0);
            for n in 0..5 {
                for &(e, r) in &cs {
                    let d = est[n][(e, r)] - truth[(e, r)];
                    sq += d * d;
                    if lows[n][(e, r)] <= truth[(e, r)] && truth[(e, r)] <= highs[n][(e, r)] {
                        hit += 1;
                    }
                    width += highs[n][(e, r)] - lows[n][(e, r)];
                    sdsum += half[n][(e, r)];
                }
            }
            let denom = (cs.len() * 5) as f64;
            let mut mab_bf = 0.0;
            for &(e, r) in &cs {
                let mut b = 0.0;
                for n in 0..5 {
                    b += est[n][(e, r)] - truth[(e, r)];
                }
                mab_bf += (b / 5.0).abs();
            }
            mab_bf /= cs.len() as f64;
            let c = coverage_and_width(&lows, &highs, &half, &truth, &cs);
            all_equal &= mse(&est, &truth, &cs) == sq / denom
                && mab(&est, &truth, &cs) == mab_bf
                && c.coverage == hit as f64 / denom
                && c.width == width / denom
                && c.sd == sdsum / denom;
        }
    }
    let truth = DMatrix::from_element(1, 1, 0.0);
    let cs = cells(&truth, Split::All, None);
    let pm = [DMatrix::from_element(1, 1, 0.3), DMatrix::from_element(1, 1, -0.3)];
    let cancel = mab(&pm, &truth, &cs) == 0.0;
    let t = start.elapsed();
    outcome(
        all_equal && cancel,
        format!("brute-force agreement exact: {all_equal}; +0.3/-0.3 MAB is zero: {cancel}; {t:.2?}"),
    )
}

fn main() {
    let only: Option<Vec<usize>> = std::env::var("MSM_ACCEPTANCE_ONLY")
        .ok()
        .map(|v| v.split(',').filter_map(|s| s.trim().parse().ok()).collect());
    let criteria: [(usize, &str, fn() -> Outcome); 11] = [
        (1, "ring eigenpairs", criterion_1),
        (2, "spectral whitening", criterion_2),
        (3, "bias oracle", criterion_3),
        (4, "Geweke joint distribution", criterion_4),
        (5, "self-consistency coverage", criterion_5),
        (6, "scaled simulation study", criterion_6),
        (7, "Spatial+ equivalence", criterion_7),
        (8, "rank-constraint gate", criterion_8),
        (9, "L x K sensitivity grid", criterion_9),
        (10, "log-score ordering", criterion_10),
        (11, "metric oracles", criterion_11),
    ];
    let mut failed = Vec::new();
    for (id, name, f) in criteria {
        if only.as_ref().is_some_and(|o| !o.contains(&id)) {
            continue;
        }
        let o = f();
        println!(
            "criterion {id:>2} {:<4} {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        if !o.pass {
            failed.push(id);
        }
    }
    if !failed.is_empty() {
        println!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
