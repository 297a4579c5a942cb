//! Property tests over random inputs.

use nalgebra::DMatrix;
use proptest::prelude::*;

use msm_core::baselines::{fit_ols, spatial_plus_filtered, spatial_plus_ols};
use msm_core::car::{lmc_assemble, spectral_variance, LmcSpec};
use msm_core::fit::SpatialData;
use msm_core::graph::{spectral_basis, structure_matrix, AdjacencyGraph};
use msm_core::metrics::{cells, coverage_and_width, mab, mean_abs_error, mse, Split};
use msm_core::rng::rng_from_seed;
use msm_core::sampler::{ChainConfig, Sampler, ModelData};
use msm_core::spline::make_spline_basis;
use msm_core::tensor::{assemble_beta_tilde, assemble_gamma, beta_local, check_rank_constraint, TensorState};

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = DMatrix<f64>> {
    prop::collection::vec(-3.0..3.0f64, rows * cols).prop_map(move |v| DMatrix::from_vec(rows, cols, v))
}

fn random_graph() -> impl Strategy<Value = AdjacencyGraph> {
    (3usize..12).prop_flat_map(|n| {
        prop::collection::vec((0..n, 0..n), 0..3 * n).prop_map(move |pairs| {
            let edges: Vec<(usize, usize)> = pairs.into_iter().filter(|(a, b)| a != b).collect();
            AdjacencyGraph::new(n, edges).unwrap()
        })
    })
}

/// Replicate estimates, interval half-widths and a truth with exact zeros.
fn study(e: usize, r: usize, n: usize) -> impl Strategy<Value = (Vec<DMatrix<f64>>, Vec<DMatrix<f64>>, DMatrix<f64>)> {
    (
        prop::collection::vec(matrix(e, r), n),
        prop::collection::vec(
            prop::collection::vec(0.0..2.0f64, e * r).prop_map(move |v| DMatrix::from_vec(e, r, v)),
            n,
        ),
        prop::collection::vec(prop_oneof![Just(0.0), -2.0..2.0f64], e * r).prop_map(move |v| DMatrix::from_vec(e, r, v)),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn structure_matrix_rows_sum_to_zero_and_psd(g in random_graph()) {
        let q = structure_matrix(&g).as_matrix().clone();
        for i in 0..q.nrows() {
            prop_assert!(q.row(i).sum().abs() < 1e-12);
            prop_assert_eq!(q[(i, i)], g.degrees()[i] as f64);
        }
        prop_assert!(q.clone().symmetric_eigenvalues().iter().all(|&v| v > -1e-10));
    }

    #[test]
    fn spectral_basis_is_orthonormal_and_sorted(g in random_graph()) {
        let b = spectral_basis(&g).unwrap();
        let n = b.n();
        let gamma = b.vectors();
        prop_assert!((gamma.tr_mul(gamma) - DMatrix::identity(n, n)).amax() < 1e-10);
        let q = structure_matrix(&g).as_matrix().clone();
        let lhs = &q * gamma;
        let rhs = gamma * DMatrix::from_diagonal(b.eigenvalues());
        prop_assert!((lhs - rhs).amax() < 1e-8);
        let w = b.eigenvalues();
        prop_assert!(w.iter().zip(w.iter().skip(1)).all(|(a, c)| a >= c));
        prop_assert!(w.iter().all(|&v| v >= -1e-10));
        prop_assert_eq!(b.n_zero_eigenvalues(1e-8), g.n_components());
    }

    #[test]
    fn projection_is_an_isometry(m in matrix(16, 3)) {
        let b = spectral_basis(&AdjacencyGraph::grid(4, 4).unwrap()).unwrap();
        let p = b.project(&m).unwrap();
        prop_assert!((p.norm() - m.norm()).abs() < 1e-10);
        prop_assert!((b.back_project(&p).unwrap() - m).amax() < 1e-10);
    }

    #[test]
    fn car_variance_decreases_with_eigenvalue(sigma2 in 0.1..5.0f64, lambda in 0.01..0.99f64, w in 0.0..8.0f64, dw in 0.01..2.0f64) {
        prop_assert!(spectral_variance(sigma2, lambda, w + dw) < spectral_variance(sigma2, lambda, w));
    }

    #[test]
    fn lmc_is_linear(a in matrix(3, 2), c1 in matrix(10, 2), c2 in matrix(10, 2)) {
        let mut load = a;
        load[(0, 0)] = 1.0;
        load[(1, 1)] = 1.0;
        load[(0, 1)] = 0.0;
        let spec = LmcSpec::new(load, vec![1.0, 2.0], 0.5).unwrap();
        prop_assert!(spec.mask_holds());
        let lhs = lmc_assemble(&spec, &(&c1 + &c2)).unwrap();
        let rhs = lmc_assemble(&spec, &c1).unwrap() + lmc_assemble(&spec, &c2).unwrap();
        prop_assert!((lhs - rhs).amax() < 1e-12);
    }

    #[test]
    fn spline_rows_partition_unity(ws in prop::collection::vec(0.0..8.0f64, 6..30), l in 4usize..9) {
        let mut ws = ws;
        ws.sort_by(|a, b| b.partial_cmp(a).unwrap());
        ws.dedup();
        prop_assume!(ws.len() > l && ws[0] - ws[ws.len() - 1] > 1e-6);
        let b = make_spline_basis(&nalgebra::DVector::from_vec(ws), l).unwrap();
        for i in 0..b.n_rows() {
            prop_assert!((b.matrix().row(i).sum() - 1.0).abs() < 1e-12);
            prop_assert!(b.matrix().row(i).iter().all(|&v| v >= 0.0));
        }
    }

    #[test]
    fn beta_tilde_matches_factors(l in 4usize..6, e in 1usize..4, r in 1usize..4, k in 1usize..4, seed in 0u64..1000) {
        use rand::Rng;
        let mut rng = rng_from_seed(seed);
        let mut m = |a: usize, b: usize| DMatrix::from_fn(a, b, |_, _| rng.random_range(-1.0..1.0));
        let t = TensorState::new(m(l, k), m(e, k), m(r, k)).unwrap();
        let w = nalgebra::DVector::from_fn(12, |i, _| 6.0 - 0.5 * i as f64);
        let basis = make_spline_basis(&w, l).unwrap();
        let gamma = assemble_gamma(&t);
        let bt = assemble_beta_tilde(&basis, &gamma).unwrap();
        for i in 0..12 {
            for a in 0..e {
                for c in 0..r {
                    let mut direct = 0.0;
                    for j in 0..l {
                        for q in 0..k {
                            direct += basis.matrix()[(i, j)] * t.t1[(j, q)] * t.t2[(a, q)] * t.t3[(c, q)];
                        }
                    }
                    prop_assert!((bt.beta_tilde.get(i, a, c) - direct).abs() < 1e-12);
                }
            }
        }
        let local = beta_local(&basis, &gamma);
        for a in 0..e {
            for c in 0..r {
                prop_assert!((local[(a, c)] - bt.beta_tilde.get(0, a, c)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rank_gate_is_monotone_in_l(s in 20usize..500, r in 1usize..6, e in 1usize..10, k in 1usize..6, l in 4usize..60) {
        if check_rank_constraint(s, r, e, l + 1, k).passes {
            prop_assert!(check_rank_constraint(s, r, e, l, k).passes);
        }
    }

    #[test]
    fn mab_bounded_by_mean_abs_error((est, _half, truth) in study(3, 3, 5)) {
        for split in Split::ALL {
            let cs = cells(&truth, split, None);
            prop_assume!(!cs.is_empty());
            let b = mab(&est, &truth, &cs);
            prop_assert!(b <= mean_abs_error(&est, &truth, &cs) + 1e-12);
            prop_assert!(mse(&est, &truth, &cs) + 1e-12 >= b * b);
        }
    }

    #[test]
    fn metrics_ignore_replicate_order((est, half, truth) in study(3, 2, 6), rot in 1usize..6) {
        let lows: Vec<_> = est.iter().zip(&half).map(|(e, h)| e - h).collect();
        let highs: Vec<_> = est.iter().zip(&half).map(|(e, h)| e + h).collect();
        let perm = |v: &[DMatrix<f64>]| -> Vec<DMatrix<f64>> {
            let mut v = v.to_vec();
            v.rotate_left(rot);
            v.reverse();
            v
        };
        let cs = cells(&truth, Split::All, None);
        let a = coverage_and_width(&lows, &highs, &half, &truth, &cs);
        let b = coverage_and_width(&perm(&lows), &perm(&highs), &perm(&half), &truth, &cs);
        prop_assert!((a.coverage - b.coverage).abs() < 1e-12);
        prop_assert!((a.width - b.width).abs() < 1e-12);
        prop_assert!((0.0..=1.0).contains(&a.coverage));
        prop_assert!((mse(&est, &truth, &cs) - mse(&perm(&est), &truth, &cs)).abs() < 1e-12);
        prop_assert!((mab(&est, &truth, &cs) - mab(&perm(&est), &truth, &cs)).abs() < 1e-12);
    }

    #[test]
    fn spatial_plus_paths_agree(seed in 0u64..10_000, fraction in 0.3..1.0f64) {
        use rand::Rng;
        let mut rng = rng_from_seed(seed);
        let basis = spectral_basis(&AdjacencyGraph::grid(5, 5).unwrap()).unwrap();
        let x = DMatrix::from_fn(25, 3, |_, j| if j == 0 { 1.0 } else { rng.random_range(-2.0..2.0) });
        let y = DMatrix::from_fn(25, 2, |_, _| rng.random_range(-2.0..2.0));
        let d = SpatialData::new(y, x, None).unwrap();
        let a = spatial_plus_ols(&d, &basis, fraction).unwrap();
        let b = spatial_plus_filtered(&d, &basis, fraction).unwrap();
        prop_assert!((a.coef - b.coef).amax() < 1e-8);
        let full = spatial_plus_ols(&d, &basis, 1.0).unwrap();
        let ols = fit_ols(&d).unwrap();
        prop_assert!((full.coef.rows(0, 3) - &ols.beta_hat).amax() < 1e-8);
        prop_assert!(ols.low.iter().zip(ols.high.iter()).all(|(l, h)| l.is_finite() && h.is_finite() && l <= h));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    /// Mask on the loadings and positive variances after every sweep, and
    /// identical output for identical seeds.
    #[test]
    fn sweeps_keep_constraints(seed in 0u64..1000) {
        use rand::Rng;
        let mut rng = rng_from_seed(seed);
        let basis = spectral_basis(&AdjacencyGraph::grid(4, 4).unwrap()).unwrap();
        let x = DMatrix::from_fn(16, 2, |_, j| if j == 0 { 1.0 } else { rng.random_range(-1.0..1.0) });
        let y = DMatrix::from_fn(16, 3, |_, _| rng.random_range(-2.0..2.0));
        let data = ModelData::new(
            basis.project(&y).unwrap(),
            basis.project(&x).unwrap(),
            DMatrix::zeros(16, 0),
            basis.eigenvalues().clone(),
        ).unwrap();
        let cfg = ChainConfig { n_iter: 40, n_burn: 10, n_basis: 4, rank: 2, n_factors: 2, seed, ..ChainConfig::default() };
        let run = || {
            let mut s = Sampler::new(data.clone(), cfg.clone()).unwrap();
            let mut trace = Vec::new();
            for _ in 0..40 {
                s.sweep().unwrap();
                let st = s.state();
                assert!(s.mask_holds());
                assert!(st.tau2.iter().all(|&v| v > 0.0));
                assert!(st.lmc.sigma2().iter().all(|&v| v > 0.0));
                assert!(st.lambda_c() > 0.0 && st.lambda_c() < 1.0);
                assert!(st.horseshoe.all_positive());
                trace.push(st.tensor.t1[(0, 0)]);
            }
            trace
        };
        prop_assert_eq!(run(), run());
    }
}
