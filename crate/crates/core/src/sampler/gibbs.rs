use nalgebra::{DMatrix, DVector};

use super::conditionals::{
    auxiliary_conditional, clamp_scale, draw_with_precision, inv_gamma, lambda_log_density,
    latent_conditional, local_scale_conditional, margin_conditional, normal,
    regression_conditional, sigma2_conditional, t3_conditional, tau2_conditional,
};
use super::mh::{adapt_log_step, logit_rw_step};
use super::model::{ChainConfig, ChainState, ModelData};
use crate::car::LmcSpec;
use crate::error::{MsmError, Result};
use crate::rng::{rng_from_seed, MsmRng};
use crate::spline::{basis_for, SplineBasis};

const ETA_RIDGE: f64 = 1e-8;

/// Gibbs/MH sampler for one chain. Owns the data, the state and its RNG
/// stream, and keeps the residual `Y* − mean` up to date.
pub struct Sampler {
    data: ModelData,
    spline: SplineBasis,
    cfg: ChainConfig,
    state: ChainState,
    rng: MsmRng,
    w: Vec<f64>,
    /// `B T1`, `S x K`.
    bt: DMatrix<f64>,
    /// `X* T2`, `S x K`.
    xt: DMatrix<f64>,
    resid: DMatrix<f64>,
    log_step: f64,
    iteration: usize,
    /// `(accepted, proposed)` during and after burn-in.
    mh_counts: [(usize, usize); 2],
}

impl Sampler {
    /// Validates the configuration and starts from [`ChainState::initial`].
    pub fn new(data: ModelData, cfg: ChainConfig) -> Result<Self> {
        cfg.validate(data.n_rows(), data.n_exposures(), data.n_outcomes())?;
        let spline = basis_for(data.eigenvalues(), cfg.n_basis, cfg.spline_axis)?;
        let mut rng = rng_from_seed(cfg.seed);
        let state = ChainState::initial(&data, &cfg, &mut rng)?;
        Self::assemble(data, spline, cfg, state, rng)
    }

    /// Starts from a given state (no rank-bound validation, used for
    /// simulation-based checks).
    pub fn from_state(
        data: ModelData,
        spline: SplineBasis,
        cfg: ChainConfig,
        state: ChainState,
        rng: MsmRng,
    ) -> Result<Self> {
        Self::assemble(data, spline, cfg, state, rng)
    }

    fn assemble(
        data: ModelData,
        spline: SplineBasis,
        cfg: ChainConfig,
        state: ChainState,
        rng: MsmRng,
    ) -> Result<Self> {
        let (l, e, r) = state.tensor.dims();
        if l != spline.n_basis() || e != data.n_exposures() || r != data.n_outcomes() {
            return Err(MsmError::dimension(
                "chain state vs data",
                format!("{}x{}x{}", spline.n_basis(), data.n_exposures(), data.n_outcomes()),
                format!("{l}x{e}x{r}"),
            ));
        }
        if state.cstar.nrows() != data.n_rows() || state.eta.nrows() != data.n_fixed() {
            return Err(MsmError::dimension(
                "latent factors / fixed effects",
                format!("{} rows, {} fixed", data.n_rows(), data.n_fixed()),
                format!("{} rows, {} fixed", state.cstar.nrows(), state.eta.nrows()),
            ));
        }
        let w = data.eigenvalues().iter().copied().collect();
        let mut s = Self {
            bt: DMatrix::zeros(0, 0),
            xt: DMatrix::zeros(0, 0),
            resid: DMatrix::zeros(0, 0),
            log_step: 0.0,
            iteration: 0,
            mh_counts: [(0, 0); 2],
            data,
            spline,
            cfg,
            state,
            rng,
            w,
        };
        s.refresh();
        Ok(s)
    }

    /// Recomputes every cached quantity from the state.
    fn refresh(&mut self) {
        let t = &self.state.tensor;
        self.bt = self.spline.matrix() * &t.t1;
        self.xt = self.data.xstar() * &t.t2;
        let g = self.bt.component_mul(&self.xt);
        self.resid = self.data.ystar()
            - g * t.t3.transpose()
            - self.data.fixed() * &self.state.eta
            - &self.state.cstar * self.state.lmc.loadings().transpose();
    }

    pub fn state(&self) -> &ChainState {
        &self.state
    }

    pub fn data(&self) -> &ModelData {
        &self.data
    }

    pub fn spline(&self) -> &SplineBasis {
        &self.spline
    }

    pub fn config(&self) -> &ChainConfig {
        &self.cfg
    }

    pub fn residual(&self) -> &DMatrix<f64> {
        &self.resid
    }

    pub fn rng_mut(&mut self) -> &mut MsmRng {
        &mut self.rng
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    /// Post-burn-in MH acceptance rate (burn-in rate while still in burn-in).
    pub fn acceptance_rate(&self) -> f64 {
        let (a, p) = if self.mh_counts[1].1 > 0 { self.mh_counts[1] } else { self.mh_counts[0] };
        if p == 0 {
            0.0
        } else {
            a as f64 / p as f64
        }
    }

    pub fn burn_in_acceptance_rate(&self) -> f64 {
        let (a, p) = self.mh_counts[0];
        if p == 0 {
            0.0
        } else {
            a as f64 / p as f64
        }
    }

    pub fn log_step(&self) -> f64 {
        self.log_step
    }

    pub fn set_log_step(&mut self, v: f64) {
        self.log_step = v;
    }

    /// Replaces the outcomes, keeping the state.
    pub fn set_outcomes(&mut self, ystar: DMatrix<f64>) -> Result<()> {
        self.data = self.data.with_outcomes(ystar)?;
        self.refresh();
        Ok(())
    }

    /// Replaces the whole state.
    pub fn set_state(&mut self, state: ChainState) {
        self.state = state;
        self.refresh();
    }

    fn in_burn_in(&self) -> bool {
        self.iteration < self.cfg.n_burn
    }

    fn nonfinite(&self, component: &str) -> MsmError {
        MsmError::NonFinite {
            iteration: self.iteration,
            component: component.to_string(),
        }
    }

    fn ensure_finite<'a>(&self, values: impl IntoIterator<Item = &'a f64>, component: &str) -> Result<()> {
        if values.into_iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(self.nonfinite(component))
        }
    }

    /// `hr_i = Σ_r T3_rk h_ir / τ_r²` and `q = Σ_r T3_rk² / τ_r²` where `h`
    /// is the residual with rank `k` added back.
    fn rank_projection(&self, k: usize) -> (Vec<f64>, f64) {
        let t3 = &self.state.tensor.t3;
        let tau2 = &self.state.tau2;
        let q: f64 = (0..t3.nrows()).map(|r| t3[(r, k)] * t3[(r, k)] / tau2[r]).sum();
        let hr = (0..self.resid.nrows())
            .map(|i| {
                let g = self.bt[(i, k)] * self.xt[(i, k)];
                let base: f64 = (0..t3.nrows())
                    .map(|r| t3[(r, k)] * self.resid[(i, r)] / tau2[r])
                    .sum();
                base + g * q
            })
            .collect();
        (hr, q)
    }

    /// Updates residuals after `g_k` changed from `g_old`.
    fn apply_rank_change(&mut self, k: usize, g_old: &[f64]) {
        let t3 = &self.state.tensor.t3;
        for i in 0..self.resid.nrows() {
            let dg = self.bt[(i, k)] * self.xt[(i, k)] - g_old[i];
            if dg != 0.0 {
                for r in 0..t3.nrows() {
                    self.resid[(i, r)] -= dg * t3[(r, k)];
                }
            }
        }
    }

    fn g_column(&self, k: usize) -> Vec<f64> {
        (0..self.bt.nrows()).map(|i| self.bt[(i, k)] * self.xt[(i, k)]).collect()
    }

    pub fn update_t1(&mut self) -> Result<()> {
        let n_basis = self.state.tensor.t1.nrows();
        for k in 0..self.state.tensor.rank() {
            let g_old = self.g_column(k);
            let (hr, q) = self.rank_projection(k);
            let xt: Vec<f64> = self.xt.column(k).iter().copied().collect();
            let prior = self.state.horseshoe.lambda1[k];
            for l in 0..n_basis {
                let b_col: Vec<f64> = self.spline.matrix().column(l).iter().copied().collect();
                let bt: Vec<f64> = self.bt.column(k).iter().copied().collect();
                let old = self.state.tensor.t1[(l, k)];
                let (m, v) = margin_conditional(&b_col, &xt, &bt, &hr, q, old, prior)?;
                let new = normal(&mut self.rng, m, v);
                self.state.tensor.t1[(l, k)] = new;
                for (i, &b) in b_col.iter().enumerate() {
                    if b != 0.0 {
                        self.bt[(i, k)] += b * (new - old);
                    }
                }
            }
            self.apply_rank_change(k, &g_old);
        }
        self.ensure_finite(self.state.tensor.t1.iter(), "T1")
    }

    pub fn update_t2(&mut self) -> Result<()> {
        let n_exp = self.state.tensor.t2.nrows();
        for k in 0..self.state.tensor.rank() {
            let g_old = self.g_column(k);
            let (hr, q) = self.rank_projection(k);
            let bt: Vec<f64> = self.bt.column(k).iter().copied().collect();
            for e in 0..n_exp {
                let x_col: Vec<f64> = self.data.xstar().column(e).iter().copied().collect();
                let xt: Vec<f64> = self.xt.column(k).iter().copied().collect();
                let old = self.state.tensor.t2[(e, k)];
                let prior = self.state.horseshoe.lambda2[e];
                let (m, v) = margin_conditional(&x_col, &bt, &xt, &hr, q, old, prior)?;
                let new = normal(&mut self.rng, m, v);
                self.state.tensor.t2[(e, k)] = new;
                for (i, &x) in x_col.iter().enumerate() {
                    if x != 0.0 {
                        self.xt[(i, k)] += x * (new - old);
                    }
                }
            }
            self.apply_rank_change(k, &g_old);
        }
        self.ensure_finite(self.state.tensor.t2.iter(), "T2")
    }

    pub fn update_t3(&mut self) -> Result<()> {
        let n_out = self.state.tensor.t3.nrows();
        let s = self.resid.nrows();
        for k in 0..self.state.tensor.rank() {
            let g = self.g_column(k);
            for r in 0..n_out {
                let old = self.state.tensor.t3[(r, k)];
                let h: Vec<f64> = (0..s).map(|i| self.resid[(i, r)] + g[i] * old).collect();
                let hs = &self.state.horseshoe;
                let (m, v) = t3_conditional(
                    &g,
                    &h,
                    self.state.tau2[r],
                    hs.lambda3[r],
                    hs.tau2_global,
                )?;
                let new = normal(&mut self.rng, m, v);
                self.state.tensor.t3[(r, k)] = new;
                for i in 0..s {
                    self.resid[(i, r)] = h[i] - g[i] * new;
                }
            }
        }
        self.ensure_finite(self.state.tensor.t3.iter(), "T3")
    }

    pub fn update_horseshoe(&mut self) -> Result<()> {
        let t = &self.state.tensor;
        let tau2 = &self.state.tau2;
        let hs = &mut self.state.horseshoe;
        let rng = &mut self.rng;
        let (l, e, r) = t.dims();
        let k = t.rank();

        for j in 0..k {
            let ss: f64 = (0..l).map(|a| t.t1[(a, j)].powi(2)).sum();
            let (a, b) = local_scale_conditional(ss, l, hs.nu1[j]);
            hs.lambda1[j] = clamp_scale(inv_gamma(rng, a, b));
            let (a, b) = auxiliary_conditional(hs.lambda1[j]);
            hs.nu1[j] = clamp_scale(inv_gamma(rng, a, b));
        }
        for j in 0..e {
            let ss: f64 = (0..k).map(|c| t.t2[(j, c)].powi(2)).sum();
            let (a, b) = local_scale_conditional(ss, k, hs.nu2[j]);
            hs.lambda2[j] = clamp_scale(inv_gamma(rng, a, b));
            let (a, b) = auxiliary_conditional(hs.lambda2[j]);
            hs.nu2[j] = clamp_scale(inv_gamma(rng, a, b));
        }
        for j in 0..r {
            let ss: f64 = (0..k).map(|c| t.t3[(j, c)].powi(2)).sum::<f64>()
                / (hs.tau2_global * tau2[j]);
            let (a, b) = local_scale_conditional(ss, k, hs.nu3[j]);
            hs.lambda3[j] = clamp_scale(inv_gamma(rng, a, b));
            let (a, b) = auxiliary_conditional(hs.lambda3[j]);
            hs.nu3[j] = clamp_scale(inv_gamma(rng, a, b));
        }
        let ss: f64 = (0..r)
            .map(|j| (0..k).map(|c| t.t3[(j, c)].powi(2)).sum::<f64>() / (hs.lambda3[j] * tau2[j]))
            .sum();
        let (a, b) = local_scale_conditional(ss, r * k, hs.nu_tau);
        hs.tau2_global = clamp_scale(inv_gamma(rng, a, b));
        let (a, b) = auxiliary_conditional(hs.tau2_global);
        hs.nu_tau = clamp_scale(inv_gamma(rng, a, b));

        if self.state.horseshoe.all_positive() {
            Ok(())
        } else {
            Err(self.nonfinite("horseshoe"))
        }
    }

    pub fn update_eta(&mut self) -> Result<()> {
        let f = self.data.fixed();
        if f.ncols() == 0 {
            return Ok(());
        }
        for r in 0..self.resid.ncols() {
            let e: DVector<f64> = self.resid.column(r) + f * self.state.eta.column(r);
            let (mean, chol) = regression_conditional(
                f,
                &e,
                self.state.tau2[r],
                self.cfg.priors.eta_var,
                ETA_RIDGE,
            )?;
            let draw = draw_with_precision(&mut self.rng, &mean, &chol);
            self.resid.set_column(r, &(e - f * &draw));
            self.state.eta.set_column(r, &draw);
        }
        self.ensure_finite(self.state.eta.iter(), "eta")
    }

    pub fn update_loadings(&mut self) -> Result<()> {
        let n_q = self.state.lmc.n_factors();
        for r in 1..self.resid.ncols() {
            let free: Vec<usize> = (0..r.min(n_q)).collect();
            if free.is_empty() {
                continue;
            }
            let cf = self.state.cstar.select_columns(&free);
            let a_free = DVector::from_iterator(
                free.len(),
                free.iter().map(|&q| self.state.lmc.loadings()[(r, q)]),
            );
            let e: DVector<f64> = self.resid.column(r) + &cf * &a_free;
            let (mean, chol) = regression_conditional(
                &cf,
                &e,
                self.state.tau2[r],
                self.cfg.priors.loading_var,
                0.0,
            )?;
            let draw = draw_with_precision(&mut self.rng, &mean, &chol);
            for (j, &q) in free.iter().enumerate() {
                self.state.lmc.set_loading(r, q, draw[j]);
            }
            self.resid.set_column(r, &(e - &cf * &draw));
        }
        self.ensure_finite(self.state.lmc.loadings().iter(), "A")
    }

    pub fn update_latent(&mut self) -> Result<()> {
        let n_out = self.resid.ncols();
        let lambda = self.state.lmc.lambda();
        for q in 0..self.state.lmc.n_factors() {
            let loads: Vec<f64> = (0..n_out).map(|r| self.state.lmc.loadings()[(r, q)]).collect();
            let sigma2_q = self.state.lmc.sigma2()[q];
            for i in 0..self.resid.nrows() {
                let old = self.state.cstar[(i, q)];
                let e: Vec<f64> = (0..n_out)
                    .map(|r| self.resid[(i, r)] + loads[r] * old)
                    .collect();
                let (m, v) =
                    latent_conditional(&loads, &e, &self.state.tau2, sigma2_q, lambda, self.w[i])?;
                let new = normal(&mut self.rng, m, v);
                self.state.cstar[(i, q)] = new;
                for r in 0..n_out {
                    self.resid[(i, r)] = e[r] - loads[r] * new;
                }
            }
        }
        self.ensure_finite(self.state.cstar.iter(), "C*")
    }

    pub fn update_sigma2(&mut self) -> Result<()> {
        let p = self.cfg.priors;
        let lambda = self.state.lmc.lambda();
        for q in 0..self.state.lmc.n_factors() {
            let c: Vec<f64> = self.state.cstar.column(q).iter().copied().collect();
            let (a, b) = sigma2_conditional(&c, &self.w, lambda, p.sigma_shape, p.sigma_rate);
            let v = inv_gamma(&mut self.rng, a, b);
            if !(v > 0.0 && v.is_finite()) {
                return Err(self.nonfinite("sigma2_q"));
            }
            self.state.lmc.set_sigma2(q, v);
        }
        Ok(())
    }

    pub fn update_tau2(&mut self) -> Result<()> {
        let p = self.cfg.priors;
        let s = self.resid.nrows();
        for r in 0..self.resid.ncols() {
            let ssr: f64 = self.resid.column(r).iter().map(|v| v * v).sum();
            let t3_row: Vec<f64> = self.state.tensor.t3.row(r).iter().copied().collect();
            let hs = &self.state.horseshoe;
            let (a, b) = tau2_conditional(
                ssr,
                s,
                &t3_row,
                hs.lambda3[r],
                hs.tau2_global,
                p.tau_shape,
                p.tau_rate,
            );
            let v = inv_gamma(&mut self.rng, a, b);
            if !(v > 0.0 && v.is_finite()) {
                return Err(self.nonfinite("tau2"));
            }
            self.state.tau2[r] = v;
        }
        Ok(())
    }

    /// One logit random-walk step for `λ_C`; adapts the step size during
    /// burn-in. Returns whether the proposal was accepted.
    pub fn update_lambda(&mut self) -> Result<bool> {
        let cstar = &self.state.cstar;
        let sigma2 = self.state.lmc.sigma2().to_vec();
        let w = &self.w;
        let step = logit_rw_step(&mut self.rng, self.state.lmc.lambda(), self.log_step.exp(), |l| {
            lambda_log_density(cstar, &sigma2, w, l)
        });
        self.state.lmc.set_lambda(step.value);
        if self.in_burn_in() {
            self.log_step =
                adapt_log_step(self.log_step, step.accept_prob, self.cfg.mh_target, self.iteration);
        }
        let phase = usize::from(!self.in_burn_in());
        self.mh_counts[phase].0 += step.accepted as usize;
        self.mh_counts[phase].1 += 1;
        if self.state.lmc.lambda().is_finite() {
            Ok(step.accepted)
        } else {
            Err(self.nonfinite("lambda_C"))
        }
    }

    /// One systematic-scan sweep.
    pub fn sweep(&mut self) -> Result<()> {
        // keep incremental residual updates from drifting
        self.refresh();
        self.update_t1()?;
        self.update_t2()?;
        self.update_t3()?;
        self.update_horseshoe()?;
        self.update_eta()?;
        self.update_loadings()?;
        self.update_latent()?;
        self.update_sigma2()?;
        self.update_tau2()?;
        self.update_lambda()?;
        self.iteration += 1;
        Ok(())
    }

    /// Identifiability mask of the loadings.
    pub fn mask_holds(&self) -> bool {
        LmcSpec::new(
            self.state.lmc.loadings().clone(),
            self.state.lmc.sigma2().to_vec(),
            self.state.lmc.lambda(),
        )
        .is_ok()
    }
}
