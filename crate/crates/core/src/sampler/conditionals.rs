//! Closed-form full conditionals used by the Gibbs sweep, plus the random
//! variate helpers they need. Every `*_conditional` returns `(mean, var)` or
//! `(shape, rate)` so it can be checked against an independent derivation.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

use crate::error::{MsmError, Result};

/// Bounds applied to every horseshoe scale.
pub const SCALE_MIN: f64 = 1e-12;
pub const SCALE_MAX: f64 = 1e12;

pub fn normal<R: Rng + ?Sized>(rng: &mut R, mean: f64, var: f64) -> f64 {
    let z: f64 = rng.sample(StandardNormal);
    mean + var.sqrt() * z
}

/// Inverse-gamma draw with the given shape and rate.
pub fn inv_gamma<R: Rng + ?Sized>(rng: &mut R, shape: f64, rate: f64) -> f64 {
    let g = Gamma::new(shape, 1.0)
        .expect("inverse-gamma shape must be positive")
        .sample(rng);
    rate / g
}

pub fn clamp_scale(v: f64) -> f64 {
    v.clamp(SCALE_MIN, SCALE_MAX)
}

fn checked(mean: f64, var: f64, what: &str) -> Result<(f64, f64)> {
    if !(var > 0.0) || !var.is_finite() {
        return Err(MsmError::Contract(format!(
            "{what}: conditional variance {var} is not positive"
        )));
    }
    Ok((mean, var))
}

/// Conditional of one entry `t` of a CP margin.
///
/// The rank-`k` term at spectral row `i` is `g_i = cur_i * other_i`, where
/// `cur_i = Σ_j design_ij t_j` is the margin being updated (basis or
/// exposure) and `other_i` the complementary margin. `hr_i` is
/// `Σ_r T3_rk h_ir / τ_r²` with `h` the residual excluding rank `k`, and
/// `q = Σ_r T3_rk² / τ_r²`.
pub fn margin_conditional(
    design_col: &[f64],
    other: &[f64],
    cur: &[f64],
    hr: &[f64],
    q: f64,
    t_old: f64,
    prior_var: f64,
) -> Result<(f64, f64)> {
    let mut quad = 0.0;
    let mut lin = 0.0;
    for i in 0..design_col.len() {
        let d = design_col[i];
        if d == 0.0 {
            continue;
        }
        let u = d * other[i];
        let c = cur[i] - d * t_old;
        quad += u * u;
        lin += u * (hr[i] - q * c * other[i]);
    }
    let prec = q * quad + 1.0 / prior_var;
    checked(lin / prec, 1.0 / prec, "CP margin")
}

/// Conditional of `T3_rk` given the rank-`k` term `g` and the residual
/// `h` of outcome `r` excluding rank `k`.
pub fn t3_conditional(
    g: &[f64],
    h: &[f64],
    tau2_r: f64,
    lambda3_r: f64,
    tau2_global: f64,
) -> Result<(f64, f64)> {
    let gg: f64 = g.iter().map(|v| v * v).sum();
    let gh: f64 = g.iter().zip(h).map(|(a, b)| a * b).sum();
    let prec = gg / tau2_r + 1.0 / (lambda3_r * tau2_global * tau2_r);
    checked(gh / tau2_r / prec, 1.0 / prec, "T3")
}

/// `(shape, rate)` of a local scale whose entries `x_j ~ N(0, λ·scale_j)`.
pub fn local_scale_conditional(x2_over_scale: f64, n: usize, nu: f64) -> (f64, f64) {
    (0.5 + n as f64 / 2.0, 1.0 / nu + x2_over_scale / 2.0)
}

/// `(shape, rate)` of an auxiliary variable given its scale.
pub fn auxiliary_conditional(lambda: f64) -> (f64, f64) {
    (1.0, 1.0 + 1.0 / lambda)
}

/// `(shape, rate)` of `τ_r²`.
pub fn tau2_conditional(
    ssr: f64,
    n_rows: usize,
    t3_row: &[f64],
    lambda3_r: f64,
    tau2_global: f64,
    shape0: f64,
    rate0: f64,
) -> (f64, f64) {
    let k = t3_row.len();
    let t3: f64 = t3_row.iter().map(|v| v * v).sum();
    (
        (n_rows + k) as f64 / 2.0 + shape0,
        ssr / 2.0 + t3 / (2.0 * lambda3_r * tau2_global) + rate0,
    )
}

/// `(shape, rate)` of `σ_q²`.
pub fn sigma2_conditional(
    c: &[f64],
    w: &[f64],
    lambda: f64,
    shape0: f64,
    rate0: f64,
) -> (f64, f64) {
    let quad: f64 = c
        .iter()
        .zip(w)
        .map(|(ci, wi)| ci * ci * (1.0 - lambda + lambda * wi.max(0.0)))
        .sum();
    (c.len() as f64 / 2.0 + shape0, quad / 2.0 + rate0)
}

/// Conditional of `C*_iq`: `loads` are `A_rq`, `e` the residual of row `i`
/// with factor `q` added back.
pub fn latent_conditional(
    loads: &[f64],
    e: &[f64],
    tau2: &[f64],
    sigma2_q: f64,
    lambda: f64,
    w_i: f64,
) -> Result<(f64, f64)> {
    let mut prec = (1.0 - lambda + lambda * w_i.max(0.0)) / sigma2_q;
    let mut lin = 0.0;
    for r in 0..loads.len() {
        prec += loads[r] * loads[r] / tau2[r];
        lin += loads[r] * e[r] / tau2[r];
    }
    checked(lin / prec, 1.0 / prec, "latent factor")
}

/// Gaussian linear-regression conditional `N(P⁻¹ Dᵀe / τ², P⁻¹)` with
/// `P = DᵀD / τ² + I / prior_var + ridge I`. Returns the mean and the
/// Cholesky factor of `P`.
pub fn regression_conditional(
    design: &DMatrix<f64>,
    e: &DVector<f64>,
    tau2: f64,
    prior_var: f64,
    ridge: f64,
) -> Result<(DVector<f64>, nalgebra::Cholesky<f64, nalgebra::Dyn>)> {
    let p = design.ncols();
    let prec = design.transpose() * design / tau2
        + DMatrix::identity(p, p) * (1.0 / prior_var + ridge);
    let chol = prec
        .cholesky()
        .ok_or_else(|| MsmError::Singular("regression precision is not positive definite".into()))?;
    let mean = chol.solve(&(design.transpose() * e / tau2));
    Ok((mean, chol))
}

/// Draws from `N(mean, P⁻¹)` given the Cholesky factor `P = L Lᵀ`.
pub fn draw_with_precision<R: Rng + ?Sized>(
    rng: &mut R,
    mean: &DVector<f64>,
    chol: &nalgebra::Cholesky<f64, nalgebra::Dyn>,
) -> DVector<f64> {
    let z = DVector::from_fn(mean.len(), |_, _| rng.sample::<f64, _>(StandardNormal));
    let l = chol.l();
    let x = l
        .transpose()
        .solve_upper_triangular(&z)
        .expect("Cholesky factor has positive diagonal");
    mean + x
}

/// Log density (up to a constant) of the dependence parameter given the
/// latent factors: `Σ_q Σ_i [½ log d_i − d_i C_iq² / (2σ_q²)]` with
/// `d_i = 1 − λ + λ w_i`.
pub fn lambda_log_density(cstar: &DMatrix<f64>, sigma2: &[f64], w: &[f64], lambda: f64) -> f64 {
    let mut lp = 0.0;
    for q in 0..cstar.ncols() {
        for (i, &wi) in w.iter().enumerate() {
            let d = 1.0 - lambda + lambda * wi.max(0.0);
            lp += 0.5 * d.ln() - d * cstar[(i, q)] * cstar[(i, q)] / (2.0 * sigma2[q]);
        }
    }
    lp
}
