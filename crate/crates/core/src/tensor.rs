//! CP-structured coefficient tensors and the multiscale coefficients they
//! induce through a spline basis.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{MsmError, Result};
use crate::spline::SplineBasis;

/// Dense three-way array stored with the last index fastest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tensor3 {
    dims: (usize, usize, usize),
    data: Vec<f64>,
}

impl Tensor3 {
    pub fn zeros(d0: usize, d1: usize, d2: usize) -> Self {
        Self {
            dims: (d0, d1, d2),
            data: vec![0.0; d0 * d1 * d2],
        }
    }

    pub fn from_fn(d0: usize, d1: usize, d2: usize, mut f: impl FnMut(usize, usize, usize) -> f64) -> Self {
        let mut t = Self::zeros(d0, d1, d2);
        for a in 0..d0 {
            for b in 0..d1 {
                for c in 0..d2 {
                    t.data[(a * d1 + b) * d2 + c] = f(a, b, c);
                }
            }
        }
        t
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        self.dims
    }

    #[inline]
    fn offset(&self, a: usize, b: usize, c: usize) -> usize {
        (a * self.dims.1 + b) * self.dims.2 + c
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize, c: usize) -> f64 {
        self.data[self.offset(a, b, c)]
    }

    #[inline]
    pub fn set(&mut self, a: usize, b: usize, c: usize, v: f64) {
        let o = self.offset(a, b, c);
        self.data[o] = v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn distance(&self, other: &Tensor3) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    /// Slice with the first index fixed, as a `d1 x d2` matrix.
    pub fn slice0(&self, a: usize) -> DMatrix<f64> {
        DMatrix::from_fn(self.dims.1, self.dims.2, |b, c| self.get(a, b, c))
    }

    /// Mode-0 contraction with a weight vector: `Σ_a w_a T[a, ., .]`.
    pub fn contract0(&self, weights: &[f64]) -> DMatrix<f64> {
        let (_, d1, d2) = self.dims;
        let mut out = DMatrix::zeros(d1, d2);
        for (a, &wa) in weights.iter().enumerate() {
            if wa == 0.0 {
                continue;
            }
            for b in 0..d1 {
                for c in 0..d2 {
                    out[(b, c)] += wa * self.get(a, b, c);
                }
            }
        }
        out
    }
}

/// CP factor matrices: `T1` is `L x K`, `T2` is `E x K`, `T3` is `R x K`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorState {
    pub t1: DMatrix<f64>,
    pub t2: DMatrix<f64>,
    pub t3: DMatrix<f64>,
}

impl TensorState {
    pub fn new(t1: DMatrix<f64>, t2: DMatrix<f64>, t3: DMatrix<f64>) -> Result<Self> {
        let k = t1.ncols();
        if k == 0 {
            return Err(MsmError::config("K", "rank must be at least 1"));
        }
        if t2.ncols() != k || t3.ncols() != k {
            return Err(MsmError::dimension(
                "CP factor ranks",
                k,
                format!("{} and {}", t2.ncols(), t3.ncols()),
            ));
        }
        Ok(Self { t1, t2, t3 })
    }

    pub fn rank(&self) -> usize {
        self.t1.ncols()
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.t1.nrows(), self.t2.nrows(), self.t3.nrows())
    }

    pub fn is_finite(&self) -> bool {
        self.t1.iter().chain(self.t2.iter()).chain(self.t3.iter()).all(|v| v.is_finite())
    }
}

/// `γ_ler = Σ_k T1[l,k] T2[e,k] T3[r,k]`.
pub fn assemble_gamma(t: &TensorState) -> Tensor3 {
    let (l, e, r) = t.dims();
    let mut g = Tensor3::zeros(l, e, r);
    for k in 0..t.rank() {
        for a in 0..l {
            let x = t.t1[(a, k)];
            if x == 0.0 {
                continue;
            }
            for b in 0..e {
                let xy = x * t.t2[(b, k)];
                for c in 0..r {
                    let o = g.offset(a, b, c);
                    g.data[o] += xy * t.t3[(c, k)];
                }
            }
        }
    }
    g
}

/// `β̃` at every spectral row plus its most local slice.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiscaleCoefficients {
    pub beta_tilde: Tensor3,
    pub beta_hat_local: DMatrix<f64>,
}

/// `E x R` coefficients at normalized scale `t`.
pub fn beta_at(basis: &SplineBasis, gamma: &Tensor3, t: f64) -> DMatrix<f64> {
    gamma.contract0(&basis.eval(t))
}

/// Local-scale coefficients (`t = 1`).
pub fn beta_local(basis: &SplineBasis, gamma: &Tensor3) -> DMatrix<f64> {
    beta_at(basis, gamma, 1.0)
}

/// Mode-1 product `β̃ = γ x_1 B`.
pub fn assemble_beta_tilde(basis: &SplineBasis, gamma: &Tensor3) -> Result<MultiscaleCoefficients> {
    let (l, e, r) = gamma.dims();
    let b = basis.matrix();
    if b.ncols() != l {
        return Err(MsmError::dimension("spline basis columns vs gamma", l, b.ncols()));
    }
    let s = b.nrows();
    let mut beta_tilde = Tensor3::zeros(s, e, r);
    for i in 0..s {
        for a in 0..l {
            let w = b[(i, a)];
            if w == 0.0 {
                continue;
            }
            for bb in 0..e {
                for c in 0..r {
                    let o = beta_tilde.offset(i, bb, c);
                    beta_tilde.data[o] += w * gamma.get(a, bb, c);
                }
            }
        }
    }
    Ok(MultiscaleCoefficients {
        beta_tilde,
        beta_hat_local: beta_local(basis, gamma),
    })
}

/// Verdict of the identifiability bound `K (L + E + R) <= S R`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankCheck {
    pub passes: bool,
    /// Largest admissible `L` for the given `S, R, E, K` (may be negative).
    pub max_l: i64,
    /// Suggested rank `min{LE, ER, LR}`.
    pub suggested_k: usize,
    pub message: String,
}

pub fn check_rank_constraint(s: usize, r: usize, e: usize, l: usize, k: usize) -> RankCheck {
    let suggested_k = (l * e).min(e * r).min(l * r);
    if k == 0 {
        return RankCheck {
            passes: false,
            max_l: i64::MIN,
            suggested_k,
            message: "K must be at least 1".into(),
        };
    }
    let (s, r, e, l, k) = (s as i64, r as i64, e as i64, l as i64, k as i64);
    let max_l = (s * r - k * (e + r)).div_euclid(k);
    let passes = l > 0 && k * (l + e + r) <= s * r;
    let message = if passes {
        format!("L = {l} within bound {max_l} (K = {k}); suggested K = {suggested_k}")
    } else if l <= 0 {
        format!("L must be positive, got {l}")
    } else {
        format!(
            "L = {l} exceeds the largest admissible value {max_l} for S = {s}, R = {r}, E = {e}, K = {k}"
        )
    };
    RankCheck {
        passes,
        max_l,
        suggested_k,
        message,
    }
}
