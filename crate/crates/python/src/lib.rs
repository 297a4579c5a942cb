//! Python bindings. Matrices cross the boundary as lists of rows.

use nalgebra::DMatrix;
use pyo3::exceptions::{PyIOError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use msm_core::baselines::{fit_method, Method};
use msm_core::error::ErrorCategory;
use msm_core::fit::SpatialData;
use msm_core::graph::{build_graph, spectral_basis, GraphSpec};
use msm_core::metrics::{cells, mab as mab_core, mse as mse_core, Split};
use msm_core::sampler::ChainConfig;
use msm_core::simulation::{bias_oracle as bias_core, generate, SimulationConfig};
use msm_core::tensor::check_rank_constraint;
use msm_core::MsmError;

type Rows = Vec<Vec<f64>>;

fn to_py(e: MsmError) -> PyErr {
    match e.category() {
        ErrorCategory::Config | ErrorCategory::Data => PyValueError::new_err(e.to_string()),
        ErrorCategory::Numerical => PyRuntimeError::new_err(e.to_string()),
        ErrorCategory::Io => PyIOError::new_err(e.to_string()),
    }
}

fn matrix(rows: &Rows, what: &str) -> PyResult<DMatrix<f64>> {
    let n = rows.len();
    let p = rows.first().map_or(0, Vec::len);
    if n == 0 || p == 0 {
        return Err(PyValueError::new_err(format!("{what} is empty")));
    }
    if rows.iter().any(|r| r.len() != p) {
        return Err(PyValueError::new_err(format!("{what} rows have unequal lengths")));
    }
    Ok(DMatrix::from_fn(n, p, |i, j| rows[i][j]))
}

fn rows(m: &DMatrix<f64>) -> Rows {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

fn grid_spec(s: usize, grid: Option<(usize, usize)>, ring: Option<usize>) -> PyResult<GraphSpec> {
    match (grid, ring) {
        (Some((rows, cols)), None) => Ok(GraphSpec::Grid { rows, cols }),
        (None, Some(n)) => Ok(GraphSpec::Ring { n }),
        (None, None) => {
            let side = (s as f64).sqrt().round() as usize;
            if side * side != s {
                return Err(PyValueError::new_err(format!(
                    "{s} sites is not a square grid; pass grid=(rows, cols) or ring=n"
                )));
            }
            Ok(GraphSpec::Grid { rows: side, cols: side })
        }
        _ => Err(PyValueError::new_err("pass at most one of grid and ring")),
    }
}

/// Eigenvalues (descending) and eigenvectors (columns) of the graph
/// Laplacian of a rook grid.
#[pyfunction]
fn grid_spectrum(n_rows: usize, n_cols: usize) -> PyResult<(Vec<f64>, Rows)> {
    let g = build_graph(&GraphSpec::Grid { rows: n_rows, cols: n_cols }).map_err(to_py)?;
    let b = spectral_basis(&g).map_err(to_py)?;
    Ok((b.eigenvalues().iter().copied().collect(), rows(b.vectors())))
}

/// One simulated dataset as a dict with `x`, `y`, `theta`, `beta`.
#[pyfunction]
#[pyo3(signature = (setting=1, seed=1, side=None, scaled=true))]
fn simulate<'py>(
    py: Python<'py>,
    setting: usize,
    seed: u64,
    side: Option<usize>,
    scaled: bool,
) -> PyResult<Bound<'py, PyDict>> {
    let cfg = if scaled {
        SimulationConfig::scaled(side.unwrap_or(10), seed)
    } else {
        let c = SimulationConfig::full_size(seed);
        match side {
            Some(s) => SimulationConfig::with_beta(s, c.n_u, c.beta, seed),
            None => c,
        }
    };
    let cfg = cfg.with_setting(setting).map_err(to_py)?;
    let d = py.detach(|| generate(&cfg)).map_err(to_py)?;
    let out = PyDict::new(py);
    out.set_item("x", rows(&d.x))?;
    out.set_item("y", rows(&d.y))?;
    out.set_item("theta", rows(&d.theta))?;
    out.set_item("beta", rows(&d.beta))?;
    Ok(out)
}

/// Fits one method and returns `beta_hat`, `low`, `high`, `sd`.
///
/// `model` is one of msm, usm, naive, spatialplus, ols. Without `grid` or
/// `ring` the sites are taken to be a square grid.
#[pyfunction]
#[pyo3(signature = (
    y, x, model="msm", grid=None, ring=None, n_basis=10, rank=5, n_factors=1,
    n_iter=5000, n_burn=1000, thin=1, seed=1, fraction=0.8
))]
#[allow(clippy::too_many_arguments)]
fn fit<'py>(
    py: Python<'py>,
    y: Rows,
    x: Rows,
    model: &str,
    grid: Option<(usize, usize)>,
    ring: Option<usize>,
    n_basis: usize,
    rank: usize,
    n_factors: usize,
    n_iter: usize,
    n_burn: usize,
    thin: usize,
    seed: u64,
    fraction: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let method = match model.to_ascii_lowercase().as_str() {
        "spatialplus" => Method::SpatialPlus(fraction),
        other => other.parse::<Method>().map_err(to_py)?,
    };
    let data = SpatialData::new(matrix(&y, "y")?, matrix(&x, "x")?, None).map_err(to_py)?;
    let spec = grid_spec(data.n_sites(), grid, ring)?;
    let cfg = ChainConfig {
        n_iter,
        n_burn,
        thin,
        n_basis,
        rank,
        n_factors,
        seed,
        ..ChainConfig::default()
    };
    let fit = py
        .detach(|| {
            let g = build_graph(&spec)?;
            let basis = spectral_basis(&g)?;
            fit_method(method, &data, &basis, &cfg)
        })
        .map_err(to_py)?;
    let out = PyDict::new(py);
    out.set_item("method", fit.method.to_string())?;
    out.set_item("beta_hat", rows(&fit.beta_hat))?;
    out.set_item("low", rows(&fit.low))?;
    out.set_item("high", rows(&fit.high))?;
    out.set_item("sd", rows(&fit.sd))?;
    out.set_item("warnings", fit.warnings.clone())?;
    Ok(out)
}

/// Confounding bias of a regression of the spectral outcome on the
/// spectral exposures at eigenvalue `w`.
#[pyfunction]
fn bias_oracle(b1: Rows, b2: Rows, s1: Rows, lambda_u: f64, lambda_x: f64, w: f64) -> PyResult<Rows> {
    let a = bias_core(&matrix(&b1, "b1")?, &matrix(&b2, "b2")?, &matrix(&s1, "s1")?, lambda_u, lambda_x, w)
        .map_err(to_py)?;
    Ok(rows(&a))
}

/// Whether `(L, K)` leaves the model identified for `S` sites, `R`
/// outcomes and `E` exposures.
#[pyfunction]
fn rank_ok(s: usize, r: usize, e: usize, n_basis: usize, rank: usize) -> bool {
    check_rank_constraint(s, r, e, n_basis, rank).passes
}

fn study_inputs(estimates: &[Rows], truth: &Rows) -> PyResult<(Vec<DMatrix<f64>>, DMatrix<f64>)> {
    let t = matrix(truth, "truth")?;
    let est = estimates
        .iter()
        .map(|m| matrix(m, "estimate"))
        .collect::<PyResult<Vec<_>>>()?;
    if est.iter().any(|m| m.shape() != t.shape()) {
        return Err(PyValueError::new_err("estimates and truth differ in shape"));
    }
    Ok((est, t))
}

/// Mean squared error over replicates and cells.
#[pyfunction]
fn mse(estimates: Vec<Rows>, truth: Rows) -> PyResult<f64> {
    let (est, t) = study_inputs(&estimates, &truth)?;
    Ok(mse_core(&est, &t, &cells(&t, Split::All, None)))
}

/// Mean absolute bias: replicate-averaged error per cell, then the mean of
/// its absolute value.
#[pyfunction]
fn mab(estimates: Vec<Rows>, truth: Rows) -> PyResult<f64> {
    let (est, t) = study_inputs(&estimates, &truth)?;
    Ok(mab_core(&est, &t, &cells(&t, Split::All, None)))
}

#[pymodule]
fn msm(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(grid_spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(fit, m)?)?;
    m.add_function(wrap_pyfunction!(bias_oracle, m)?)?;
    m.add_function(wrap_pyfunction!(rank_ok, m)?)?;
    m.add_function(wrap_pyfunction!(mse, m)?)?;
    m.add_function(wrap_pyfunction!(mab, m)?)?;
    Ok(())
}
