//! CSV and JSON persistence: matrices, datasets, run directories and the
//! scale-curve table.

use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use serde::{de::DeserializeOwned, Deserialize, Serialize};

use crate::baselines::BaselineFit;
use crate::error::{MsmError, Result};
use crate::fit::{MsmFit, SpatialData, Standardization};
use crate::graph::GraphSpec;
use crate::metrics::MetricRow;
use crate::sampler::{CellSummary, ChainConfig, PosteriorDraws};
use crate::simulation::{SimulatedDataset, SimulationConfig};
use crate::spline::{basis_for, SplineAxis, SplineBasis};
use crate::study::SensitivityRow;
use crate::tensor::{beta_at, Tensor3};

/// Full-precision text form of a double (17 significant digits).
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Serde helpers writing doubles with [`fmt_f64`].
pub mod sci {
    use serde::Serializer;

    pub fn f64<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&super::fmt_f64(*v))
    }

    pub fn opt<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(v) => s.serialize_str(&super::fmt_f64(*v)),
            None => s.serialize_none(),
        }
    }
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> MsmError + '_ {
    move |source| MsmError::Csv {
        path: path.to_path_buf(),
        source,
    }
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| MsmError::io(dir, e))
}

/// Header row plus one row per matrix row.
pub fn write_matrix_csv(path: &Path, header: &[String], m: &DMatrix<f64>) -> Result<()> {
    if header.len() != m.ncols() {
        return Err(MsmError::dimension("csv header", m.ncols(), header.len()));
    }
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    w.write_record(header).map_err(csv_err(path))?;
    for i in 0..m.nrows() {
        w.write_record(m.row(i).iter().map(|v| fmt_f64(*v)))
            .map_err(csv_err(path))?;
    }
    w.flush().map_err(|e| MsmError::io(path, e))
}

/// Reads a numeric CSV with a header row.
pub fn read_matrix_csv(path: &Path) -> Result<(Vec<String>, DMatrix<f64>)> {
    let mut r = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(csv_err(path))?;
    let header: Vec<String> = r.headers().map_err(csv_err(path))?.iter().map(String::from).collect();
    let mut data = Vec::new();
    let mut n_rows = 0;
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(csv_err(path))?;
        if rec.len() != header.len() {
            return Err(MsmError::Parse {
                path: path.display().to_string(),
                line: i + 2,
                message: format!("expected {} fields, found {}", header.len(), rec.len()),
            });
        }
        for (j, f) in rec.iter().enumerate() {
            let v: f64 = f.parse().map_err(|_| MsmError::Parse {
                path: path.display().to_string(),
                line: i + 2,
                message: format!("column '{}': '{f}' is not a number", header[j]),
            })?;
            if !v.is_finite() {
                return Err(MsmError::Parse {
                    path: path.display().to_string(),
                    line: i + 2,
                    message: format!("column '{}': non-finite value", header[j]),
                });
            }
            data.push(v);
        }
        n_rows += 1;
    }
    Ok((header.clone(), DMatrix::from_row_slice(n_rows, header.len(), &data)))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|source| MsmError::Json {
        path: path.to_path_buf(),
        source,
    })?;
    fs::write(path, text + "\n").map_err(|e| MsmError::io(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| MsmError::io(path, e))?;
    serde_json::from_str(&text).map_err(|source| MsmError::Json {
        path: path.to_path_buf(),
        source,
    })
}

/// Serializable rows for the `csv` crate.
fn write_rows<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    for r in rows {
        w.serialize(r).map_err(csv_err(path))?;
    }
    w.flush().map_err(|e| MsmError::io(path, e))
}

fn read_rows<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err(path))?;
    r.deserialize().map(|row| row.map_err(csv_err(path))).collect()
}

fn names(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|j| format!("{prefix}{j}")).collect()
}

/// Column names for a design with the intercept in column 0.
pub fn exposure_names(x: &DMatrix<f64>) -> Vec<String> {
    (0..x.ncols())
        .map(|j| {
            if j == 0 && crate::sampler::constant_column(x) == Some(0) {
                "intercept".to_string()
            } else {
                format!("x{j}")
            }
        })
        .collect()
}

/// Outcomes, exposures and optional covariates with their headers.
#[derive(Debug, Clone)]
pub struct DataBundle {
    pub data: SpatialData,
    pub outcome_names: Vec<String>,
    pub exposure_names: Vec<String>,
}

pub fn read_data_bundle(y: &Path, x: &Path, z: Option<&Path>) -> Result<DataBundle> {
    let (outcome_names, ym) = read_matrix_csv(y)?;
    let (exposure_names, xm) = read_matrix_csv(x)?;
    let zm = z.map(read_matrix_csv).transpose()?.map(|(_, m)| m);
    if xm.nrows() != ym.nrows() {
        return Err(MsmError::dimension(
            format!("row count of {} vs {}", x.display(), y.display()),
            ym.nrows(),
            xm.nrows(),
        ));
    }
    if let (Some(zm), Some(zp)) = (&zm, z) {
        if zm.nrows() != ym.nrows() {
            return Err(MsmError::dimension(
                format!("row count of {} vs {}", zp.display(), y.display()),
                ym.nrows(),
                zm.nrows(),
            ));
        }
    }
    Ok(DataBundle {
        data: SpatialData::new(ym, xm, zm)?,
        outcome_names,
        exposure_names,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateManifest {
    pub command: String,
    pub config: SimulationConfig,
    pub graph: GraphSpec,
    pub files: Vec<String>,
}

/// `X.csv`, `Y.csv`, `theta.csv`, `U.csv` and `manifest.json` in `dir`.
pub fn write_dataset(dir: &Path, d: &SimulatedDataset, cfg: &SimulationConfig) -> Result<()> {
    ensure_dir(dir)?;
    let r = d.y.ncols();
    write_matrix_csv(&dir.join("X.csv"), &exposure_names(&d.x), &d.x)?;
    write_matrix_csv(&dir.join("Y.csv"), &names("y", r), &d.y)?;
    write_matrix_csv(&dir.join("theta.csv"), &names("theta", r), &d.theta)?;
    write_matrix_csv(&dir.join("U.csv"), &names("u", d.u.ncols()), &d.u)?;
    let manifest = SimulateManifest {
        command: "simulate".into(),
        config: cfg.clone(),
        graph: GraphSpec::Grid {
            rows: cfg.grid_side,
            cols: cfg.grid_side,
        },
        files: ["X.csv", "Y.csv", "theta.csv", "U.csv"].map(String::from).to_vec(),
    };
    write_json(&dir.join("manifest.json"), &manifest)
}

/// Everything needed to reproduce or post-process a fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitManifest {
    pub command: String,
    pub model: String,
    pub graph: GraphSpec,
    pub inputs: Vec<PathBuf>,
    pub chain: Option<ChainConfig>,
    pub fraction: Option<f64>,
    pub standardization: Option<Standardization>,
    pub outcome_names: Vec<String>,
    pub exposure_names: Vec<String>,
    pub n_sites: usize,
    pub n_zero_eigenvalues: usize,
    /// Spectral eigenvalues, descending, for rebuilding the spline basis.
    pub eigenvalues: Vec<f64>,
    /// Per outcome for single-outcome chains, otherwise one entry.
    pub acceptance_rate: Vec<f64>,
    pub burn_in_acceptance_rate: Vec<f64>,
    pub min_ess: Option<f64>,
    pub warnings: Vec<String>,
}

/// One row of `summary.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub exposure: String,
    pub outcome: String,
    pub e: usize,
    pub r: usize,
    #[serde(serialize_with = "crate::io::sci::f64")]
    pub mean: f64,
    #[serde(serialize_with = "crate::io::sci::f64")]
    pub sd: f64,
    #[serde(serialize_with = "crate::io::sci::f64")]
    pub q025: f64,
    #[serde(serialize_with = "crate::io::sci::f64")]
    pub q50: f64,
    #[serde(serialize_with = "crate::io::sci::f64")]
    pub q975: f64,
    #[serde(serialize_with = "crate::io::sci::opt")]
    pub prob_positive: Option<f64>,
    #[serde(serialize_with = "crate::io::sci::opt")]
    pub prob_global_gt_local: Option<f64>,
    #[serde(serialize_with = "crate::io::sci::opt")]
    pub ess: Option<f64>,
}

fn label(v: &[String], i: usize, prefix: &str) -> String {
    v.get(i).cloned().unwrap_or_else(|| format!("{prefix}{i}"))
}

/// Summary rows from posterior draws of a chain fit.
pub fn chain_summary(
    draws: &PosteriorDraws,
    spline: &SplineBasis,
    exposures: &[String],
    outcomes: &[String],
) -> Vec<SummaryRow> {
    let cells: Vec<Vec<CellSummary>> = draws.summary();
    let pg = draws.prob_global_exceeds_local(spline);
    let ess = draws.ess();
    let mut rows = Vec::new();
    for (e, row) in cells.iter().enumerate() {
        for (r, c) in row.iter().enumerate() {
            rows.push(SummaryRow {
                exposure: label(exposures, e, "x"),
                outcome: label(outcomes, r, "y"),
                e,
                r,
                mean: c.mean,
                sd: c.sd,
                q025: c.q025,
                q50: c.q50,
                q975: c.q975,
                prob_positive: Some(c.prob_positive),
                prob_global_gt_local: Some(pg[(e, r)]),
                ess: Some(ess[(e, r)]),
            });
        }
    }
    rows
}

/// Summary rows of a least-squares fit; the median is the estimate.
pub fn baseline_summary(fit: &BaselineFit, exposures: &[String], outcomes: &[String]) -> Vec<SummaryRow> {
    let (ne, nr) = fit.dims();
    let mut rows = Vec::new();
    for e in 0..ne {
        for r in 0..nr {
            rows.push(SummaryRow {
                exposure: label(exposures, e, "x"),
                outcome: label(outcomes, r, "y"),
                e,
                r,
                mean: fit.beta_hat[(e, r)],
                sd: fit.sd[(e, r)],
                q025: fit.low[(e, r)],
                q50: fit.beta_hat[(e, r)],
                q975: fit.high[(e, r)],
                prob_positive: None,
                prob_global_gt_local: None,
                ess: fit.ess.as_ref().map(|m| m[(e, r)]),
            });
        }
    }
    rows
}

pub fn write_summary(path: &Path, rows: &[SummaryRow]) -> Result<()> {
    write_rows(path, rows)
}

pub fn read_summary(path: &Path) -> Result<Vec<SummaryRow>> {
    read_rows(path)
}

#[derive(Serialize, Deserialize)]
struct CellDraw {
    iter: usize,
    e: usize,
    r: usize,
    #[serde(serialize_with = "crate::io::sci::f64")]
    value: f64,
}

#[derive(Serialize, Deserialize)]
struct GammaDraw {
    iter: usize,
    l: usize,
    e: usize,
    r: usize,
    #[serde(serialize_with = "crate::io::sci::f64")]
    value: f64,
}

#[derive(Serialize, Deserialize)]
struct IndexedDraw {
    iter: usize,
    index: usize,
    #[serde(serialize_with = "crate::io::sci::f64")]
    value: f64,
}

/// Flat long-format draw files under `dir/draws`. `outcome_offset` shifts
/// the outcome index so single-outcome chains can share one file.
pub fn write_draws(dir: &Path, draws: &PosteriorDraws, outcome_offset: usize, append: bool) -> Result<()> {
    let d = dir.join("draws");
    ensure_dir(&d)?;
    let open = |name: &str| -> Result<csv::Writer<fs::File>> {
        let path = d.join(name);
        let exists = path.exists();
        let file = fs::OpenOptions::new()
            .create(true)
            .write(true)
            .append(append)
            .truncate(!append)
            .open(&path)
            .map_err(|e| MsmError::io(&path, e))?;
        Ok(csv::WriterBuilder::new()
            .has_headers(!(append && exists))
            .from_writer(file))
    };
    let ser = |w: &mut csv::Writer<fs::File>, name: &str, row: &dyn Fn(&mut csv::Writer<fs::File>) -> csv::Result<()>| {
        row(w).map_err(csv_err(&d.join(name)))
    };
    let mut beta = open("beta_local.csv")?;
    let mut gamma = open("gamma.csv")?;
    let mut tau2 = open("tau2.csv")?;
    let mut sigma2 = open("sigma2.csv")?;
    let mut lam = open("lambda_c.csv")?;
    for (k, &it) in draws.iterations.iter().enumerate() {
        let b = &draws.beta_local[k];
        for e in 0..b.nrows() {
            for r in 0..b.ncols() {
                let row = CellDraw { iter: it, e, r: r + outcome_offset, value: b[(e, r)] };
                ser(&mut beta, "beta_local.csv", &|w| w.serialize(&row))?;
            }
        }
        let g = &draws.gamma[k];
        let (nl, ne, nr) = g.dims();
        for l in 0..nl {
            for e in 0..ne {
                for r in 0..nr {
                    let row = GammaDraw { iter: it, l, e, r: r + outcome_offset, value: g.get(l, e, r) };
                    ser(&mut gamma, "gamma.csv", &|w| w.serialize(&row))?;
                }
            }
        }
        for (r, v) in draws.tau2[k].iter().enumerate() {
            ser(&mut tau2, "tau2.csv", &|w| w.serialize(IndexedDraw { iter: it, index: r + outcome_offset, value: *v }))?;
        }
        for (q, v) in draws.sigma2[k].iter().enumerate() {
            ser(&mut sigma2, "sigma2.csv", &|w| w.serialize(IndexedDraw { iter: it, index: q + outcome_offset, value: *v }))?;
        }
        ser(&mut lam, "lambda_c.csv", &|w| w.serialize(IndexedDraw { iter: it, index: outcome_offset, value: draws.lambda_c[k] }))?;
    }
    for (w, name) in [
        (&mut beta, "beta_local.csv"),
        (&mut gamma, "gamma.csv"),
        (&mut tau2, "tau2.csv"),
        (&mut sigma2, "sigma2.csv"),
        (&mut lam, "lambda_c.csv"),
    ] {
        w.flush().map_err(|e| MsmError::io(d.join(name), e))?;
    }
    Ok(())
}

/// Coefficient tensor draws keyed by iteration, outcomes stacked.
pub fn read_gamma_draws(dir: &Path) -> Result<Vec<Tensor3>> {
    let path = dir.join("draws").join("gamma.csv");
    if !path.exists() {
        return Err(MsmError::io(
            &path,
            std::io::Error::new(std::io::ErrorKind::NotFound, "draws file missing"),
        ));
    }
    let rows: Vec<GammaDraw> = read_rows(&path)?;
    let (mut nl, mut ne, mut nr) = (0, 0, 0);
    let mut iters: Vec<usize> = Vec::new();
    for g in &rows {
        nl = nl.max(g.l + 1);
        ne = ne.max(g.e + 1);
        nr = nr.max(g.r + 1);
        iters.push(g.iter);
    }
    iters.sort_unstable();
    iters.dedup();
    let mut out = vec![Tensor3::zeros(nl, ne, nr); iters.len()];
    for g in rows {
        let k = iters.binary_search(&g.iter).expect("iteration present");
        out[k].set(g.l, g.e, g.r, g.value);
    }
    Ok(out)
}

/// Writes a complete chain-fit directory.
pub fn write_msm_run(dir: &Path, fit: &MsmFit, manifest: &FitManifest) -> Result<()> {
    ensure_dir(dir)?;
    write_draws(dir, &fit.draws, 0, false)?;
    let rows = chain_summary(&fit.draws, &fit.spline, &manifest.exposure_names, &manifest.outcome_names);
    write_summary(&dir.join("summary.csv"), &rows)?;
    write_json(&dir.join("manifest.json"), manifest)
}

/// Single-outcome chains: draws of outcome `r` are written with outcome
/// index `r`.
pub fn write_usm_run(dir: &Path, fits: &[MsmFit], combined: &BaselineFit, manifest: &FitManifest) -> Result<()> {
    ensure_dir(dir)?;
    let mut rows = Vec::new();
    for (r, f) in fits.iter().enumerate() {
        write_draws(dir, &f.draws, r, r > 0)?;
        let names = vec![label(&manifest.outcome_names, r, "y")];
        for mut row in chain_summary(&f.draws, &f.spline, &manifest.exposure_names, &names) {
            row.r = r;
            rows.push(row);
        }
    }
    rows.sort_by_key(|row| (row.e, row.r));
    debug_assert_eq!(rows.len(), combined.beta_hat.len());
    write_summary(&dir.join("summary.csv"), &rows)?;
    write_json(&dir.join("manifest.json"), manifest)
}

pub fn write_baseline_run(dir: &Path, fit: &BaselineFit, manifest: &FitManifest) -> Result<()> {
    ensure_dir(dir)?;
    let rows = baseline_summary(fit, &manifest.exposure_names, &manifest.outcome_names);
    write_summary(&dir.join("summary.csv"), &rows)?;
    write_json(&dir.join("manifest.json"), manifest)
}

/// One point of a scale curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub exposure: String,
    pub outcome: String,
    pub e: usize,
    pub r: usize,
    #[serde(serialize_with = "crate::io::sci::f64")]
    pub eigenvalue: f64,
    #[serde(serialize_with = "crate::io::sci::f64")]
    pub t: f64,
    #[serde(serialize_with = "crate::io::sci::f64")]
    pub mean: f64,
    #[serde(serialize_with = "crate::io::sci::f64")]
    pub q025: f64,
    #[serde(serialize_with = "crate::io::sci::f64")]
    pub q975: f64,
}

/// Spline coordinate of an eigenvalue. On the rank axis the coordinate is
/// interpolated linearly between neighbouring spectral rows.
pub fn coord_on_axis(spline: &SplineBasis, w: &DVector<f64>, value: f64) -> f64 {
    if spline.axis() == SplineAxis::Eigenvalue || spline.is_constant() {
        return spline.coord_of_eigenvalue(value);
    }
    let c = spline.coords();
    let n = w.len();
    if value >= w[0] {
        return c[0];
    }
    if value <= w[n - 1] {
        return c[n - 1];
    }
    for i in 0..n - 1 {
        if w[i] >= value && value >= w[i + 1] {
            if w[i] == w[i + 1] {
                return c[i];
            }
            let f = (value - w[i + 1]) / (w[i] - w[i + 1]);
            return c[i + 1] + f * (c[i] - c[i + 1]);
        }
    }
    c[n - 1]
}

/// Posterior mean and 95% band of every coefficient curve on `n_grid`
/// equally spaced eigenvalues from the smallest to the largest.
pub fn scale_curves(
    gamma: &[Tensor3],
    spline: &SplineBasis,
    eigenvalues: &DVector<f64>,
    n_grid: usize,
    exposures: &[String],
    outcomes: &[String],
) -> Result<Vec<CurvePoint>> {
    if gamma.is_empty() {
        return Err(MsmError::Contract("no draws for scale curves".into()));
    }
    if n_grid < 2 {
        return Err(MsmError::config("n_grid", "at least two grid points"));
    }
    let (w_lo, w_hi) = (eigenvalues.min(), eigenvalues.max());
    let (_, ne, nr) = gamma[0].dims();
    let mut out = Vec::new();
    for j in 0..n_grid {
        // the last point is exactly the largest eigenvalue, i.e. t = 1
        let w = if j + 1 == n_grid {
            w_hi
        } else {
            w_lo + (w_hi - w_lo) * j as f64 / (n_grid - 1) as f64
        };
        let t = if j + 1 == n_grid { 1.0 } else { coord_on_axis(spline, eigenvalues, w) };
        let vals: Vec<DMatrix<f64>> = gamma.iter().map(|g| beta_at(spline, g, t)).collect();
        for e in 0..ne {
            for r in 0..nr {
                let x: Vec<f64> = vals.iter().map(|m| m[(e, r)]).collect();
                let c = CellSummary::from_draws(&x);
                out.push(CurvePoint {
                    exposure: label(exposures, e, "x"),
                    outcome: label(outcomes, r, "y"),
                    e,
                    r,
                    eigenvalue: w,
                    t,
                    mean: c.mean,
                    q025: c.q025,
                    q975: c.q975,
                });
            }
        }
    }
    Ok(out)
}

/// Rebuilds the spline of a fit directory from its manifest.
pub fn spline_from_manifest(m: &FitManifest, n_basis: usize, axis: SplineAxis) -> Result<SplineBasis> {
    basis_for(&DVector::from_vec(m.eigenvalues.clone()), n_basis, axis)
}

/// Scale-curve table for a chain-fit directory.
pub fn plotdata(dir: &Path, n_grid: usize) -> Result<Vec<CurvePoint>> {
    let manifest: FitManifest = read_json(&dir.join("manifest.json"))?;
    let chain = manifest.chain.clone().ok_or_else(|| {
        MsmError::config("model", format!("{} has no posterior draws", manifest.model))
    })?;
    let n_basis = if manifest.model == "naive" { 1 } else { chain.n_basis };
    let spline = spline_from_manifest(&manifest, n_basis, chain.spline_axis)?;
    let gamma = read_gamma_draws(dir)?;
    let w = DVector::from_vec(manifest.eigenvalues.clone());
    scale_curves(&gamma, &spline, &w, n_grid, &manifest.exposure_names, &manifest.outcome_names)
}

pub fn write_curves(path: &Path, rows: &[CurvePoint]) -> Result<()> {
    write_rows(path, rows)
}

pub fn write_metric_rows(path: &Path, rows: &[MetricRow]) -> Result<()> {
    write_rows(path, rows)
}

pub fn read_metric_rows(path: &Path) -> Result<Vec<MetricRow>> {
    read_rows(path)
}

pub fn write_sensitivity_rows(path: &Path, rows: &[SensitivityRow]) -> Result<()> {
    write_rows(path, rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.csv");
        let m = DMatrix::from_row_slice(2, 2, &[0.1, -1.0 / 3.0, 1e-300, std::f64::consts::PI]);
        write_matrix_csv(&p, &["a".into(), "b".into()], &m).unwrap();
        let (h, back) = read_matrix_csv(&p).unwrap();
        assert_eq!(h, vec!["a", "b"]);
        assert_eq!(back, m);
        let first = fs::read(&p).unwrap();
        write_matrix_csv(&p, &h, &back).unwrap();
        assert_eq!(fs::read(&p).unwrap(), first);
    }

    #[test]
    fn bad_cell_reports_line() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.csv");
        fs::write(&p, "a,b\n1,2\n3,oops\n").unwrap();
        match read_matrix_csv(&p) {
            Err(MsmError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn row_mismatch_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let y = dir.path().join("y.csv");
        let x = dir.path().join("x.csv");
        fs::write(&y, "y0\n1\n2\n3\n").unwrap();
        fs::write(&x, "x0\n1\n2\n").unwrap();
        let err = read_data_bundle(&y, &x, None).unwrap_err();
        assert_eq!(err.category(), crate::ErrorCategory::Data);
    }
}
