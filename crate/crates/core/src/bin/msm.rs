//! `msm` command-line interface: simulate, fit, study, plotdata.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{info, warn};

use msm_core::baselines::{collate_usm, fit_method, fit_naive_chain, fit_usm_chains, usm_config, BaselineFit, Method};
use msm_core::fit::fit_msm;
use msm_core::graph::{build_graph, spectral_basis, GraphSpec};
use msm_core::io::{self, FitManifest};
use msm_core::sampler::{ChainConfig, Priors};
use msm_core::simulation::{generate, SimulationConfig};
use msm_core::spline::SplineAxis;
use msm_core::study::{run_sensitivity, run_study, StudyConfig};
use msm_core::{MsmError, Result};

#[derive(Parser)]
#[command(name = "msm", version, about = "Multiscale spectral regression for areal data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset on a square grid.
    Simulate(SimulateArgs),
    /// Fit one model to data files.
    Fit(FitArgs),
    /// Replicate study over settings and methods.
    Study(StudyArgs),
    /// Scale-curve table from a chain fit directory.
    Plotdata(PlotArgs),
}

#[derive(Args, Clone)]
struct SimArgs {
    /// Setting 1-4: sets --phi and --beta-xz.
    #[arg(long, default_value_t = 1)]
    setting: usize,
    /// Kernel range, overrides the setting.
    #[arg(long)]
    phi: Option<f64>,
    /// Confounding strength, overrides the setting.
    #[arg(long = "beta-xz")]
    beta_xz: Option<f64>,
    /// Grid side length (S = side²).
    #[arg(long)]
    side: Option<usize>,
    /// Reduced design: intercept plus three exposures, three outcomes.
    #[arg(long)]
    scaled: bool,
    /// JSON simulation config; flags above are ignored when given.
    #[arg(long)]
    config: Option<PathBuf>,
}

impl SimArgs {
    fn build(&self, seed: u64) -> Result<SimulationConfig> {
        if let Some(p) = &self.config {
            let c: SimulationConfig = io::read_json(p)?;
            c.validate()?;
            return Ok(c);
        }
        let mut c = if self.scaled {
            SimulationConfig::scaled(self.side.unwrap_or(10), seed)
        } else {
            let mut c = SimulationConfig::full_size(seed);
            if let Some(s) = self.side {
                c = SimulationConfig::with_beta(s, c.n_u, c.beta, seed);
            }
            c
        };
        c = c.with_setting(self.setting)?;
        if let Some(v) = self.phi {
            c.phi = v;
        }
        if let Some(v) = self.beta_xz {
            c.beta_xz = v;
        }
        c.validate()?;
        Ok(c)
    }
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    sim: SimArgs,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Copy, Clone, ValueEnum)]
enum Axis {
    Eigenvalue,
    Rank,
}

#[derive(Args, Clone)]
struct ChainArgs {
    /// Spline basis functions.
    #[arg(long = "L", default_value_t = 10)]
    l: usize,
    /// CP rank.
    #[arg(long = "K", default_value_t = 5)]
    k: usize,
    /// Latent factors.
    #[arg(long = "Q", default_value_t = 1)]
    q: usize,
    #[arg(long, default_value_t = 5000)]
    n_iter: usize,
    #[arg(long, default_value_t = 1000)]
    n_burn: usize,
    #[arg(long, default_value_t = 1)]
    thin: usize,
    #[arg(long, value_enum, default_value_t = Axis::Eigenvalue)]
    axis: Axis,
}

impl ChainArgs {
    fn build(&self, seed: u64) -> ChainConfig {
        ChainConfig {
            n_iter: self.n_iter,
            n_burn: self.n_burn,
            thin: self.thin,
            n_basis: self.l,
            rank: self.k,
            n_factors: self.q,
            spline_axis: match self.axis {
                Axis::Eigenvalue => SplineAxis::Eigenvalue,
                Axis::Rank => SplineAxis::RankIndex,
            },
            seed,
            priors: Priors::default(),
            ..ChainConfig::default()
        }
    }
}

#[derive(Args)]
struct FitArgs {
    /// Outcomes CSV (S x R, header row).
    #[arg(long)]
    y: PathBuf,
    /// Exposures CSV (S x E, header row).
    #[arg(long)]
    x: PathBuf,
    /// Covariates CSV (S x P).
    #[arg(long)]
    z: Option<PathBuf>,
    /// Grid graph as ROWSxCOLS, e.g. 20x20.
    #[arg(long, conflicts_with_all = ["ring", "edges"])]
    grid: Option<String>,
    /// Ring graph with N nodes.
    #[arg(long, conflicts_with = "edges")]
    ring: Option<usize>,
    /// Edge-list file.
    #[arg(long)]
    edges: Option<PathBuf>,
    /// Node count for --edges (defaults to the largest index + 1).
    #[arg(long)]
    n_nodes: Option<usize>,
    /// msm, usm, naive, spatialplus or ols.
    #[arg(long, default_value = "msm")]
    model: String,
    /// Retained fraction for spatialplus.
    #[arg(long, default_value_t = 0.8)]
    fraction: f64,
    #[command(flatten)]
    chain: ChainArgs,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct StudyArgs {
    #[command(flatten)]
    sim: SimArgs,
    /// Comma-separated settings.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    settings: Vec<usize>,
    /// Comma-separated methods.
    #[arg(long, value_delimiter = ',', default_value = "msm,usm,naive,spatialplus0.8,spatialplus0.4,ols")]
    methods: Vec<String>,
    /// Replicates per setting.
    #[arg(long = "N", default_value_t = 2)]
    n: usize,
    #[command(flatten)]
    chain: ChainArgs,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Leave the intercept row out of the metrics.
    #[arg(long)]
    skip_intercept: bool,
    /// Sensitivity grid, e.g. `--grid L=5,10 K=2,5`.
    #[arg(long, num_args = 2)]
    grid: Option<Vec<String>>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PlotArgs {
    /// Fit output directory.
    #[arg(long)]
    run: PathBuf,
    #[arg(long, default_value_t = 50)]
    n_grid: usize,
    /// Defaults to RUN/plotdata.csv.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_list(s: &str, key: &str) -> Result<Vec<usize>> {
    let rest = s
        .strip_prefix(key)
        .and_then(|r| r.strip_prefix('='))
        .ok_or_else(|| MsmError::config("grid", format!("expected {key}=a,b,... got '{s}'")))?;
    rest.split(',')
        .map(|v| {
            v.trim()
                .parse()
                .map_err(|_| MsmError::config("grid", format!("bad value '{v}' in '{s}'")))
        })
        .collect()
}

fn graph_spec(a: &FitArgs, n_sites: usize) -> Result<GraphSpec> {
    if let Some(g) = &a.grid {
        let (r, c) = g
            .split_once(['x', 'X', ','])
            .ok_or_else(|| MsmError::config("grid", format!("expected ROWSxCOLS, got '{g}'")))?;
        let parse = |v: &str| {
            v.trim()
                .parse::<usize>()
                .map_err(|_| MsmError::config("grid", format!("bad size '{v}'")))
        };
        return Ok(GraphSpec::Grid { rows: parse(r)?, cols: parse(c)? });
    }
    if let Some(n) = a.ring {
        return Ok(GraphSpec::Ring { n });
    }
    if let Some(p) = &a.edges {
        return Ok(GraphSpec::EdgeList { path: p.clone(), n_nodes: a.n_nodes.or(Some(n_sites)) });
    }
    Err(MsmError::config("graph", "one of --grid, --ring or --edges is required"))
}

fn cmd_simulate(a: SimulateArgs) -> Result<()> {
    let cfg = a.sim.build(a.seed)?;
    let d = generate(&cfg)?;
    io::write_dataset(&a.out, &d, &cfg)?;
    info!("wrote {} sites, {} exposure columns, {} outcomes to {}", cfg.n_sites(), d.x.ncols(), d.y.ncols(), a.out.display());
    Ok(())
}

fn cmd_fit(a: FitArgs) -> Result<()> {
    let method: Method = match a.model.to_ascii_lowercase().as_str() {
        "spatialplus" | "spatial+" => Method::SpatialPlus(a.fraction),
        other => other.parse()?,
    };
    let bundle = io::read_data_bundle(&a.y, &a.x, a.z.as_deref())?;
    let data = &bundle.data;
    let (s, e, r) = (data.n_sites(), data.x.ncols(), data.y.ncols());
    let spec = graph_spec(&a, s)?;
    let graph = build_graph(&spec)?;
    if graph.n_nodes() != s {
        return Err(MsmError::dimension("graph nodes vs data rows", s, graph.n_nodes()));
    }
    let mut warnings = Vec::new();
    if graph.n_components() > 1 {
        let msg = format!("graph has {} components; several zero eigenvalues", graph.n_components());
        warn!("{msg}");
        warnings.push(msg);
    }
    let chain = a.chain.build(a.seed);
    match method {
        Method::Msm => {
            chain.validate(s, e, r)?;
        }
        Method::Naive => {
            ChainConfig { n_basis: 1, ..chain.clone() }.validate(s, e, r)?;
        }
        Method::Usm => {
            for j in 0..r {
                usm_config(&chain, s, e, j).validate(s, e, 1)?;
            }
        }
        _ => {}
    }
    let basis = spectral_basis(&graph)?;
    let mut manifest = FitManifest {
        command: "fit".into(),
        model: match method {
            Method::SpatialPlus(_) => "spatialplus".into(),
            m => m.to_string(),
        },
        graph: spec,
        inputs: [Some(a.y.clone()), Some(a.x.clone()), a.z.clone()].into_iter().flatten().collect(),
        chain: None,
        fraction: None,
        standardization: None,
        outcome_names: bundle.outcome_names.clone(),
        exposure_names: bundle.exposure_names.clone(),
        n_sites: s,
        n_zero_eigenvalues: basis.n_zero_eigenvalues(1e-9),
        eigenvalues: basis.eigenvalues().iter().copied().collect(),
        acceptance_rate: Vec::new(),
        burn_in_acceptance_rate: Vec::new(),
        min_ess: None,
        warnings,
    };
    let min_of = |f: &BaselineFit| f.ess.as_ref().map(|m| m.min());
    match method {
        Method::Msm | Method::Naive => {
            let fit = if method == Method::Msm {
                fit_msm(data, &basis, &chain)?
            } else {
                fit_naive_chain(data, &basis, &chain)?
            };
            manifest.chain = Some(fit.config.clone());
            manifest.standardization = Some(fit.standardization.clone());
            manifest.acceptance_rate = vec![fit.draws.acceptance_rate];
            manifest.burn_in_acceptance_rate = vec![fit.draws.burn_in_acceptance_rate];
            manifest.min_ess = min_of(&BaselineFit::from_msm(method, &fit));
            io::write_msm_run(&a.out, &fit, &manifest)?;
        }
        Method::Usm => {
            let fits = fit_usm_chains(data, &basis, &chain)?;
            let combined = collate_usm(&fits);
            manifest.chain = Some(chain.clone());
            manifest.standardization = fits.first().map(|f| f.standardization.clone());
            manifest.acceptance_rate = fits.iter().map(|f| f.draws.acceptance_rate).collect();
            manifest.burn_in_acceptance_rate = fits.iter().map(|f| f.draws.burn_in_acceptance_rate).collect();
            manifest.min_ess = min_of(&combined);
            io::write_usm_run(&a.out, &fits, &combined, &manifest)?;
        }
        Method::SpatialPlus(_) | Method::Ols => {
            let fit = fit_method(method, data, &basis, &chain)?;
            if let Method::SpatialPlus(f) = method {
                manifest.fraction = Some(f);
            }
            manifest.warnings.extend(fit.warnings.iter().cloned());
            io::write_baseline_run(&a.out, &fit, &manifest)?;
        }
    }
    info!("fit written to {}", a.out.display());
    Ok(())
}

fn cmd_study(a: StudyArgs) -> Result<()> {
    let methods = a.methods.iter().map(|m| m.parse()).collect::<Result<Vec<Method>>>()?;
    let mut sim = a.sim.clone();
    if a.sim.config.is_none() && a.sim.side.is_none() && !a.sim.scaled {
        // desk-scale default
        sim.scaled = true;
    }
    let cfg = StudyConfig {
        settings: a.settings.clone(),
        methods,
        n_replicates: a.n,
        simulation: sim.build(a.seed)?,
        chain: a.chain.build(a.seed),
        seed: a.seed,
        skip_intercept: a.skip_intercept,
    };
    cfg.validate()?;
    let s = cfg.simulation.n_sites();
    let (e, r) = cfg.simulation.beta.shape();
    io::ensure_dir(&a.out)?;
    io::write_json(&a.out.join("manifest.json"), &cfg)?;
    if let Some(g) = &a.grid {
        let ls = parse_list(&g[0], "L")?;
        let ks = parse_list(&g[1], "K")?;
        for &l in &ls {
            for &k in &ks {
                ChainConfig { n_basis: l, rank: k, ..cfg.chain.clone() }.validate(s, e, r)?;
            }
        }
        let rows = run_sensitivity(&cfg, &ls, &ks)?;
        io::write_sensitivity_rows(&a.out.join("sensitivity.csv"), &rows)?;
        io::write_json(&a.out.join("sensitivity.json"), &rows)?;
    } else {
        if cfg.methods.contains(&Method::Msm) || cfg.methods.contains(&Method::Naive) {
            cfg.chain.validate(s, e, r)?;
        }
        let report = run_study(&cfg)?;
        io::write_metric_rows(&a.out.join("report.csv"), &report.rows)?;
        io::write_json(&a.out.join("report.json"), &report)?;
        if !report.failures.is_empty() {
            warn!("{} fits failed; see report.json", report.failures.len());
        }
    }
    info!("study written to {}", a.out.display());
    Ok(())
}

fn cmd_plotdata(a: PlotArgs) -> Result<()> {
    let rows = io::plotdata(&a.run, a.n_grid)?;
    let out = a.out.unwrap_or_else(|| a.run.join("plotdata.csv"));
    io::write_curves(&out, &rows)?;
    info!("wrote {} curve points to {}", rows.len(), out.display());
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(a) => cmd_simulate(a),
        Command::Fit(a) => cmd_fit(a),
        Command::Study(a) => cmd_study(a),
        Command::Plotdata(a) => cmd_plotdata(a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let cat = e.category();
            eprintln!("error[{}]: {e}", cat.as_str());
            ExitCode::from(cat.exit_code() as u8)
        }
    }
}
