//! `esqpt`: batch driver for the decoherence laboratory.
//!
//! Every subcommand writes plot-ready CSV files and a `manifest.json` into
//! `--out`. Exit codes: 0 success, 2 invalid specification, 3 numerical
//! failure, 1 anything else (i/o).

mod config;

use std::f64::consts::{PI, TAU};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use config::{Settings, UsageError};
use esqpt::dos::{self, DosEstimator};
use esqpt::experiments::cache::ResultCache;
use esqpt::experiments::{self as exp, io, HorizonPolicy, SweepSpec};
use esqpt::meanfield;
use esqpt::spectra::Method;
use esqpt::{Execution, ModelParams};

#[derive(Parser, Debug)]
#[command(
    name = "esqpt",
    version,
    about = "Qubit decoherence in a two-level boson environment"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Spectra along a grid of alpha values.
    Levels(Common),
    /// Exact and semiclassical densities of states.
    Dos(Common),
    /// Mean-field energy surface on a (phi, xi) grid.
    Surface(Common),
    /// Decoherence factor |r(t)| and its first revival.
    Decohere(Common),
    /// r_max as a function of the coupling, for one or more sizes.
    RmaxSweep(Common),
    /// Finite-size scaling of r_max at the continuous critical coupling.
    Scaling(Common),
    /// Critical, spinodal and antispinodal lines against omega.
    PhaseDiagram(Common),
    /// Exact, tda and tda2 traces side by side.
    TdaCompare(Common),
}

/// Flags shared by every subcommand. Values from `--config` win.
#[derive(Args, Debug, Clone, Default)]
pub struct Common {
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub omega: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Number of bosons.
    #[arg(long = "n")]
    pub n: Option<usize>,
    /// exact, tda or tda2.
    #[arg(long)]
    pub method: Option<String>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub bins: Option<usize>,
    /// End of the time grid.
    #[arg(long)]
    pub tmax: Option<f64>,
    /// Number of grid points (alpha values, samples, phase-space points).
    #[arg(long)]
    pub grid: Option<usize>,
    /// Coupling grid as `lo:hi:step`.
    #[arg(long)]
    pub lambdas: Option<String>,
    /// Comma-separated sizes.
    #[arg(long)]
    pub sizes: Option<String>,
    /// TOML file of key-value overrides.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Directory of the content-addressed result cache.
    #[arg(long)]
    pub cache: Option<PathBuf>,
    /// Run on one thread.
    #[arg(long)]
    pub sequential: bool,
}

enum Failure {
    Usage(String),
    Core(esqpt::Error),
}

impl From<esqpt::Error> for Failure {
    fn from(e: esqpt::Error) -> Self {
        Failure::Core(e)
    }
}

impl From<UsageError> for Failure {
    fn from(e: UsageError) -> Self {
        Failure::Usage(e.0)
    }
}

struct Run {
    settings: Settings,
    exec: Execution,
    cache: Option<ResultCache>,
    outputs: Vec<PathBuf>,
}

impl Run {
    fn write(&mut self, name: &str, text: &str) -> Result<(), Failure> {
        let path = self.settings.out.join(name);
        io::write_text(&path, text)?;
        log::info!("wrote {}", path.display());
        self.outputs.push(path);
        Ok(())
    }

    fn params(&self) -> Result<ModelParams, Failure> {
        Ok(self.settings.params()?)
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Core(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                e if e.is_invalid_spec() => 2,
                esqpt::Error::Io { .. } | esqpt::Error::Serde(_) => 1,
                _ => 3,
            })
        }
    }
}

fn run(command: Command) -> Result<(), Failure> {
    let (name, common) = match &command {
        Command::Levels(c) => ("levels", c),
        Command::Dos(c) => ("dos", c),
        Command::Surface(c) => ("surface", c),
        Command::Decohere(c) => ("decohere", c),
        Command::RmaxSweep(c) => ("rmax-sweep", c),
        Command::Scaling(c) => ("scaling", c),
        Command::PhaseDiagram(c) => ("phase-diagram", c),
        Command::TdaCompare(c) => ("tda-compare", c),
    };
    let settings = Settings::resolve(common)?;
    let exec = if common.sequential {
        Execution::Sequential
    } else {
        Execution::available()
    };
    let cache = settings.cache.as_ref().map(ResultCache::open).transpose()?;
    let mut run = Run {
        settings,
        exec,
        cache,
        outputs: Vec::new(),
    };
    let start = Instant::now();
    let extra = match command {
        Command::Levels(_) => levels(&mut run)?,
        Command::Dos(_) => density(&mut run)?,
        Command::Surface(_) => surface(&mut run)?,
        Command::Decohere(_) => decohere(&mut run)?,
        Command::RmaxSweep(_) => sweep(&mut run)?,
        Command::Scaling(_) => scaling(&mut run)?,
        Command::PhaseDiagram(_) => phases(&mut run)?,
        Command::TdaCompare(_) => tda_compare(&mut run)?,
    };
    let manifest = io::Manifest {
        tool: "esqpt".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        core_version: esqpt::VERSION.into(),
        command: name.into(),
        parameters: json!({ "settings": &run.settings, "results": extra }),
        outputs: run.outputs.clone(),
        runtime_seconds: start.elapsed().as_secs_f64(),
        parallel: matches!(run.exec, Execution::Parallel),
    };
    manifest.write(run.settings.out.join("manifest.json"))?;
    println!("{}", run.settings.out.join("manifest.json").display());
    Ok(())
}

fn evenly(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n < 2 {
        return vec![lo];
    }
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

fn levels(run: &mut Run) -> Result<serde_json::Value, Failure> {
    let s = &run.settings;
    let n = s.n.unwrap_or(50);
    let omega = s.omega.unwrap_or(0.0);
    let alphas = evenly(0.0, 1.0, s.grid.unwrap_or(101));
    let table = exp::levels_scan(omega, n, &alphas, run.exec)?;
    run.write("levels.csv", &io::levels_csv(&table))?;
    Ok(json!({ "omega": omega, "N": n, "alpha_points": alphas.len() }))
}

fn density(run: &mut Run) -> Result<serde_json::Value, Failure> {
    let p = run.params()?;
    let bins = run.settings.bins.unwrap_or(dos::DEFAULT_BINS);
    let grid = run.settings.grid.unwrap_or(dos::DEFAULT_GRID);
    let levels = dos::exact_levels(&p)?;
    let edges = dos::uniform_edges(levels[0], levels[levels.len() - 1], bins)?;
    let hist = dos::density_from_levels(&levels, &edges, DosEstimator::Histogram)?;
    let stair = dos::density_from_levels(&levels, &edges, DosEstimator::Staircase)?;
    let semi = dos::dos_semiclassical_on(&p, &edges, grid, run.exec)?;
    if !semi.sparse_bins.is_empty() {
        log::warn!(
            "{} bins received fewer than ten phase-space samples; raise --grid",
            semi.sparse_bins.len()
        );
    }
    let csv = io::dos_csv(&[
        ("rho_exact", &hist),
        ("rho_exact_smooth", &stair),
        ("rho_semiclassical", &semi.dos),
    ])?;
    run.write("dos.csv", &csv)?;
    Ok(json!({
        "singularities_exact": dos::detect_singularities(&stair),
        "singularities_semiclassical": dos::detect_singularities(&semi.dos),
        "sparse_bins": semi.sparse_bins.len(),
    }))
}

fn surface(run: &mut Run) -> Result<serde_json::Value, Failure> {
    let s = &run.settings;
    let (alpha, omega, lambda) = (
        s.alpha_or_default(),
        s.omega.unwrap_or(0.0),
        s.lambda.unwrap_or(0.0),
    );
    // validates the point; N does not enter the surface
    ModelParams::new(alpha, omega, lambda, 1)?;
    let g = s.grid.unwrap_or(101).max(2);
    let mut rows = Vec::with_capacity(g * g);
    for phi in evenly(0.0, PI, g) {
        for xi in evenly(0.0, TAU, g) {
            rows.push((
                phi,
                xi,
                meanfield::complex_surface_coupled(alpha, omega, lambda, phi, xi),
            ));
        }
    }
    run.write("surface.csv", &io::surface_csv(&rows))?;
    Ok(json!({
        "minimum": meanfield::minimize_surface_coupled(alpha, omega, lambda),
        "critical_couplings": meanfield::critical_couplings(alpha, omega),
    }))
}

fn decohere(run: &mut Run) -> Result<serde_json::Value, Failure> {
    let p = run.params()?;
    let method = run.settings.method()?;
    let times = evenly(
        0.0,
        run.settings.tmax.unwrap_or(50.0),
        run.settings.grid.unwrap_or(2001),
    );
    let signal = exp::signal(&p, method, &times, run.exec)?;
    run.write("signal.csv", &signal.to_csv())?;
    run.write("signal.json", &signal.to_json()?)?;
    let revival = exp::revival_point(&p, method, &HorizonPolicy::default(), run.cache.as_ref())?;
    Ok(json!({ "revival": revival }))
}

fn sweep(run: &mut Run) -> Result<serde_json::Value, Failure> {
    let s = &run.settings;
    let spec = SweepSpec {
        alpha: s.alpha_or_default(),
        omega: s.omega.unwrap_or(0.0),
        lambda_grid: s
            .lambda_grid()?
            .unwrap_or(exp::lambda_grid(0.0, 2.0, 0.05)?),
        sizes: s.sizes.clone().unwrap_or_else(|| vec![s.n.unwrap_or(400)]),
        method: s.method()?,
        horizon: s.horizon(),
    };
    let result = exp::rmax_sweep(&spec, run.exec, run.cache.as_ref())?;
    run.write("rmax_sweep.csv", &io::sweep_csv(&result))?;
    let dips: Vec<_> = result
        .curves
        .iter()
        .map(|c| json!({ "N": c.n_bosons, "dip": c.dip() }))
        .collect();
    Ok(json!({ "dips": dips }))
}

fn scaling(run: &mut Run) -> Result<serde_json::Value, Failure> {
    let s = &run.settings;
    let sizes = s
        .sizes
        .clone()
        .unwrap_or_else(|| exp::DEFAULT_SIZES.to_vec());
    let study = exp::finite_size_scaling(
        s.alpha_or_default(),
        s.omega.unwrap_or(0.0),
        &sizes,
        s.method()?,
        &s.horizon(),
        run.exec,
        run.cache.as_ref(),
    )?;
    run.write("scaling.csv", &io::scaling_csv(&study))?;
    Ok(json!({ "lambda_c": study.lambda_c, "fit": study.fit }))
}

fn phases(run: &mut Run) -> Result<serde_json::Value, Failure> {
    let hi = run.settings.omega.unwrap_or(2.0);
    if !(hi >= 0.0 && hi.is_finite()) {
        return Err(Failure::Usage(format!(
            "omega range must be >= 0, got {hi}"
        )));
    }
    let rows = exp::phase_diagram(&evenly(0.0, hi, run.settings.grid.unwrap_or(201)));
    run.write("phase_diagram.csv", &io::phase_diagram_csv(&rows))?;
    Ok(json!({ "rows": rows.len() }))
}

fn tda_compare(run: &mut Run) -> Result<serde_json::Value, Failure> {
    let p = run.params()?;
    let times = evenly(
        0.0,
        run.settings.tmax.unwrap_or(50.0),
        run.settings.grid.unwrap_or(2001),
    );
    let signals = [Method::Exact, Method::Tda, Method::Tda2]
        .into_iter()
        .map(|m| exp::signal(&p, m, &times, run.exec))
        .collect::<esqpt::Result<Vec<_>>>()?;
    let refs: Vec<_> = signals.iter().collect();
    run.write("tda_compare.csv", &io::traces_csv(&refs)?)?;
    let mut revivals = serde_json::Map::new();
    for m in [Method::Exact, Method::Tda, Method::Tda2] {
        let r = exp::revival_point(&p, m, &HorizonPolicy::default(), run.cache.as_ref())?;
        revivals.insert(m.to_string(), json!(r));
    }
    Ok(json!({ "revivals": revivals }))
}
