//! Batch front end: `verify`, `solve`, `trace` and `kernel`.

pub mod config;
pub mod kernel;
pub mod output;
pub mod solve;
pub mod trace;
pub mod verify;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use toml::Spanned;

use config::{ConfigError, RunConfig, Source};
use output::OutDir;

#[derive(Debug, Parser)]
#[command(name = "fracperiodic", version, about = "Periodic solutions of fractional Laplacian equations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// TOML run configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Embedded preset name, or `custom` together with --config.
    #[arg(long)]
    pub preset: Option<String>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Overrides `numerics.seed`.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads for independent sub-runs (default: all cores).
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the identity suite and write verify.json.
    Verify(Common),
    /// Solve one problem; writes solution.csv, report.json and bounds.json.
    Solve(Common),
    /// Trace the μ-branch; writes branch.csv and branch.json.
    Trace {
        #[command(flatten)]
        common: Common,
        /// Also write every branch point's coefficients to branch_points.json.
        #[arg(long)]
        solutions: bool,
    },
    /// Tabulate K(z) and C(1, s); writes kernel.csv and kernel.json.
    Kernel {
        #[command(flatten)]
        common: Common,
        /// Orders, overriding `kernel.s`.
        #[arg(long = "s")]
        orders: Vec<f64>,
        /// Evaluation points, overriding `kernel.z`.
        #[arg(long)]
        z: Vec<f64>,
        /// Grid size, overriding `kernel.points`.
        #[arg(long)]
        points: Option<usize>,
    },
}

impl Command {
    pub fn common(&self) -> &Common {
        match self {
            Command::Verify(c) | Command::Solve(c) => c,
            Command::Trace { common, .. } | Command::Kernel { common, .. } => common,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Command::Verify(_) => "verify",
            Command::Solve(_) => "solve",
            Command::Trace { .. } => "trace",
            Command::Kernel { .. } => "kernel",
        }
    }
}

/// One contracted check of a run.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    /// Passes when `value ≤ tolerance`.
    pub fn at_most(name: &str, value: f64, tolerance: f64) -> Self {
        Self { name: name.into(), value, tolerance, pass: value <= tolerance }
    }

    pub fn flag(name: &str, ok: bool) -> Self {
        Self { name: name.into(), value: if ok { 0.0 } else { 1.0 }, tolerance: 0.0, pass: ok }
    }
}

#[derive(Debug)]
pub enum RunError {
    Config(ConfigError),
    Solver(fracperiodic::Error),
    Other(anyhow::Error),
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Config(e) => write!(f, "{e}"),
            RunError::Solver(e) => write!(f, "{e}"),
            RunError::Other(e) => write!(f, "{e:#}"),
        }
    }
}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Config(e)
    }
}

impl From<fracperiodic::Error> for RunError {
    fn from(e: fracperiodic::Error) -> Self {
        RunError::Solver(e)
    }
}

impl From<anyhow::Error> for RunError {
    fn from(e: anyhow::Error) -> Self {
        RunError::Other(e)
    }
}

impl From<serde_json::Error> for RunError {
    fn from(e: serde_json::Error) -> Self {
        RunError::Other(e.into())
    }
}

impl RunError {
    /// Machine-readable form written to `error.json`.
    pub fn to_json(&self, command: &str) -> serde_json::Value {
        use serde_json::json;
        let (kind, details) = match self {
            RunError::Config(ConfigError::Parse { line, column, .. }) => {
                ("parse_error", json!({ "line": line, "column": column }))
            }
            RunError::Config(ConfigError::Validation(list)) => {
                ("validation_error", json!({ "violations": list }))
            }
            RunError::Config(ConfigError::UnknownPreset(name)) => {
                ("unknown_preset", json!({ "preset": name }))
            }
            RunError::Config(ConfigError::Io(_)) => ("io_error", json!(null)),
            RunError::Solver(e) => (e.kind(), json!(null)),
            RunError::Other(_) => ("error", json!(null)),
        };
        json!({
            "command": command,
            "error": kind,
            "message": self.to_string(),
            "details": details,
        })
    }
}

/// Finished run: exit status 0 iff every contracted check passed.
pub struct Outcome {
    pub all_passed: bool,
    pub files: Vec<PathBuf>,
}

/// Loads, overrides and validates the configuration for `cmd`.
pub fn load(cmd: &Command) -> Result<(RunConfig, Source), ConfigError> {
    let common = cmd.common();
    let source = Source::resolve(common.config.as_deref(), common.preset.as_deref())?;
    let mut cfg = source.parse()?;
    if let Some(seed) = common.seed {
        cfg.numerics.seed = seed;
    }
    if let Command::Kernel { orders, z, points, .. } = cmd {
        if !orders.is_empty() {
            cfg.kernel.s = Spanned::new(0..0, orders.clone());
        }
        if !z.is_empty() {
            cfg.kernel.z = Spanned::new(0..0, z.clone());
        }
        if let Some(p) = points {
            cfg.kernel.points = Spanned::new(0..0, *p);
        }
    }
    cfg.validate(&source)?;
    Ok((cfg, source))
}

/// Echo of the resolved configuration for reports.
pub fn echo(cfg: &RunConfig, source: &Source) -> serde_json::Value {
    serde_json::json!({
        "source": source.origin,
        "resolved": cfg,
    })
}

pub fn run(cmd: &Command) -> Result<Outcome, RunError> {
    let (cfg, source) = load(cmd)?;
    log::info!("{}: configuration from {}", cmd.name(), source.origin);
    let common = cmd.common();
    let mut out = OutDir::create(&common.out)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(common.jobs.unwrap_or(0))
        .build()
        .map_err(anyhow::Error::from)?;
    let all_passed = pool.install(|| match cmd {
        Command::Verify(_) => verify::run(&cfg, &source, &mut out),
        Command::Solve(_) => solve::run(&cfg, &source, &mut out),
        Command::Trace { solutions, .. } => trace::run(&cfg, &source, *solutions, &mut out),
        Command::Kernel { .. } => kernel::run(&cfg, &source, &mut out),
    })?;
    Ok(Outcome { all_passed, files: out.written().to_vec() })
}
