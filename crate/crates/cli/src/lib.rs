//! Command-line front end: argument parsing, run configs, artifacts and manifests.
//!
//! Exit status is 0 when every asserted invariant held, 1 on an invariant
//! violation, 2 on a usage or configuration error and 3 on any other failure.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use tiltwalk::{Method, ModelSpec, OrientedNumerator, WeightSpec};

pub mod commands;
pub mod config;
pub mod manifest;
pub mod output;

pub use config::{RunConfig, SamplerChoice};
pub use manifest::Manifest;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_FAILURE: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(tiltwalk::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl From<tiltwalk::Error> for CliError {
    fn from(e: tiltwalk::Error) -> Self {
        use tiltwalk::Error::*;
        match e {
            Descriptor { .. }
            | Unsupported(_)
            | OutOfRange(_)
            | ExactOutOfReach { .. }
            | SizeLimit { .. }
            | RadiusTooSmall { .. } => CliError::Usage(e.to_string()),
            other => CliError::Core(other),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            _ => EXIT_FAILURE,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Enumerate,
    Analyze,
    ClosedForm,
    Sample,
    Verify,
}

impl Command {
    pub const ALL: [Command; 5] = [
        Command::Enumerate,
        Command::Analyze,
        Command::ClosedForm,
        Command::Sample,
        Command::Verify,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Enumerate => "enumerate",
            Command::Analyze => "analyze",
            Command::ClosedForm => "closed-form",
            Command::Sample => "sample",
            Command::Verify => "verify",
        }
    }

    pub fn from_name(name: &str) -> Option<Command> {
        Command::ALL.into_iter().find(|c| c.name() == name)
    }
}

/// Comma-separated values or `start:stop:step` ranges.
#[derive(Debug, Clone)]
pub struct Grid(pub Vec<f64>);

impl std::str::FromStr for Grid {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        config::parse_grid(s).map(Grid)
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "tiltwalk",
    version,
    about = "Exact enumeration, tilted analysis and sampling of walks on nonunimodular graphs"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Sub,
}

#[derive(Debug, Subcommand)]
pub enum Sub {
    /// Enumerate walks and write height-resolved counts as CSV.
    Enumerate(EnumerateArgs),
    /// Bracket tilted critical points from enumerated tables.
    Analyze(AnalyzeArgs),
    /// Evaluate tree closed forms: coefficients or values.
    ClosedForm(ClosedFormArgs),
    /// Sample endpoints of the tilted walk measure.
    Sample(SampleArgs),
    /// Check exact identities and inequalities on enumerated tables.
    Verify(VerifyArgs),
    /// Rerun a manifest and compare output hashes with the original.
    Rerun(RerunArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// TOML run config; flags override its entries.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Manifest path [default: <out>.manifest.json when --out is given].
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Worker threads [default: all cores].
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Args)]
pub struct TableArgs {
    /// Model descriptor, e.g. end-fixed-tree:k=4, oriented-tree-112, product-tree-zd:k=3,d=1.
    #[arg(long)]
    pub model: Option<ModelSpec>,
    /// Weight descriptor, e.g. saw, weakly-saw:g=0.5 [default: saw].
    #[arg(long)]
    pub weight: Option<WeightSpec>,
    /// Longest walk [default: 12 for weakly-saw, else 14].
    #[arg(long = "nmax")]
    pub n_max: Option<usize>,
    /// dfs or transfer [default: transfer where it applies].
    #[arg(long)]
    pub method: Option<Method>,
    /// Table cache directory [default: $TILTWALK_CACHE_DIR, else no cache].
    #[arg(long)]
    pub cache_dir: Option<PathBuf>,
    /// Ignore the cache and $TILTWALK_CACHE_DIR.
    #[arg(long)]
    pub no_cache: bool,
}

impl TableArgs {
    fn into_config(self) -> RunConfig {
        RunConfig {
            model: self.model,
            weight: self.weight,
            n_max: self.n_max,
            method: self.method,
            cache_dir: self.cache_dir,
            no_cache: self.no_cache.then_some(true),
            ..RunConfig::default()
        }
    }
}

#[derive(Debug, Args)]
pub struct EnumerateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub tables: TableArgs,
    /// CSV of counts [default: stdout].
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write the full table file (walks and bridges).
    #[arg(long)]
    pub tables_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub source: TableArgs,
    /// Table file to analyze instead of enumerating.
    #[arg(long)]
    pub tables: Option<PathBuf>,
    /// Tilts to bracket [default: 0:0.5:0.1].
    #[arg(long = "lambda-grid")]
    pub lambdas: Option<Grid>,
    /// Points at which to report exponent bounds.
    #[arg(long = "z-grid")]
    pub zs: Option<Grid>,
    /// Target bracket width [default: 1e-9].
    #[arg(long)]
    pub tol: Option<f64>,
    /// CSV of brackets [default: stdout].
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Full JSON report.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ClosedFormArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Tree model descriptor.
    #[arg(long)]
    pub model: Option<ModelSpec>,
    /// Tilts [default: 0].
    #[arg(long)]
    pub lambda: Option<Grid>,
    /// Points at which to evaluate z_c, alpha and chi.
    #[arg(long)]
    pub z: Option<Grid>,
    /// Number of Taylor coefficients of chi to print.
    #[arg(long)]
    pub coeffs: Option<usize>,
    /// Oriented-tree numerator [default: one-minus-z-squared].
    #[arg(long)]
    pub numerator: Option<OrientedNumerator>,
    /// CSV output [default: stdout].
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Model descriptor.
    #[arg(long)]
    pub model: Option<ModelSpec>,
    /// Weight descriptor [default: saw].
    #[arg(long)]
    pub weight: Option<WeightSpec>,
    /// Tilt [default: 0].
    #[arg(long, allow_negative_numbers = true)]
    pub lambda: Option<f64>,
    /// Walk length.
    #[arg(long)]
    pub n: Option<usize>,
    /// Number of samples [default: 1000].
    #[arg(long)]
    pub count: Option<usize>,
    /// Sampler [default: auto].
    #[arg(long, value_enum)]
    pub method: Option<SamplerChoice>,
    /// RNG seed [default: 0].
    #[arg(long)]
    pub seed: Option<u64>,
    /// CSV of samples [default: stdout].
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub source: TableArgs,
    /// Table file to verify instead of enumerating.
    #[arg(long)]
    pub tables: Option<PathBuf>,
    /// Tilts for the partition-function inequalities [default: 0,0.25,0.5].
    #[arg(long = "lambda-grid")]
    pub lambdas: Option<Grid>,
    /// Points for the series inequalities [default: 0.1,0.2,0.3].
    #[arg(long = "z-grid")]
    pub zs: Option<Grid>,
    /// Random path pairs for the weight property suite [default: 10000].
    #[arg(long)]
    pub trials: Option<usize>,
    /// Seed for the weight property suite [default: 0].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Full JSON report.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RerunArgs {
    /// Manifest of the run to reproduce.
    pub manifest: PathBuf,
    /// Directory for the reproduced artifacts.
    #[arg(long)]
    pub out_dir: PathBuf,
}

fn grid(g: Option<Grid>) -> Option<Vec<f64>> {
    g.map(|g| g.0)
}

impl Sub {
    /// The command, its shared flags, and the config its own flags describe.
    fn split(self) -> (Command, CommonArgs, RunConfig) {
        match self {
            Sub::Enumerate(a) => (
                Command::Enumerate,
                a.common,
                RunConfig {
                    out: a.out,
                    tables_out: a.tables_out,
                    ..a.tables.into_config()
                },
            ),
            Sub::Analyze(a) => (
                Command::Analyze,
                a.common,
                RunConfig {
                    tables: a.tables,
                    lambdas: grid(a.lambdas),
                    zs: grid(a.zs),
                    tol: a.tol,
                    out: a.out,
                    report: a.report,
                    ..a.source.into_config()
                },
            ),
            Sub::ClosedForm(a) => (
                Command::ClosedForm,
                a.common,
                RunConfig {
                    model: a.model,
                    lambdas: grid(a.lambda),
                    zs: grid(a.z),
                    coeffs: a.coeffs,
                    numerator: a.numerator,
                    out: a.out,
                    ..RunConfig::default()
                },
            ),
            Sub::Sample(a) => (
                Command::Sample,
                a.common,
                RunConfig {
                    model: a.model,
                    weight: a.weight,
                    lambda: a.lambda,
                    n: a.n,
                    count: a.count,
                    sampler: a.method,
                    seed: a.seed,
                    out: a.out,
                    ..RunConfig::default()
                },
            ),
            Sub::Verify(a) => (
                Command::Verify,
                a.common,
                RunConfig {
                    tables: a.tables,
                    lambdas: grid(a.lambdas),
                    zs: grid(a.zs),
                    trials: a.trials,
                    seed: a.seed,
                    report: a.report,
                    ..a.source.into_config()
                },
            ),
            Sub::Rerun(_) => unreachable!("rerun has no config"),
        }
    }
}

/// Parse `args` and run; returns the process exit status.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match run_cli(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn run_cli(cli: Cli) -> Result<i32, CliError> {
    if let Sub::Rerun(args) = cli.command {
        return rerun(&args.manifest, &args.out_dir);
    }
    let (command, common, flags) = cli.command.split();
    let mut inputs = Vec::new();
    let file = match &common.config {
        Some(path) => {
            let (cfg, bytes) = RunConfig::load(path)?;
            inputs.push(output::hash_input("config", path, &bytes));
            cfg
        }
        None => RunConfig::default(),
    };
    let flags = RunConfig {
        manifest: common.manifest,
        threads: common.threads,
        ..flags
    };
    let cfg = file.overlay(flags).resolve(command)?;
    let manifest = run(command, cfg, inputs)?;
    Ok(manifest.exit_code)
}

/// Default manifest location for a resolved config.
pub fn manifest_path(cfg: &RunConfig) -> Option<PathBuf> {
    cfg.manifest.clone().or_else(|| {
        cfg.out
            .as_ref()
            .or(cfg.report.as_ref())
            .map(|p| PathBuf::from(format!("{}.manifest.json", p.display())))
    })
}

/// Run a resolved config, write its manifest and report violations.
pub fn run(
    command: Command,
    cfg: RunConfig,
    inputs: Vec<manifest::FileHash>,
) -> Result<Manifest, CliError> {
    let mut manifest = Manifest::new(command, cfg.clone());
    manifest.inputs = inputs;
    match cfg.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?
            .install(|| commands::execute(command, &cfg, &mut manifest))?,
        None => commands::execute(command, &cfg, &mut manifest)?,
    }
    let failed: Vec<String> = manifest.failed().into_iter().map(String::from).collect();
    manifest.exit_code = if failed.is_empty() {
        EXIT_OK
    } else {
        EXIT_VIOLATION
    };
    let path = manifest_path(&cfg).or_else(|| {
        (!failed.is_empty())
            .then(|| PathBuf::from(format!("tiltwalk-{}.manifest.json", command.name())))
    });
    if let Some(path) = &path {
        manifest.write(path)?;
    }
    if !failed.is_empty() {
        let report = cfg
            .report
            .as_ref()
            .or(path.as_ref())
            .expect("a path is chosen on failure");
        eprintln!(
            "invariant violation: {}; report: {}",
            failed.join(", "),
            report.display()
        );
    }
    Ok(manifest)
}

fn relocate(path: &Option<PathBuf>, dir: &Path) -> Option<PathBuf> {
    path.as_ref()
        .map(|p| dir.join(p.file_name().unwrap_or(p.as_os_str())))
}

/// Rerun the config recorded in a manifest, writing into `out_dir`, and
/// compare every output's hash with the recorded one.
pub fn rerun(manifest_path: &Path, out_dir: &Path) -> Result<i32, CliError> {
    let old = Manifest::read(manifest_path)?;
    let command = Command::from_name(&old.command)
        .ok_or_else(|| CliError::Usage(format!("unknown command `{}`", old.command)))?;
    std::fs::create_dir_all(out_dir)?;
    let mut cfg = old.config.clone();
    cfg.out = relocate(&cfg.out, out_dir)
        .or_else(|| Some(out_dir.join(format!("{}.csv", command.name()))));
    cfg.report = relocate(&cfg.report, out_dir);
    cfg.tables_out = relocate(&cfg.tables_out, out_dir);
    cfg.manifest = Some(
        relocate(&cfg.manifest, out_dir).unwrap_or_else(|| out_dir.join("rerun.manifest.json")),
    );
    let new = run(command, cfg, old.inputs.clone())?;
    let mut all_match = true;
    for before in &old.outputs {
        let same = new
            .output(&before.role)
            .is_some_and(|after| after.sha256 == before.sha256);
        all_match &= same;
        println!(
            "{}: {}",
            before.role,
            if same { "identical" } else { "DIFFERENT" }
        );
    }
    Ok(if !all_match {
        EXIT_VIOLATION
    } else {
        new.exit_code
    })
}
