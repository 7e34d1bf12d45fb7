//! Command-line experiments: codebook generation, analysis, Monte-Carlo
//! estimation, closed-form tables and figure sweeps. Every file-producing
//! run writes a manifest that [`commands::replay`] can rerun bit for bit.

pub mod commands;
pub mod error;
pub mod manifest;
pub mod spec;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use pilotgain::channel::DEFAULT_PATHLOSS_EXPONENT;
use pilotgain::codebooks::PackingConfig;

use crate::error::{CliError, CliResult};
use crate::manifest::Inputs;
use crate::spec::{
    AnalyzeSpec, ExperimentSpec, Figure, Format, GainsSource, GenKind, GenSpec, MethodArg, ReproduceSpec,
    SimulateSpec, TheorySpec,
};

/// Environment variable capping the worker thread count.
pub const THREADS_ENV: &str = "PILOTGAIN_THREADS";

#[derive(Parser, Debug)]
#[command(name = "pilotgain", version, about = "Non-orthogonal pilot design and large-scale gain estimation")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Codebook utilities.
    Codebook {
        #[command(subcommand)]
        action: CodebookAction,
    },
    /// Rank, coherence and noise enhancement of a codebook file.
    Analyze(AnalyzeArgs),
    /// Monte-Carlo gain estimation over an antenna-count sweep.
    Simulate(SimulateArgs),
    /// Closed-form noise enhancement of equiangular codebooks.
    Theory(TheoryArgs),
    /// Regenerate the data behind a noise-enhancement figure.
    Reproduce(ReproduceArgs),
    /// Rerun a manifest and check every digest.
    Replay {
        manifest: PathBuf,
        /// Write into this directory instead of the manifest's own.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
enum CodebookAction {
    /// Generate a codebook file with its coherence report and manifest.
    Gen(GenArgs),
}

#[derive(Args, Debug, Clone, Copy)]
struct PackingArgs {
    /// Iteration cap per packing run.
    #[arg(long, default_value_t = PackingConfig::default().max_iters)]
    max_iters: usize,
    /// Independent random starts; the lowest coherence wins.
    #[arg(long, default_value_t = PackingConfig::default().restarts)]
    restarts: usize,
    /// Stop when coherence improves by less than this over 100 iterations.
    #[arg(long, default_value_t = PackingConfig::default().tol)]
    tol: f64,
}

impl PackingArgs {
    fn config(self, seed: u64) -> PackingConfig {
        PackingConfig { max_iters: self.max_iters, tol: self.tol, seed, restarts: self.restarts }
    }
}

#[derive(Args, Debug)]
struct GenArgs {
    #[arg(long, value_enum)]
    kind: GenKind,
    #[arg(long)]
    q: usize,
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Codebook file; the report and manifest are written next to it.
    #[arg(short = 'o', long = "output")]
    output: PathBuf,
    #[command(flatten)]
    packing: PackingArgs,
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    /// Codebook file to analyze.
    #[arg(long)]
    codebook: String,
    /// Exit 1 when the design matrix is rank deficient.
    #[arg(long)]
    require_full_rank: bool,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Report file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    /// Pilot codebook file.
    #[arg(long)]
    codebook: String,
    /// Linear gains, one per line.
    #[arg(long, conflicts_with = "distances", required_unless_present = "distances")]
    gains: Option<String>,
    /// User distances, one per line, mapped to gains `d^(−alpha)`.
    #[arg(long)]
    distances: Option<String>,
    #[arg(long, default_value_t = DEFAULT_PATHLOSS_EXPONENT, requires = "distances")]
    alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    sigma_w2: f64,
    /// Noise variance the estimator subtracts (defaults to --sigma-w2).
    #[arg(long)]
    assumed_sigma_w2: Option<f64>,
    /// Antenna counts, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    m: Vec<usize>,
    #[arg(long, default_value_t = 20)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = MethodArg::Nnls)]
    method: MethodArg,
    /// Estimate from the exact covariance instead of a sampled one.
    #[arg(long)]
    exact_covariance: bool,
    /// Draw this many active users per trial; the rest get zero gain.
    #[arg(long)]
    active: Option<usize>,
    /// Estimates above this count as detected users.
    #[arg(long, default_value_t = 1e-6)]
    support_tol: f64,
    /// KKT residual the NNLS solver accepts as optimal.
    #[arg(long, default_value_t = 1e-10)]
    kkt_tol: f64,
    /// Solver iteration cap; defaults to 10·K.
    #[arg(long)]
    max_iters: Option<usize>,
    /// Directory for trials.csv, summary.json and manifest.json.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct TheoryArgs {
    #[arg(long, default_value_t = 2)]
    q_min: usize,
    #[arg(long, default_value_t = 12)]
    q_max: usize,
    /// Every q < k ≤ q² rather than only k = q².
    #[arg(long)]
    all_k: bool,
    /// CSV file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ReproduceArgs {
    #[arg(value_enum)]
    figure: Figure,
    /// Directory for the CSV, plot script and manifest.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 2)]
    q_min: usize,
    #[arg(long, default_value_t = 10)]
    q_max: usize,
    /// Pilot length for fig2 and fig3.
    #[arg(long, default_value_t = 6)]
    q: usize,
    /// Gaussian draws per point in fig1.
    #[arg(long, default_value_t = 10)]
    seeds: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    packing: PackingArgs,
}

fn optional_output(out: Option<&Path>) -> CliResult<(PathBuf, Option<String>)> {
    match out {
        Some(p) => {
            let (dir, name) = commands::split_output(p)?;
            Ok((dir, Some(name)))
        }
        None => Ok((PathBuf::new(), None)),
    }
}

fn dispatch(cli: Cli) -> CliResult<()> {
    let (spec, dir) = match cli.command {
        Command::Replay { manifest, out } => {
            commands::replay::run(&manifest, out.as_deref())?;
            return Ok(());
        }
        Command::Codebook { action: CodebookAction::Gen(a) } => {
            let (dir, file_name) = commands::split_output(&a.output)?;
            let packing = (a.kind == GenKind::Grassmannian).then(|| a.packing.config(a.seed));
            let spec = GenSpec { kind: a.kind, q: a.q, k: a.k, seed: a.seed, file_name, packing };
            (ExperimentSpec::CodebookGen(spec), dir)
        }
        Command::Analyze(a) => {
            let (dir, output) = optional_output(a.out.as_deref())?;
            let spec = AnalyzeSpec {
                codebook: a.codebook,
                require_full_rank: a.require_full_rank,
                format: a.format,
                output,
            };
            (ExperimentSpec::Analyze(spec), dir)
        }
        Command::Simulate(a) => {
            let gains = match (a.gains, a.distances) {
                (Some(path), None) => GainsSource::Gains { path },
                (None, Some(path)) => GainsSource::Distances { path, alpha: a.alpha },
                _ => return Err(CliError::usage("give exactly one of --gains or --distances")),
            };
            let spec = SimulateSpec {
                codebook: a.codebook,
                gains,
                sigma_w2: a.sigma_w2,
                assumed_sigma_w2: a.assumed_sigma_w2,
                m: a.m,
                trials: a.trials,
                seed: a.seed,
                method: a.method,
                exact_covariance: a.exact_covariance,
                active: a.active,
                support_tol: a.support_tol,
                kkt_tol: a.kkt_tol,
                max_iters: a.max_iters,
            };
            (ExperimentSpec::Simulate(spec), a.out)
        }
        Command::Theory(a) => {
            let (dir, output) = optional_output(a.out.as_deref())?;
            let spec = TheorySpec { q_min: a.q_min, q_max: a.q_max, all_k: a.all_k, output };
            (ExperimentSpec::Theory(spec), dir)
        }
        Command::Reproduce(a) => {
            let spec = ReproduceSpec {
                figure: a.figure,
                q_min: a.q_min,
                q_max: a.q_max,
                q: a.q,
                seeds: a.seeds,
                seed: a.seed,
                packing: a.packing.config(a.seed),
            };
            (ExperimentSpec::Reproduce(spec), a.out)
        }
    };
    commands::execute(&spec, &dir, Inputs::default())?;
    Ok(())
}

fn thread_count() -> CliResult<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Some(n)),
            _ => Err(CliError::usage(format!("{THREADS_ENV} must be a positive integer, got {v:?}"))),
        },
        Err(_) => Ok(None),
    }
}

fn run_parsed(cli: Cli) -> CliResult<()> {
    match thread_count()? {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::runtime(e.to_string()))?
            .install(|| dispatch(cli)),
        None => dispatch(cli),
    }
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code: 0 success, 1 runtime failure, 2 usage.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run_parsed(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
