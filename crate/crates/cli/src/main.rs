use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod figure;
mod mix;
mod svg;
mod sweep;
mod verify;

/// Mixing-time analysis of the generalized Bernoulli-Laplace urn chain.
#[derive(Debug, Parser)]
#[command(name = "blmix", version)]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "BLMIX_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Mixing time and spectral data of one chain instance, as JSON.
    Mix(MixArgs),
    /// A table of mixing times over a ratio axis and a list of sizes, as CSV.
    Sweep(SweepArgs),
    /// Mixing times along one ratio family, as TSV plus an SVG plot.
    Figure(FigureArgs),
    /// Property suites; exits 1 if any check fails.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Backend {
    Float,
    Exact,
}

#[derive(Debug, Args)]
struct MixArgs {
    #[arg(long)]
    n: u32,
    #[arg(long)]
    m: u32,
    #[arg(long)]
    r: u32,
    #[arg(long)]
    k: u32,
    #[arg(long, default_value_t = 0.01)]
    epsilon: f64,
    #[arg(long, value_enum, default_value_t = Backend::Float)]
    backend: Backend,
    /// Take the worst case over every starting state (the default).
    #[arg(long, conflicts_with = "extremes")]
    all_starts: bool,
    /// Only start from the two extreme states; approximate.
    #[arg(long)]
    extremes: bool,
    /// Iteration cap (default: max(1000, 10 t_n) in the generic regime).
    #[arg(long)]
    cap: Option<usize>,
}

#[derive(Debug, Args)]
struct GridArgs {
    /// One of the published tables.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3), conflicts_with_all = ["axis", "ratios"])]
    table: Option<u8>,
    /// Ratio varied along the rows: k, r or m.
    #[arg(long, requires = "ratios")]
    axis: Option<String>,
    #[arg(long, value_delimiter = ',')]
    ratios: Vec<f64>,
    /// Fixed k/n when it is not the axis (default 0.02).
    #[arg(long)]
    k_ratio: Option<f64>,
    /// Fixed r/n when it is not the axis (default 0.5).
    #[arg(long)]
    r_ratio: Option<f64>,
    /// Fixed m/n; when omitted (and m is not the axis) m = r.
    #[arg(long)]
    m_ratio: Option<f64>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    grid: GridArgs,
    /// Sizes (default 50, 100, ..., 1000).
    #[arg(long, value_delimiter = ',')]
    ns: Vec<u32>,
    #[arg(long, default_value_t = 0.01)]
    epsilon: f64,
    #[arg(long)]
    extremes: bool,
    /// CSV destination (default stdout). Failed cells are logged next to it.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct FigureArgs {
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3), conflicts_with_all = ["k_ratio", "r_ratio"])]
    preset: Option<u8>,
    #[arg(long, requires = "r_ratio")]
    k_ratio: Option<f64>,
    #[arg(long, requires = "k_ratio")]
    r_ratio: Option<f64>,
    /// Fixed m/n (default m = r).
    #[arg(long)]
    m_ratio: Option<f64>,
    /// Sizes (default 20, 40, ..., 1000).
    #[arg(long, value_delimiter = ',')]
    ns: Vec<u32>,
    #[arg(long, default_value_t = 0.01)]
    epsilon: f64,
    /// Output prefix; writes `<prefix>.tsv` and `<prefix>.svg`.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Suite {
    Spectral,
    Coupling,
    Llt,
    All,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = Suite::All)]
    suite: Suite,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Monte-Carlo trials per coupling instance.
    #[arg(long, default_value_t = 100_000)]
    trials: usize,
    /// Report destination (default stdout).
    #[arg(long, short)]
    output: Option<PathBuf>,
}

/// Failure modes and their exit codes.
#[derive(Debug)]
pub enum CliError {
    /// Bad parameters or flags (exit 2).
    Invalid(String),
    /// The iteration cap was reached (exit 3).
    Inconclusive(String),
    /// A verification check failed (exit 1).
    Failed,
    /// I/O or serialization (exit 1).
    Io(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Invalid(_) => 2,
            CliError::Inconclusive(_) => 3,
            CliError::Failed | CliError::Io(_) => 1,
        }
    }
}

impl From<blmix::Error> for CliError {
    fn from(e: blmix::Error) -> Self {
        CliError::Invalid(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

pub fn check_epsilon(epsilon: f64) -> Result<(), CliError> {
    if epsilon > 0.0 && epsilon < 1.0 {
        Ok(())
    } else {
        Err(CliError::Invalid(format!("epsilon must lie in (0, 1), got {epsilon}")))
    }
}

/// Writes to `path`, or stdout when it is `None`.
pub fn emit(path: Option<&PathBuf>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Invalid(format!("thread pool: {e}")))?;
    }
    match cli.command {
        Command::Mix(args) => mix::run(&args),
        Command::Sweep(args) => sweep::run(&args),
        Command::Figure(args) => figure::run(&args),
        Command::Verify(args) => verify::run(&args),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match &e {
                CliError::Invalid(msg) => eprintln!("error: {msg}"),
                CliError::Inconclusive(msg) => eprintln!("inconclusive: {msg}"),
                CliError::Io(msg) => eprintln!("error: {msg}"),
                CliError::Failed => eprintln!("verification failed"),
            }
            ExitCode::from(e.code())
        }
    }
}
