mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use sketchsolve::Error;

#[derive(Debug, Parser)]
#[command(name = "sketchsolve", version, about = "Sublinear low-rank system solving from length-squared samples")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic instance with prescribed rank and condition number.
    Gen(GenArgs),
    /// Estimate entries of A⁻¹b.
    Query(SolveArgs),
    /// Draw indices from (approximately) D_{A⁻¹b}.
    Sample(SolveArgs),
    /// PSD variant: b is only queried, never sampled.
    Psd(SolveArgs),
    /// Dense pseudo-inverse solution.
    Exact(ExactArgs),
    /// Dense diagnostics of one sketch.
    Verify(SolveArgs),
    /// Spectrum of the sketch W, to help choose k.
    RankProbe(ProbeArgs),
    /// Ledger growth across problem sizes.
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ProfileArg {
    Linear,
    Geometric,
}

#[derive(Debug, Clone, Copy, ValueEnum, PartialEq, Eq)]
pub enum ModeArg {
    Query,
    Sample,
    Psd,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum RouteArg {
    Nested,
    Collapsed,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub m: usize,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub k: usize,
    #[arg(long, default_value_t = 1.0)]
    pub kappa: f64,
    #[arg(long, value_enum, default_value_t = ProfileArg::Linear)]
    pub profile: ProfileArg,
    /// `in-range`, `orthogonal` or `mixed(c)`.
    #[arg(long, default_value = "in-range")]
    pub b_mode: String,
    /// Spectral norm of A.
    #[arg(long, default_value_t = 1.0)]
    pub norm: f64,
    /// Hermitian PSD instance (requires m = n).
    #[arg(long)]
    pub psd: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory; receives matrix.txt, vector.txt and instance.json.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long)]
    pub matrix: PathBuf,
    #[arg(long)]
    pub vector: Option<PathBuf>,
    #[arg(long)]
    pub k: usize,
    /// Sketch size; defaults to max(20k, k·ceil(ln(mn))).
    #[arg(long)]
    pub p: Option<usize>,
    #[arg(long, default_value_t = 0.05)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 0.05)]
    pub delta: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Entry indices to query, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "0")]
    pub j: Vec<usize>,
    /// What to do with the prepared state (`psd` only distinguishes query and sample).
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    #[arg(long, default_value_t = 0.1)]
    pub tau_b: f64,
    /// Report JSON destination; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also report the sample count of the original analysis.
    #[arg(long = "paper-p")]
    pub theory_p: bool,
    /// Build the column-orientation trees as well.
    #[arg(long)]
    pub with_transpose: bool,
    #[arg(long, default_value_t = 100_000)]
    pub samples: u64,
    #[arg(long, default_value_t = 20_000)]
    pub max_group_size: u64,
    #[arg(long, value_enum, default_value_t = RouteArg::Nested)]
    pub route: RouteArg,
    /// Bound on ‖b‖ for the PSD variant.
    #[arg(long, default_value_t = 1.0)]
    pub b_norm_hint: f64,
    /// Skip the dense comparison.
    #[arg(long)]
    pub no_oracle: bool,
}

#[derive(Debug, Args)]
pub struct ExactArgs {
    #[arg(long)]
    pub matrix: PathBuf,
    #[arg(long)]
    pub vector: PathBuf,
    /// Solution vector destination; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ProbeArgs {
    #[arg(long)]
    pub matrix: PathBuf,
    #[arg(long)]
    pub p: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Number of singular values to print.
    #[arg(long, default_value_t = 20)]
    pub top: usize,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Column counts to sweep, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub n: Vec<usize>,
    /// Row count shared by every cell.
    #[arg(long, default_value_t = 1000)]
    pub m: usize,
    /// Fixed parameters, e.g. `k=3,kappa=5`.
    #[arg(long, default_value = "k=3,kappa=5")]
    pub fixed: String,
    #[arg(long)]
    pub p: Option<usize>,
    #[arg(long, default_value_t = 0.05)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 0.05)]
    pub delta: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Entry queries per cell after preparation.
    #[arg(long, default_value_t = 10)]
    pub queries: usize,
    /// Solution samples per cell.
    #[arg(long, default_value_t = 0)]
    pub samples: u64,
    #[arg(long, default_value_t = 20_000)]
    pub max_group_size: u64,
    /// Largest dimension compared against the dense oracle.
    #[arg(long, default_value_t = 5000)]
    pub oracle_limit: usize,
    /// Largest allowed growth of total ledger queries per tenfold growth of n.
    #[arg(long, default_value_t = 3.0)]
    pub max_ratio: f64,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Report JSON destination.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

pub enum Failure {
    Checks,
    Error(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Error(e)
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io(_) | Error::Parse { .. } | Error::Json(_) => 2,
        Error::InvalidConfig(_)
        | Error::DimensionMismatch { .. }
        | Error::DimensionTooLarge { .. }
        | Error::IndexError { .. }
        | Error::DuplicateEntry { .. }
        | Error::TransposeUnavailable
        | Error::EmptyVector => 3,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(3) } else { ExitCode::SUCCESS };
        }
    };
    if let Some(t) = std::env::var("SOLVE_THREADS").ok().and_then(|s| s.parse::<usize>().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t.max(1)).build_global();
    }
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Checks) => ExitCode::from(1),
        Err(Failure::Error(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
