use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "vissm", version, about = "Variable-invariant 2D state space models: checks, benchmarks, simulations, forecasts")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the invariant suites.
    Check(CheckArgs),
    /// Time both scan engines across variable counts.
    Bench(BenchArgs),
    /// Run the controlled VAR(1) studies.
    Simulate(SimulateArgs),
    /// One-step forecasts for a CSV series.
    Forecast(ForecastArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    /// RNG seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Config file of `key = value` lines; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory; without it results go to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[command(flatten)]
    pub common: Common,
    /// Comma-separated suite names (default: all).
    #[arg(long)]
    pub suites: Option<String>,
    /// Perturb one off-diagonal entry of the canonical coupling used by the equivariance suite.
    #[arg(long)]
    pub break_coupling: bool,
    /// Random cases per suite.
    #[arg(long)]
    pub cases: Option<usize>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub common: Common,
    /// Comma-separated variable counts.
    #[arg(long)]
    pub vars: Option<String>,
    /// Sequence length.
    #[arg(long)]
    pub seq: Option<usize>,
    /// Timed repeats per engine and variable count.
    #[arg(long)]
    pub repeats: Option<usize>,
    /// Pooling for the VI engine: mean, sum or attention.
    #[arg(long)]
    pub agg: Option<String>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: Common,
    /// permutation, cscaling or both.
    #[arg(long)]
    pub study: Option<String>,
    /// Comma-separated variable counts.
    #[arg(long)]
    pub vars: Option<String>,
    /// Sequence length.
    #[arg(long)]
    pub seq: Option<usize>,
    /// Random variable orderings in the permutation study.
    #[arg(long)]
    pub trials: Option<usize>,
    /// Pooling for the VI engine: mean, sum or attention.
    #[arg(long)]
    pub agg: Option<String>,
}

#[derive(Debug, Args)]
pub struct ForecastArgs {
    #[command(flatten)]
    pub common: Common,
    /// CSV file, rows = time steps, columns = variables, optional header.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Pooling: mean, sum or attention.
    #[arg(long)]
    pub agg: Option<String>,
    #[arg(long)]
    pub delta_long: Option<f64>,
    #[arg(long)]
    pub delta_short: Option<f64>,
    #[arg(long)]
    pub delta_freq: Option<f64>,
    /// Trailing window of the spectral features (even).
    #[arg(long)]
    pub window: Option<usize>,
}
