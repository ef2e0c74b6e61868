//! `flexreg`: admissible and grid-side flexibility regions of DC networks,
//! flexibility metrics, SVG plots and oracle cross-checks.

mod commands;
mod error;
mod load;
mod oracle;
mod output;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::CliError;

pub const DEFAULT_SEED: u64 = 42;

#[derive(Parser, Debug)]
#[command(name = "flexreg", version, about = "Flexibility regions and metrics for DC power networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Admissible region over the uncertain injections (or --keep labels).
    Region(RegionArgs),
    /// Region gained from grid-side resources over their frozen state.
    GridRegion(GridRegionArgs),
    /// Evaluate the metrics described in a metric input file.
    Metrics(MetricsArgs),
    /// Render a 2-D region file as SVG.
    Plot(PlotArgs),
    /// Cross-check regions against brute-force oracles.
    Oracle(OracleArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Svg,
    Table,
}

#[derive(Args, Debug, Clone)]
pub struct NetworkInput {
    /// Network JSON file.
    #[arg(long)]
    pub network: PathBuf,
    /// Classification JSON (defaults to the one embedded in the network).
    #[arg(long)]
    pub classification: Option<PathBuf>,
    /// Resource list JSON.
    #[arg(long)]
    pub resources: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct OutputArgs {
    /// Output file (stdout when absent); written atomically.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

#[derive(Args, Debug, Clone)]
pub struct SamplingArgs {
    /// Monte-Carlo sample count.
    #[arg(long, default_value_t = 100_000)]
    pub samples: u64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
}

#[derive(Args, Debug)]
pub struct RegionArgs {
    #[command(flatten)]
    pub input: NetworkInput,
    /// Comma-separated labels to project onto.
    #[arg(long)]
    pub keep: Option<String>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct GridRegionArgs {
    #[command(flatten)]
    pub input: NetworkInput,
    /// Comma-separated resource keys to freeze (default: every grid-side resource).
    #[arg(long)]
    pub frozen: Option<String>,
    #[command(flatten)]
    pub sampling: SamplingArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct MetricsArgs {
    /// Metric input JSON file.
    #[arg(long)]
    pub input: PathBuf,
    /// Network JSON, needed for tef and wdf sections.
    #[arg(long)]
    pub network: Option<PathBuf>,
    /// Evaluate in floating point instead of exact arithmetic.
    #[arg(long)]
    pub float: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct PlotArgs {
    /// Region file produced by `region` or `grid-region`.
    #[arg(long)]
    pub region: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum OracleKind {
    /// Shoelace area of each member against Monte-Carlo sampling.
    Sampling,
    /// Region membership against LP completion of the security system.
    Projection,
    /// FACTS region against the union of fixed-setting projections.
    FactsSweep,
    /// Region equality, with a separating witness on failure.
    Equal,
}

#[derive(Args, Debug)]
pub struct OracleArgs {
    #[arg(long, value_enum)]
    pub kind: OracleKind,
    /// Region file (sampling, equal).
    #[arg(long)]
    pub region: Option<PathBuf>,
    /// Second region file (equal).
    #[arg(long)]
    pub against: Option<PathBuf>,
    #[arg(long)]
    pub network: Option<PathBuf>,
    #[arg(long)]
    pub classification: Option<PathBuf>,
    #[arg(long)]
    pub resources: Option<PathBuf>,
    /// Random points checked by the projection oracle.
    #[arg(long, default_value_t = 1000)]
    pub points: usize,
    /// Device settings per side of zero in the FACTS sweep.
    #[arg(long, default_value_t = 5)]
    pub steps: u32,
    /// Largest accepted uncovered fraction in the FACTS sweep.
    #[arg(long, default_value_t = 0.01)]
    pub tolerance: f64,
    #[command(flatten)]
    pub sampling: SamplingArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

fn run(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Region(a) => commands::region(&a),
        Command::GridRegion(a) => commands::grid_region(&a),
        Command::Metrics(a) => commands::metrics(&a),
        Command::Plot(a) => commands::plot(&a),
        Command::Oracle(a) => oracle::run(&a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("FLEXREG_LOG", "error"))
        .format_timestamp(None)
        .init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if e.use_stderr() => {
            let err = CliError::input(e.to_string().lines().next().unwrap_or("invalid arguments").to_string());
            eprintln!("{}", err.to_json_line());
            return ExitCode::from(error::EXIT_INPUT as u8);
        }
        Err(e) => {
            // --help / --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            log::debug!("{e:?}");
            eprintln!("{}", e.to_json_line());
            ExitCode::from(e.code as u8)
        }
    }
}
