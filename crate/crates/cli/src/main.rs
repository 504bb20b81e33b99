//! `patrec` command-line front end.

// `!(x > 0)` style guards are used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod error;
mod logging;
mod scenario;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use patrec::Method;

use crate::error::{CliError, CliResult, EXIT_USAGE};

#[derive(Debug, Parser)]
#[command(name = "patrec", version, about = "2D photoacoustic tomography workbench")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Synthesise sensor data for the scenario's phantom.
    Simulate(CommonArgs),
    /// Reconstruct images from previously simulated data.
    Reconstruct(ReconstructArgs),
    /// Measure resolution and contrast of reconstructed images.
    Analyze(AnalyzeArgs),
    /// Simulate, reconstruct and analyse for several sensor counts.
    Sweep(ReconstructArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Scenario file (TOML).
    #[arg(long)]
    pub scenario: PathBuf,
    /// Output directory, overriding the scenario's.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Seed of the vascular phantom, overriding the scenario's.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Sensor count(s), comma separated. A sweep takes a list; the other
    /// commands accept a single value overriding the scenario's.
    #[arg(long, value_delimiter = ',')]
    pub sensors: Vec<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct ReconstructArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Reconstruction method(s), comma separated: tr, bp, tbp.
    #[arg(long, value_delimiter = ',', value_parser = parse_method)]
    pub method: Vec<Method>,
    /// TBP truncation bound (rad/s).
    #[arg(long)]
    pub mu: Option<f64>,
    /// Points per wavelength from which the TBP bound is recommended.
    #[arg(long = "ppw-target")]
    pub ppw_target: Option<f64>,
    /// Simulate the data first instead of reading it from the output directory.
    #[arg(long)]
    pub pipeline: bool,
}

#[derive(Debug, Clone, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub reconstruct: ReconstructArgs,
    /// Image files (CSV) to analyse; defaults to the reconstructions in the
    /// output directory.
    #[arg(long, value_delimiter = ',')]
    pub images: Vec<PathBuf>,
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse().map_err(|e: patrec::Error| e.to_string())
}

fn configure_threads() -> CliResult<()> {
    let Ok(value) = std::env::var("PATREC_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::usage(format!("PATREC_THREADS must be a positive integer, got '{value}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::usage(format!("cannot configure {threads} worker threads: {e}")))
}

fn run(cli: Cli) -> CliResult<()> {
    configure_threads()?;
    match cli.command {
        Command::Simulate(args) => commands::simulate(&args),
        Command::Reconstruct(args) => commands::reconstruct(&args),
        Command::Analyze(args) => commands::analyze(&args),
        Command::Sweep(args) => commands::sweep(&args),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            log::error!("{e}");
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
