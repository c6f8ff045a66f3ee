//! `tfjoint`: batch driver for the joint time-delay / sum-frequency
//! uncertainty computations.
//!
//! Exit codes: 0 success, 1 usage, 2 numeric failure, 3 verification failure.

mod cache;
mod commands;
mod config;
mod error;
mod output;
mod plot;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::{ConfigFile, GlobalFlags};
use crate::error::CliError;

#[derive(Parser, Debug)]
#[command(
    name = "tfjoint",
    version,
    about = "Minimum joint time-delay / sum-frequency uncertainty"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Flat key = value file; flags override its entries
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (0 = one per core)
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Eigensolver: auto, dense or lanczos
    #[arg(long, global = true)]
    solver: Option<String>,
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,
    /// Overrides the TFJOINT_CACHE_DIR environment variable
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,
    #[arg(long, global = true)]
    no_cache: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Minimum of Δτ²ΔΩ² over ξ for one (photons, modes) cell
    MinUncertainty(commands::CellArgs),
    /// Convergence sweep over photon and mode ranges, with extrapolation
    Sweep(commands::SweepArgs),
    /// Fit R(m) = R_inf + Σ a_i / m^i to a long-format (n, m, R) CSV
    Extrapolate(commands::ExtrapolateArgs),
    /// Gaussian-family closed form against quadrature
    Gaussian(commands::GaussianArgs),
    /// Mixture lower bounds for photon-number distributions
    MixtureBound(commands::MixtureArgs),
    /// Schmidt-ratio scan of multimode squeezed vacuum
    BsvScan(commands::BsvArgs),
    /// Run the invariant suite
    Verify(verify::VerifyArgs),
    /// SVG line chart from a CSV
    Plot(plot::PlotArgs),
}

fn run(cli: Cli) -> Result<(), CliError> {
    let file = match &cli.global.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    let flags = GlobalFlags {
        seed: cli.global.seed,
        threads: cli.global.threads,
        solver: cli.global.solver,
        output_dir: cli.global.output_dir,
        cache_dir: cli.global.cache_dir,
        no_cache: cli.global.no_cache,
    };
    let ctx = commands::Context { file, flags };
    match cli.command {
        Command::MinUncertainty(a) => commands::min_uncertainty(ctx, a),
        Command::Sweep(a) => commands::sweep(ctx, a),
        Command::Extrapolate(a) => commands::extrapolate(ctx, a),
        Command::Gaussian(a) => commands::gaussian(ctx, a),
        Command::MixtureBound(a) => commands::mixture_bound(ctx, a),
        Command::BsvScan(a) => commands::bsv_scan(ctx, a),
        Command::Verify(a) => verify::run(ctx, a),
        Command::Plot(a) => plot::run(ctx, a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("tfjoint: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
