mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

/// Steady heat transfer and aqueous humor flow in the eye.
#[derive(Debug, Parser)]
#[command(name = "ocuflow", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve one scenario and write fields, statistics and logs.
    ///
    /// Exit status is 0 when Newton converged, 2 when it did not (all files
    /// are still written) and 1 on any error.
    Run(RunArgs),
    /// Manufactured-solution convergence study on refined unit squares.
    MmsConvergence(MmsArgs),
    /// Solve once per value of a numeric scenario parameter and tabulate
    /// wall shear stress.
    Sweep(SweepArgs),
    /// Compare solver trees and model variants on one scenario.
    BenchSolvers(BenchArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Configuration file (TOML).
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Posture overriding the one in the config: standing, supine or prone.
    #[arg(long)]
    pub posture: Option<String>,
    /// Model variant overriding the config, e.g. `stokes+linearized`.
    #[arg(long)]
    pub variant: Option<String>,
}

#[derive(Debug, Args)]
pub struct MmsArgs {
    /// Configuration using the `mms` mesh generator; its `n` is the
    /// coarsest level. Without it the trigonometric solution on a 4x4
    /// grid is used.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Number of levels, each doubling the previous resolution.
    #[arg(long, default_value_t = 4)]
    pub levels: u32,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Dotted key of the swept parameter.
    #[arg(long, default_value = "params.T_amb")]
    pub param: String,
    /// Comma-separated values, or `start:stop:step`.
    #[arg(long)]
    pub values: String,
    /// Quantity to report; only wall shear stress is available.
    #[arg(long, default_value = "wss", value_parser = ["wss"])]
    pub report: String,
    /// Sweep points solved at the same time.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Comma-separated solver presets; at least two.
    #[arg(long, default_value = "schur-upper,schur-upper-velocity-gmres")]
    pub trees: String,
    /// Comma-separated variants, or `all` for the four model variants.
    #[arg(long, default_value = "all")]
    pub variants: String,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Err(e) = commands::configure_threads() {
        eprintln!("error: {e:#}");
        return ExitCode::from(1);
    }
    let result = match cli.command {
        Command::Run(a) => commands::run(&a),
        Command::MmsConvergence(a) => commands::mms(&a),
        Command::Sweep(a) => commands::sweep(&a),
        Command::BenchSolvers(a) => commands::bench(&a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
