//! `kinlab`: simulation, inequality verification and dyadic diagnostics.

mod commands;
mod config;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use kinlab::norms::BesovSpec;
use kinlab::parallel::run_configured;

use commands::VerifyFlags;

#[derive(Parser)]
#[command(name = "kinlab", version, about = "Numerical lab for the cutoff hard-potential Boltzmann equation near a Maxwellian")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Parses `inf` as well as ordinary numbers.
fn exponent(s: &str) -> Result<f64, String> {
    match s {
        "inf" | "infinity" => Ok(f64::INFINITY),
        _ => s.parse::<f64>().map_err(|e| e.to_string()),
    }
}

#[derive(Subcommand)]
enum Command {
    /// Time-march the configured initial datum and log diagnostics.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run the inequality registry and write the report bundle.
    Verify {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Comma-separated registry ids.
        #[arg(long, value_delimiter = ',')]
        only: Option<Vec<String>>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Besov norm of a stored field, printed as JSON.
    Norms {
        #[arg(long)]
        field: PathBuf,
        #[arg(long, default_value_t = 1.5)]
        s: f64,
        #[arg(long, default_value = "2", value_parser = exponent)]
        p: f64,
        #[arg(long, default_value = "1", value_parser = exponent)]
        r: f64,
        #[arg(long)]
        homogeneous: bool,
    },
    /// Per-block norms of a stored field as CSV.
    Decompose {
        #[arg(long)]
        field: PathBuf,
        #[arg(long, default_value_t = 1.5)]
        s: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn dispatch(cmd: Command) -> kinlab::Result<i32> {
    match cmd {
        Command::Simulate { config, out, seed } => commands::simulate(&config, out.as_deref(), seed),
        Command::Verify { config, only, seed, trials, out } => {
            commands::verify(&VerifyFlags { config, only, seed, trials, out })
        }
        Command::Norms { field, s, p, r, homogeneous } => {
            let spec = BesovSpec::new(s, p, r);
            commands::norms(&field, &if homogeneous { spec.homogeneous() } else { spec })
        }
        Command::Decompose { field, s, out } => commands::decompose(&field, s, out.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let status = match run_configured(|| dispatch(cli.command)).and_then(|r| r) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("kinlab: {e}");
            commands::exit_code(&e)
        }
    };
    ExitCode::from(status as u8)
}
