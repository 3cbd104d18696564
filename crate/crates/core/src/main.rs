//! Command-line front end for the short wave - long wave interaction solver.
//!
//! Exit codes: 0 success, 2 configuration rejected, 3 numerical failure
//! (positivity loss, divergence, failed invariant checks), 4 I/O failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use swmhd::commands;

#[derive(Parser)]
#[command(
    name = "swmhd",
    version,
    about = "Spectral solver for short wave - long wave interactions in planar magnetohydrodynamics"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Integrate the coupled viscous system and write snapshots plus monitors
    Simulate {
        /// Path to a TOML run configuration
        config: PathBuf,
    },
    /// Run the vanishing-viscosity ladder and write the distance table
    Sweep {
        /// Path to a TOML run configuration
        config: PathBuf,
    },
    /// Integrate once and verify conservation, entropy, and constitutive bounds
    CheckInvariants {
        /// Path to a TOML run configuration
        config: PathBuf,
    },
    /// Tabulate one weak entropy pair and its gradients over a state grid
    EntropyDiag {
        /// Path to a TOML run configuration
        config: PathBuf,
        /// Test function id: one, minus-one, linear, minus-linear, square, bump
        #[arg(long)]
        zeta: String,
    },
    /// Integrate the decoupled limit system and write its trajectory
    LimitRun {
        /// Path to a TOML run configuration
        config: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Cmd::Simulate { config } => commands::simulate(config),
        Cmd::Sweep { config } => commands::sweep(config),
        Cmd::CheckInvariants { config } => commands::check_invariants(config),
        Cmd::EntropyDiag { config, zeta } => commands::entropy_diag(config, zeta),
        Cmd::LimitRun { config } => commands::limit_run(config),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
