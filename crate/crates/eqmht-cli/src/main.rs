//! `eqmht` command line: table reproduction, power curves, and the
//! invariant verification suite.

mod commands;
mod manifest;
mod settings;

use clap::{Parser, Subcommand};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "eqmht",
    version,
    about = "Monte Carlo tables, power curves, and verification for the \
             equicorrelated multiple-testing model"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Reproduce the simulation tables over a (p, rho) grid
    Tables(commands::tables::TablesArgs),
    /// Emit power / Type II curves for the fixed-cutoff and NP tests
    Power(commands::power::PowerArgs),
    /// Run the library's invariant checks and report pass/fail per check
    Verify(commands::verify::VerifyArgs),
}

/// Classified CLI failure; the variant decides the exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad flag values or inconsistent configuration (exit 2).
    Usage(String),
    /// Filesystem failure (exit 3).
    Io(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Io(m) => write!(f, "{m}"),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Usage(_) => ExitCode::from(2),
            CliError::Io(_) => ExitCode::from(3),
        }
    }

    pub fn io(path: &std::path::Path, err: std::io::Error) -> Self {
        CliError::Io(format!("{}: {err}", path.display()))
    }
}

impl From<eqmht::Error> for CliError {
    fn from(e: eqmht::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Tables(args) => commands::tables::run(args),
        Command::Power(args) => commands::power::run(args),
        Command::Verify(args) => return commands::verify::run(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
