//! `dosim`: trajectories, transition tables, figure sweeps and the
//! self-consistency battery from the command line.
//!
//! Exit codes: 0 success, 2 usage or invalid input, 3 numerical failure
//! (including a failed validation check).

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::commands::{EvolveArgs, SweepArgs, TableArgs, ValidateArgs};
use crate::config::ConfigFile;

#[derive(Debug, Parser)]
#[command(
    name = "dosim",
    version,
    about = "Three-state crossing with a finite coupling window"
)]
struct Cli {
    /// TOML file with parameters, tolerances and output settings
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// More log output (repeatable)
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    /// Errors only
    #[arg(short, long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate from one diabatic state and write the trajectory as CSV
    Evolve(EvolveArgs),
    /// Print a 3x3 table of transition probabilities
    Table(TableArgs),
    /// Run a parameter sweep and write CSV or JSON
    Sweep(SweepArgs),
    /// Run the consistency checks
    Validate(ValidateArgs),
}

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError {
            code: 2,
            message: message.into(),
        }
    }

    pub fn numerical(message: impl Into<String>) -> Self {
        CliError {
            code: 3,
            message: message.into(),
        }
    }
}

impl From<dosim::Error> for CliError {
    fn from(e: dosim::Error) -> Self {
        if e.is_validation() {
            CliError::usage(e.to_string())
        } else {
            CliError::numerical(e.to_string())
        }
    }
}

fn init_logging(verbose: u8, quiet: bool) {
    let level = match (quiet, verbose) {
        (true, _) => log::LevelFilter::Error,
        (false, 0) => log::LevelFilter::Warn,
        (false, 1) => log::LevelFilter::Info,
        (false, 2) => log::LevelFilter::Debug,
        _ => log::LevelFilter::Trace,
    };
    env_logger::Builder::new()
        .filter_level(level)
        .parse_default_env()
        .format_timestamp(None)
        .init();
}

fn run(cli: Cli) -> Result<(), CliError> {
    let file = ConfigFile::load(cli.config.as_deref())?;
    match cli.command {
        Command::Evolve(a) => commands::evolve(&a, &file),
        Command::Table(a) => commands::table(&a, &file),
        Command::Sweep(a) => commands::sweep(&a, &file),
        Command::Validate(a) => commands::validate(&a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    init_logging(cli.verbose, cli.quiet);
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
