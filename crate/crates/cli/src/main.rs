//! `waca` command line: single-shot clustering, baseline comparison, full
//! sweeps, dissemination runs, and scripted topology events.
//!
//! Every subcommand writes a manifest with the fully resolved configuration
//! next to its outputs, so any result can be reproduced from the manifest
//! alone. Exit codes: 0 success, 2 usage, 65 input parse, 70 internal,
//! 74 io.

mod commands;
mod source;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "waca",
    version,
    about = "Weighted clusterhead election and dissemination simulator"
)]
struct Cli {
    /// Directory for output files.
    #[arg(long, global = true, env = "WACA_OUT_DIR", default_value = ".")]
    out_dir: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Deploy or load a topology, settle the election, and export the state.
    Cluster(commands::ClusterArgs),
    /// Run the weighted election and the WCA baseline on the same topology.
    Compare(commands::CompareArgs),
    /// Sweep node counts and transmission ranges; emit rows, aggregates, and
    /// trend statistics.
    Experiment(commands::ExperimentArgs),
    /// Settle a topology and spread a chunked file from the backbone to the
    /// interested devices.
    Disseminate(commands::DisseminateArgs),
    /// Replay a script of topology events, recording the state after each.
    Events(commands::EventsArgs),
}

/// Error classes mapped to distinct exit codes.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Parse(String),
    Io(String),
    Internal(String),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Parse(_) => 65,
            CliError::Io(_) => 74,
            CliError::Internal(_) => 70,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Parse(m) | CliError::Io(m) | CliError::Internal(m) => m,
        }
    }
}

impl From<waca_core::Error> for CliError {
    fn from(e: waca_core::Error) -> Self {
        use waca_core::Error as E;
        match e {
            E::Config(_) => CliError::Usage(e.to_string()),
            E::UnknownNode(_) | E::DuplicateNode(_) | E::Parse(_) | E::ParseLine { .. } => {
                CliError::Parse(e.to_string())
            }
            E::Io(_) => CliError::Io(e.to_string()),
        }
    }
}

fn main() {
    let cli = Cli::parse();
    let out_dir = cli.out_dir.clone();
    let result = match cli.command {
        Command::Cluster(args) => commands::run_cluster(&out_dir, args),
        Command::Compare(args) => commands::run_compare(&out_dir, args),
        Command::Experiment(args) => commands::run_experiment(&out_dir, args),
        Command::Disseminate(args) => commands::run_disseminate(&out_dir, args),
        Command::Events(args) => commands::run_events(&out_dir, args),
    };
    if let Err(e) = result {
        eprintln!("error: {}", e.message());
        std::process::exit(e.exit_code());
    }
}
