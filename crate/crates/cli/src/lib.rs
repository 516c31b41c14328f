//! Command-line front end: config parsing, subcommand dispatch and file output.

pub mod commands;
pub mod config;
pub mod output;

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use thiserror::Error;

pub use config::ExperimentConfig;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical abort: {0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) | CliError::Internal(_) => 4,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "warpflow",
    version,
    about = "Graphical mean curvature flow in warped products"
)]
pub struct Cli {
    /// TOML experiment config.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output directory; overrides `output_dir` from the config.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Only log warnings and errors.
    #[arg(long, global = true)]
    pub quiet: bool,
    /// Worker threads for sweeps.
    #[arg(long, global = true, value_name = "N")]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Certify the warp conditions on a probe grid.
    CheckConditions,
    /// Tabulate the de Sitter-Schwarzschild warp.
    DssBuild,
    /// Integrate the slice and angle barrier ODEs.
    RunBarrier,
    /// Evolve a graph by mean curvature flow.
    RunFlow,
    /// Identity residuals of a random graph at two resolutions.
    ValidateIdentities,
    /// Repeat run-flow along one config parameter.
    Sweep,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::CheckConditions => "check-conditions",
            Command::DssBuild => "dss-build",
            Command::RunBarrier => "run-barrier",
            Command::RunFlow => "run-flow",
            Command::ValidateIdentities => "validate-identities",
            Command::Sweep => "sweep",
        }
    }
}

/// Runs one parsed invocation.
pub fn run(cli: &Cli) -> Result<(), CliError> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::Config("--config PATH is required".into()))?;
    let mut cfg = ExperimentConfig::from_path(path)?;
    if let Some(out) = &cli.out {
        cfg.output_dir = out.clone();
    }
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be >= 1".into()));
        }
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    commands::dispatch(cli.command, &cfg)
}
