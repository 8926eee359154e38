//! Experiment runner behind the `plsense` binary.
//!
//! Every subcommand reads one JSON configuration, runs to completion and
//! only then writes its CSV tables, so identical configurations always
//! produce byte-identical files.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod experiments;
pub mod output;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use config::{parse_config, parse_config_str, ExperimentConfig};
pub use error::CliError;
pub use output::Table;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Range resolution against bandwidth for each phase velocity preset.
    ResolutionSweep,
    /// Maximum unambiguous range against the number of modems.
    RangeSweep,
    /// Reflectogram and transferogram rates per scheme.
    Rates,
    /// Measurement campaigns; writes one trace per modem pair.
    Simulate,
    /// Per-modem Monte-Carlo SINR of each scheme.
    CompareSinr,
}

#[derive(Debug, Parser)]
#[command(name = "plsense", version, about = "Power line sensing by OCDM reflectometry")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON experiment configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (overrides the configuration).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Random seed (overrides the configuration).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Monte-Carlo trials (overrides the configuration).
    #[arg(long, global = true)]
    pub trials: Option<usize>,
    /// Only report errors.
    #[arg(long, global = true)]
    pub quiet: bool,
}

/// Applies command-line overrides to a parsed configuration.
pub fn resolve(cli: &Cli) -> Result<ExperimentConfig, CliError> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::Validation("--config <path> is required".into()))?;
    let mut cfg = parse_config(path)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(trials) = cli.trials {
        cfg.trials = trials;
    }
    if let Some(out) = &cli.out {
        cfg.output_dir = out.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Tables produced by `command`.
pub fn tables_for(command: Command, cfg: &ExperimentConfig) -> Result<Vec<Table>, CliError> {
    match command {
        Command::ResolutionSweep => Ok(experiments::resolution_sweep(cfg)),
        Command::RangeSweep => Ok(experiments::range_sweep(cfg)),
        Command::Rates => Ok(experiments::rates(cfg)),
        Command::Simulate => experiments::simulate(cfg),
        Command::CompareSinr => experiments::compare(cfg),
    }
}

/// Runs `command` and writes its tables; returns the files written.
pub fn run(command: Command, cfg: &ExperimentConfig) -> Result<Vec<PathBuf>, CliError> {
    let tables = tables_for(command, cfg)?;
    output::write_tables(&cfg.output_dir, &tables, &cfg.hash(), cfg.seed)
}
