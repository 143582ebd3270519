//! Command-line front end: dataset generation, learning, evaluation and grid
//! search. File formats are described in [`io`].

pub mod commands;
pub mod config;
pub mod error;
pub mod io;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::commands::{cmd_evaluate, cmd_generate, cmd_gridsearch, cmd_learn, file_dataset};
use crate::config::{DatasetSpec, ExperimentConfig, Overrides};
pub use crate::error::{CliError, Result};

/// Environment variable holding the log filter (`error`, `info`, `debug`, …).
pub const LOG_ENV: &str = "TVGL_LOG";

#[derive(Debug, Parser)]
#[command(
    name = "tvgl",
    version,
    about = "Learn time-varying graphs from windowed signals"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic dataset: signals, ground truth and manifest.
    Generate {
        /// Generator: tver, lfer or rw (overrides `dataset.kind`).
        #[arg(long)]
        kind: Option<String>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Learn one graph per window of a signals file.
    Learn {
        /// Signals file (overrides the configured dataset).
        #[arg(long)]
        signals: Option<PathBuf>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Compare estimated graphs with ground truth.
    Evaluate {
        /// Directory of estimated graphs.
        estimate: PathBuf,
        /// Directory of ground-truth graphs.
        truth: PathBuf,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Grid search over alpha, beta and eta.
    Gridsearch {
        #[arg(long)]
        signals: Option<PathBuf>,
        /// Ground-truth directory for `--signals`.
        #[arg(long)]
        truth: Option<PathBuf>,
        #[command(flatten)]
        common: CommonArgs,
    },
}

#[derive(Debug, Args, Default)]
pub struct CommonArgs {
    /// TOML configuration file; flags override its keys.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[arg(long, value_name = "U64")]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    #[arg(long, value_parser = ["fused", "group", "none"])]
    pub regularizer: Option<String>,
    #[arg(long, value_name = "REAL")]
    pub alpha: Option<f64>,
    #[arg(long, value_name = "REAL")]
    pub beta: Option<f64>,
    #[arg(long, value_name = "REAL")]
    pub eta: Option<f64>,
    #[arg(long, value_name = "REAL")]
    pub tolerance: Option<f64>,
    #[arg(long, value_name = "N")]
    pub max_iters: Option<usize>,
}

impl CommonArgs {
    /// Configuration file (or defaults) with the flags applied.
    pub fn resolve(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::default(),
        };
        cfg.apply(&Overrides {
            seed: self.seed,
            out: self.out.clone(),
            regularizer: self.regularizer.clone(),
            alpha: self.alpha,
            beta: self.beta,
            eta: self.eta,
            tolerance: self.tolerance,
            max_iters: self.max_iters,
        });
        Ok(cfg)
    }
}

/// Runs a parsed command and returns the manifest it wrote.
pub fn run(cli: Cli) -> Result<String> {
    match cli.command {
        Command::Generate { kind, common } => {
            let mut cfg = common.resolve()?;
            if let Some(kind) = kind {
                if cfg.dataset.kind() != kind {
                    cfg.dataset = DatasetSpec::from_kind(&kind)?;
                }
            }
            cmd_generate(&cfg)
        }
        Command::Learn { signals, common } => {
            let mut cfg = common.resolve()?;
            file_dataset(&mut cfg, signals, None)?;
            cmd_learn(&cfg)
        }
        Command::Evaluate {
            estimate,
            truth,
            common,
        } => cmd_evaluate(&common.resolve()?, &estimate, &truth),
        Command::Gridsearch {
            signals,
            truth,
            common,
        } => {
            let mut cfg = common.resolve()?;
            file_dataset(&mut cfg, signals, truth)?;
            cmd_gridsearch(&cfg)
        }
    }
}
