//! Command-line front end.

mod commands;
mod config;

pub use commands::{cmd_estimate, cmd_montecarlo, cmd_qq, cmd_simulate, cmd_variance};
pub use config::{
    parse_config, read_config_file, validate, AlphaRule, ConfigFile, EstimatorEntry, LambdaRule,
    QuadratureName, RunConfig, SchemeName,
};

use crate::error::{Error, Result};
use crate::stats::Execution;
use clap::{Parser, Subcommand, ValueEnum};
use std::io::Write;
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(
    name = "sdwave",
    version,
    about = "Simulate a strongly damped stochastic wave equation and estimate its parameters"
)]
pub struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true, conflicts_with = "preset")]
    pub config: Option<PathBuf>,

    /// Built-in configuration instead of a file.
    #[arg(long, global = true, value_enum)]
    pub preset: Option<Preset>,

    /// Overrides `seed` from the configuration.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Overrides `out_dir` from the configuration.
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,

    /// Print the resolved configuration as TOML and exit.
    #[arg(long)]
    pub dump_config: bool,

    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    /// Ten modes, a = 1, b = 0.2, T = 1000, dt = 1e-4, six coordinate estimators.
    Paper,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write one trajectory to trajectory.csv.
    Simulate,
    /// Run one trajectory and write each estimator's time series.
    Estimate,
    /// Print the theoretical limiting variance of each estimator.
    Variance,
    /// Run replications and write report.csv, samples.csv and Q-Q data.
    Montecarlo {
        /// Run replications on one thread.
        #[arg(long)]
        sequential: bool,
    },
    /// Regenerate Q-Q data from an existing samples.csv.
    Qq,
}

/// Process exit code for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config { .. } => 3,
        Error::IntegrationDiverged { .. } => 4,
        Error::Io(_) => 5,
        _ => 1,
    }
}

fn load(cli: &Cli) -> Result<ConfigFile> {
    let mut file = match (&cli.config, cli.preset) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Io(format!("cannot read {}: {e}", path.display())))?;
            read_config_file(&text)?
        }
        (None, Some(Preset::Paper)) => ConfigFile::reference_preset(),
        (None, None) => {
            return Err(Error::config(
                "<cli>",
                "give --config <FILE> or --preset paper",
            ));
        }
    };
    if let Some(seed) = cli.seed {
        file.seed = seed;
    }
    if let Some(dir) = &cli.out_dir {
        file.out_dir = dir.clone();
    }
    Ok(file)
}

/// Executes the parsed command line.
pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<()> {
    let file = load(cli)?;
    if cli.dump_config {
        write!(out, "{}", file.to_toml()?)?;
        return Ok(());
    }
    let rc = validate(file)?;
    match &cli.command {
        None => Err(Error::config("<cli>", "no subcommand given; see --help")),
        Some(Command::Simulate) => cmd_simulate(&rc, out).map(drop),
        Some(Command::Estimate) => cmd_estimate(&rc, out).map(drop),
        Some(Command::Variance) => cmd_variance(&rc, out).map(drop),
        Some(Command::Montecarlo { sequential }) => {
            let exec = if *sequential {
                Execution::Sequential
            } else {
                Execution::default()
            };
            cmd_montecarlo(&rc, exec, out).map(drop)
        }
        Some(Command::Qq) => cmd_qq(&rc, out).map(drop),
    }
}
