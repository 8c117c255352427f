//! Command-line pipeline around the `dirflow` library: synthetic data,
//! priors, training, sampling with optional rerouting, evaluation and the
//! Bayes-oracle study.

pub mod commands;
pub mod config;
pub mod error;
pub mod manifest;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use config::RunConfig;
pub use error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "dirflow", version, about = "Dirichlet flow matching with family priors")]
pub struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Root seed; overrides the file.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// `section.key=value`, parsed as a TOML value. Repeatable.
    #[arg(long = "override", global = true, value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, Subcommand)]
pub enum Command {
    /// Synthesize, clean and split families; write FASTA and root posteriors.
    MakeSynth,
    /// Map root posteriors to Dirichlet priors with gap rates.
    BuildPrior,
    /// Train the denoiser.
    Train,
    /// Generate sequences.
    Sample,
    /// Score generated sequences and a matched held-out set.
    Eval,
    /// Bayes-oracle accuracy curves.
    OracleStudy,
    /// make-synth, build-prior, train, sample and eval in order.
    Pipeline,
    /// Print the resolved configuration.
    ShowConfig,
}

pub fn run(cli: &Cli) -> CliResult<()> {
    let config = RunConfig::load(cli.config.as_deref(), &cli.overrides, cli.seed)?;
    run_command(cli.command, &config)
}

pub fn run_command(command: Command, config: &RunConfig) -> CliResult<()> {
    match command {
        Command::MakeSynth => commands::cmd_make_synth(config),
        Command::BuildPrior => commands::cmd_build_prior(config),
        Command::Train => commands::cmd_train(config),
        Command::Sample => commands::cmd_sample(config),
        Command::Eval => commands::cmd_eval(config),
        Command::OracleStudy => commands::cmd_oracle_study(config),
        Command::Pipeline => commands::cmd_pipeline(config),
        Command::ShowConfig => {
            print!("{}", config.to_toml());
            Ok(())
        }
    }
}
