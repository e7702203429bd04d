//! Configuration, output formats and the `triad-lab` command line.

pub mod config;
pub mod output;
pub mod run;

use std::path::PathBuf;

use clap::Parser;

use crate::triad::FormulaVariant;
use config::{parse_config, Command, ConfigError};
use output::OutputPrefix;

/// Exit status when a command cannot run at all.
pub const EXIT_ERROR: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "triad-lab", version, about = "Resonant triad closed forms, oracles and simulations")]
pub struct Cli {
    /// Experiment to run.
    #[arg(value_enum)]
    pub command: Command,
    /// Flat TOML configuration file.
    #[arg(long)]
    pub config: PathBuf,
    /// Output path prefix; defaults to the command name.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Overrides the `variant` key of the configuration.
    #[arg(long, value_parser = parse_variant)]
    pub variant: Option<FormulaVariant>,
}

fn parse_variant(s: &str) -> Result<FormulaVariant, String> {
    s.parse()
}

/// Runs one invocation and returns the process exit status.
pub fn execute(cli: &Cli) -> i32 {
    let prefix = OutputPrefix::new(
        cli.out
            .clone()
            .unwrap_or_else(|| PathBuf::from(cli.command.as_str())),
    );
    let fail = |message: String| {
        eprintln!("error: {message}");
        run::write_error(cli.command, &prefix, &message);
        EXIT_ERROR
    };
    let text = match std::fs::read_to_string(&cli.config) {
        Ok(text) => text,
        Err(e) => return fail(format!("cannot read {}: {e}", cli.config.display())),
    };
    let config = match with_override(&text, cli) {
        Ok(config) => config,
        Err(e) => return fail(e.to_string()),
    };
    match run::run(&config, &prefix) {
        Ok(outcome) => outcome.exit_code(),
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}

fn with_override(text: &str, cli: &Cli) -> Result<config::RunConfig, ConfigError> {
    let mut config = parse_config(text, cli.command)?;
    if let Some(variant) = cli.variant {
        config.settings.variant = Some(variant);
    }
    Ok(config)
}
