//! Command-line front end for the `mvoac` experiments.
//!
//! Every subcommand reads a flat TOML table (`--config`), applies `--set`
//! overrides, validates the result into an [`ExperimentSpec`] and writes one
//! CSV table.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::fs;
use std::path::PathBuf;

pub use config::{Command, ExperimentSpec, Params};
pub use error::{CliError, CliResult};

/// Flags shared by all subcommands.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct CommonArgs {
    /// TOML file with `key = value` parameters
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Master seed (default 0)
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output CSV path (default stdout)
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Override one parameter; repeatable
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    /// Print the resolved configuration as TOML and exit
    #[arg(long)]
    pub print_config: bool,
}

/// Merges config file, overrides and flags into a validated spec.
pub fn resolve(command: Command, args: &CommonArgs) -> CliResult<ExperimentSpec> {
    let mut params = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|source| CliError::Io {
                path: path.display().to_string(),
                source,
            })?;
            Params::parse(&path.display().to_string(), &text)?
        }
        None => Params::default(),
    };
    for o in &args.overrides {
        params.apply_override(o)?;
    }
    if let Some(seed) = args.seed {
        params.set("seed", toml::Value::Integer(seed as i64));
    }
    if let Some(out) = &args.out {
        params.set("out", toml::Value::String(out.display().to_string()));
    }
    ExperimentSpec::from_params(command, params)
}

/// Runs one subcommand end to end.
pub fn execute(command: Command, args: &CommonArgs) -> CliResult<()> {
    let spec = resolve(command, args)?;
    if args.print_config {
        print!("{}", spec.to_toml_string());
        return Ok(());
    }
    commands::run(&spec)?.emit(spec.out.as_deref())
}
