//! Batch front end: reads an experiment config, runs one pipeline from
//! `degenlab-core`, and writes CSV/JSON reports, SVG plots and a checksum
//! manifest.

pub mod config;
pub mod error;
pub mod experiments;
pub mod manifest;
pub mod plot;
pub mod selftest;

pub use config::{ConfigError, Experiment, ExperimentConfig, LoadedConfig};
pub use error::{exit, CliError};
pub use experiments::{run_experiment, RunOptions, RunReport};
pub use manifest::{Manifest, OutputDir};

/// Environment variable holding the worker thread count.
pub const THREADS_ENV: &str = "DEGENLAB_THREADS";

/// Loads the config at `path`, or the built-in one for `subcommand`, and
/// checks that it selects that experiment.
pub fn load_for(subcommand: &str, path: Option<&std::path::Path>) -> Result<LoadedConfig, CliError> {
    let cfg = match path {
        Some(p) => LoadedConfig::from_path(p)?,
        None => LoadedConfig::builtin(subcommand)?,
    };
    let chosen = cfg.experiment.name();
    if chosen != subcommand {
        return Err(CliError::Config(cfg.key_error(
            &format!("experiment.{chosen}"),
            "",
            format!("config selects `{chosen}` but the `{subcommand}` subcommand was run"),
        )));
    }
    Ok(cfg)
}
