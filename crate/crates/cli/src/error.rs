use std::path::PathBuf;

use degenlab_core::Error as CoreError;

use crate::config::ConfigError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),

    #[error("resonance: {0}")]
    Resonance(CoreError),

    #[error("solver failure: {0}")]
    Solver(CoreError),

    #[error("{0}")]
    Core(CoreError),

    #[error("cannot write {}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },

    #[error("plot: {0}")]
    Plot(String),

    #[error("selftest: {failed} check(s) failed")]
    Selftest { failed: usize },
}

pub mod exit {
    pub const OK: i32 = 0;
    pub const OTHER: i32 = 1;
    pub const CONFIG: i32 = 2;
    pub const RESONANCE: i32 = 3;
    pub const SOLVER: i32 = 4;
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => exit::CONFIG,
            CliError::Resonance(_) => exit::RESONANCE,
            CliError::Solver(_) => exit::SOLVER,
            _ => exit::OTHER,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }
}

/// Sorts a core error into the exit-code classes. Parameter-like errors are
/// blamed on `section` of the config.
pub fn classify(e: CoreError, cfg: &crate::config::LoadedConfig, section: &str) -> CliError {
    match e {
        CoreError::DegenerateProfile { x } => CliError::Config(cfg.key_error(
            "profile",
            "alpha",
            format!(
                "alpha vanishes at x = {x}; the profile violates the nonvanishing hypothesis (alpha must not vanish on [-1, 1])"
            ),
        )),
        CoreError::Parameter { name, reason } => CliError::Config(cfg.key_error(section, name, reason)),
        CoreError::Resolution(msg) => CliError::Config(cfg.key_error(section, "", msg)),
        e @ (CoreError::ResonantExponent { .. } | CoreError::ResonantFrequency { .. }) => CliError::Resonance(e),
        e @ (CoreError::SolverStagnation { .. }
        | CoreError::EigenNonConvergence(_)
        | CoreError::Overflow { .. }
        | CoreError::NotAnEigenvalue { .. }
        | CoreError::EmptySpectrum
        | CoreError::Truncation { .. }) => CliError::Solver(e),
        e => CliError::Core(e),
    }
}
