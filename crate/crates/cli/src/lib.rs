//! Command-line driver for the `ellvar` toolkit: configuration loading,
//! the five subcommands and their JSON/CSV reports.

pub mod commands;
pub mod config;
pub mod pipeline;
pub mod report;

use std::path::PathBuf;

pub use config::{ConfigError, RunConfig};

/// Failure of a subcommand, carrying its stable exit code.
#[derive(Debug)]
pub enum CliError {
    Io(String),
    Config(ConfigError),
    Hypothesis(String),
    Solver(String),
    Gradcheck(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Config(_) => 2,
            CliError::Hypothesis(_) => 3,
            CliError::Solver(_) => 4,
            CliError::Gradcheck(_) => 5,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Io(m) => write!(f, "io error: {m}"),
            CliError::Config(e) => write!(f, "{e}"),
            CliError::Hypothesis(m) => write!(f, "hypothesis failure: {m}"),
            CliError::Solver(m) => write!(f, "solver failure: {m}"),
            CliError::Gradcheck(m) => write!(f, "gradient check failed: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

/// Core errors raised while solving: hypothesis gates keep exit code 3,
/// everything else is a solver failure.
impl From<ellvar_core::Error> for CliError {
    fn from(e: ellvar_core::Error) -> Self {
        match e {
            ellvar_core::Error::Hypothesis { .. } => CliError::Hypothesis(e.to_string()),
            other => CliError::Solver(other.to_string()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    CheckPhi,
    Thresholds,
    Solve,
    Sweep,
    Gradcheck,
}

/// Everything a subcommand needs besides the config file itself.
#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub force: bool,
    /// Test hook: perturb the analytic gradient before the check.
    pub corrupt_gradient: bool,
}

/// Runs one subcommand; the returned code is the process exit status.
pub fn run(command: Command, config: &std::path::Path, opts: &RunOptions) -> i32 {
    let result = RunConfig::load(config)
        .map_err(CliError::from)
        .and_then(|cfg| commands::dispatch(command, cfg, opts));
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("ellvar: {e}");
            e.exit_code()
        }
    }
}
