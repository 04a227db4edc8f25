//! Top-level error type and exit-code mapping for the command-line tool.

use thiserror::Error;

use crate::config::ConfigError;
use crate::simulation::SimulationError;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Simulation(#[from] SimulationError),
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("failed properties: {}", .0.join(", "))]
    PropertiesFailed(Vec<String>),
}

impl Error {
    /// 2 for usage and configuration problems, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Usage(_) => 2,
            _ => 1,
        }
    }
}
