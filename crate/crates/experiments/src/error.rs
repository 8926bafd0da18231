use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("could not parse {path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error(transparent)]
    Core(#[from] spinchain_core::Error),
}

impl ExperimentError {
    /// Short machine-readable tag used in CLI error lines.
    pub fn kind(&self) -> &'static str {
        match self {
            Self::Config(_) => "config",
            Self::Parse { .. } => "parse",
            Self::Io { .. } => "io",
            Self::Domain(_) => "domain",
            Self::Core(_) => "core",
        }
    }
}

pub type Result<T> = std::result::Result<T, ExperimentError>;
