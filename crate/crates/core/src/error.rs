use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("incompatible signals: {0}")]
    Mismatch(String),

    #[error("aliasing: {0}")]
    Aliasing(String),

    #[error("step limit exceeded: {estimated} split steps requested (limit {limit})")]
    StepLimit { estimated: u64, limit: u64 },

    #[error("correlation peak is ambiguous: best {best:.6e} vs runner-up {runner_up:.6e}")]
    AmbiguousTiming { best: f64, runner_up: f64 },

    #[error("no convergence: {0}")]
    Convergence(String),

    #[error("link element {index} ({kind}): {source}")]
    Element {
        index: usize,
        kind: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("config line {line}: {message}")]
    ConfigParse { line: usize, message: String },

    #[error("config field `{path}`: {message}")]
    ConfigField { path: String, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
