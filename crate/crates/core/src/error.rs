use std::path::PathBuf;

use thiserror::Error;

use crate::numerics::NumericsError;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error("format error at line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("alignment error: {0}")]
    Alignment(String),
    #[error("coverage error: {0}")]
    Coverage(String),
    #[error("no values for week {week} at location ({lat}, {lon})")]
    EmptyClimatology { week: u32, lat: f64, lon: f64 },
    #[error("unknown {kind}: {name}")]
    Lookup { kind: &'static str, name: String },
    #[error("category {id} out of vocabulary of size {size} for {input}")]
    Vocabulary { input: String, id: usize, size: usize },
    #[error("undefined metric: {0}")]
    UndefinedMetric(String),
    #[error("non-finite loss {value} in epoch {epoch}, batch {batch}")]
    NonFiniteLoss { epoch: usize, batch: usize, value: f64 },
    #[error("search failed: all {0} trials aborted")]
    SearchFailed(usize),
    #[error("invalid configuration `{field}`: {message}")]
    Config { field: String, message: String },
    #[error("checkpoint error: {0}")]
    Checkpoint(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self::Config { field: field.into(), message: message.into() }
    }

    pub fn format(line: usize, message: impl Into<String>) -> Self {
        Self::Format { line, message: message.into() }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io { path: path.into(), source }
    }
}
