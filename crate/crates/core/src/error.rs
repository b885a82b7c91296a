use std::path::PathBuf;

use thiserror::Error;

/// Errors surfaced by the evaluation library.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid configuration: bad parameter values, mismatched vocabularies,
    /// unresolvable paths. Maps to CLI exit code 1.
    #[error("config error: {0}")]
    Config(String),

    /// Corpus ingestion failed (empty source, reserved-token collision).
    #[error("ingestion error: {0}")]
    Ingest(String),

    /// A token is not present in the vocabulary.
    #[error("out-of-vocabulary token `{0}`")]
    Oov(String),

    /// A token id is outside `[0, N)` for the attached vocabulary.
    #[error("token id {id} out of range for vocabulary of size {size}")]
    IdRange { id: u32, size: usize },

    /// A line of an input file could not be parsed. Line numbers are 1-based.
    #[error("parse error at {path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    /// A binary model/parameter file has an invalid layout.
    #[error("format error in {path}: {message}")]
    Format { path: PathBuf, message: String },

    /// Model training could not proceed (empty or degenerate input).
    #[error("training error: {0}")]
    Training(String),

    /// A metric is undefined for the given input.
    #[error("metric error: {0}")]
    Metric(String),

    /// An external log-prob file does not line up with the test corpus.
    #[error("alignment error: {0}")]
    Alignment(String),

    /// An external log-prob file contains invalid values.
    #[error("validity error: {0}")]
    Validity(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// CLI exit code: 1 for validation problems, 2 for runtime failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 1,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
