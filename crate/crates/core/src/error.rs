use std::path::PathBuf;

/// Errors produced by the bandit library and the experiment harness.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// An operation was called before its preconditions were established,
    /// e.g. K-armed bounds requested before every arm was pulled once.
    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("numerical failure: {0}")]
    Numeric(String),

    #[error("configuration error in `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("aggregation error: {0}")]
    Aggregation(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A simulation failed; `cell` identifies the grid coordinates.
    #[error("{cell}: {source}")]
    Run {
        cell: String,
        #[source]
        source: Box<Error>,
    },

    /// A results file could not be parsed; `row` is the 1-based line.
    #[error("row {row}: {message}")]
    Malformed { row: u64, message: String },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
