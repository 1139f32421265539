use thiserror::Error;

/// Errors surfaced by the library. The CLI maps each variant onto an exit code.
#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A request whose size exceeds a hard cap (index set, enumeration, table).
    #[error("{what}: size {size} exceeds cap {cap}")]
    Capacity { what: String, size: u128, cap: u128 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("inconsistent solution: {0}")]
    InconsistentSolution(String),

    #[error("cannot condition on null event: P(x_{pivot} = {value}) = {probability:e}")]
    NullEvent {
        pivot: usize,
        value: u8,
        probability: f64,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error("config: {0}")]
    Config(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }

    pub(crate) fn invalid(message: impl Into<String>) -> Self {
        Error::InvalidInstance(message.into())
    }

    pub(crate) fn arg(message: impl Into<String>) -> Self {
        Error::InvalidArgument(message.into())
    }
}
