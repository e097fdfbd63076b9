use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised across the library and the CLI.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of a function.
    #[error("domain error: {0}")]
    Domain(String),

    /// The requested noise level exceeds the range of the companion function.
    #[error("value {value} exceeds the range of the companion function (max {max})")]
    OutOfRange { value: f64, max: f64 },

    #[error("invalid argument: {0}")]
    Argument(String),

    /// A materialization or enumeration limit was reached.
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("numerical failure: {0}")]
    Numeric(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("out of scope: {0}")]
    OutOfScope(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code used by the command line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Capacity(_) | Error::OutOfScope(_) => 3,
            Error::Numeric(_) => 1,
            _ => 2,
        }
    }
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn argument(msg: impl Into<String>) -> Error {
    Error::Argument(msg.into())
}

pub(crate) fn capacity(msg: impl Into<String>) -> Error {
    Error::Capacity(msg.into())
}
