use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A query fell outside the table that was built; the caller has to grow it.
    #[error("{value} is out of range for a sieve with limit {limit}")]
    OutOfRange { value: u64, limit: u64 },

    #[error("{n} has no Goldbach partition other than {a}+{b}; session refused")]
    NoAlternativePartition { n: u64, a: u64, b: u64 },

    #[error("authentication failed: {0}")]
    Authentication(String),

    #[error("integrity check failed: {0}")]
    IntegrityFailure(String),

    #[error("malformed frame: {0}")]
    Codec(String),

    /// The remote side answered with an ERROR frame.
    #[error("peer reported error {code}: {message}")]
    Remote { code: u16, message: String },

    #[error("protocol violation: {0}")]
    Protocol(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// True for errors caused by bad caller input rather than a runtime failure.
    pub fn is_usage(&self) -> bool {
        matches!(self, Error::InvalidArgument(_) | Error::OutOfRange { .. })
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::Io(io),
            other => Error::Codec(format!("csv: {other:?}")),
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        if e.is_io() {
            Error::Io(e.into())
        } else {
            Error::Codec(format!("json: {e}"))
        }
    }
}
