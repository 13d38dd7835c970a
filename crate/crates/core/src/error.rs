use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("integer overflow while {0}")]
    Overflow(&'static str),

    #[error("input too large: {what} = {value} exceeds limit {limit}")]
    TooLarge { what: &'static str, value: u64, limit: u64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("range error: {0}")]
    Range(String),

    #[error("quadrature did not converge: achieved relative error {achieved:e}, requested {requested:e}")]
    Quadrature { achieved: f64, requested: f64 },

    #[error("missing profile data for m = {}", format_list(.0))]
    MissingData(Vec<u64>),

    #[error("allocation of {0} entries failed")]
    Allocation(usize),

    #[error("I/O error on {}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("checksum mismatch in {}", .0.display())]
    Checksum(PathBuf),

    #[error("malformed file {}: {reason}", .path.display())]
    Parse { path: PathBuf, reason: String },
}

fn format_list(ms: &[u64]) -> String {
    ms.iter().map(|m| m.to_string()).collect::<Vec<_>>().join(", ")
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, reason: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            reason: reason.into(),
        }
    }
}
