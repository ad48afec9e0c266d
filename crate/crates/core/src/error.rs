use std::path::PathBuf;

use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("non-finite value {value} at coordinate {coordinate}")]
    Numeric { coordinate: usize, value: f64 },

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for this error class.
    ///
    /// `2` usage/config, `3` numeric failure, `4` I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Dimension { .. } | Error::Unsupported(_) => 2,
            Error::Numeric { .. } => 3,
            Error::Io { .. } => 4,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Returns the first non-finite entry of `values` as a numeric error.
pub(crate) fn check_finite(values: &[f64]) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(coordinate) => Err(Error::Numeric {
            coordinate,
            value: values[coordinate],
        }),
        None => Ok(()),
    }
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::Dimension { expected, found })
    }
}
