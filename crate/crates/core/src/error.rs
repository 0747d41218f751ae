use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("dimension mismatch: expected {expected}, got {actual} ({what})")]
    Dimension {
        what: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("bad magic bytes: expected {expected:?}, found {found:?}")]
    Magic { expected: [u8; 4], found: [u8; 4] },

    #[error("unsupported format version {0}")]
    Version(u16),

    #[error("truncated payload: {0}")]
    Truncated(String),

    #[error("malformed file: {0}")]
    Format(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Iterative method stopped without meeting its tolerance.
    #[error("{method} did not converge after {iterations} iterations (last estimate {last_estimate:e})")]
    NoConvergence {
        method: &'static str,
        iterations: usize,
        last_estimate: f64,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error("{module}: {source}")]
    Context {
        module: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Wraps an error with the name of the pipeline stage that produced it.
    pub fn within(self, module: &'static str) -> Self {
        Error::Context {
            module,
            source: Box::new(self),
        }
    }
}

pub(crate) fn check_dim(what: &'static str, expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(Error::Dimension {
            what,
            expected,
            actual,
        });
    }
    Ok(())
}
