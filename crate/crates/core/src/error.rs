use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("eigensolver did not converge ({context})")]
    NoConvergence { context: String },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("horizon too short: {0}")]
    HorizonTooShort(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by bad user input rather than numerics or i/o.
    pub fn is_invalid_spec(&self) -> bool {
        matches!(self, Error::InvalidParameter(_) | Error::InvalidInput(_))
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    /// Attach a description of the parameter point to solver failures.
    pub(crate) fn at(self, point: impl std::fmt::Display) -> Self {
        match self {
            Error::NoConvergence { context } => Error::NoConvergence {
                context: format!("{context} at {point}"),
            },
            Error::Numerical(msg) => Error::Numerical(format!("{msg} at {point}")),
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
