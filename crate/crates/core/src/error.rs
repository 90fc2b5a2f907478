use thiserror::Error;

/// Errors raised by the library.
///
/// The CLI maps [`Error::InvalidInput`] and [`Error::NotResonant`] to exit
/// code 2 and [`Error::NumericalFailure`] to exit code 3.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("numerical failure: {message}")]
    NumericalFailure {
        message: String,
        /// Determinant estimate of the linear system, when one was involved.
        determinant: Option<f64>,
    },

    #[error("alpha = {alpha} is not resonant (|u'(1)| = {residual:e} exceeds {threshold:e})")]
    NotResonant {
        alpha: f64,
        residual: f64,
        threshold: f64,
    },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn numerical(msg: impl Into<String>) -> Self {
        Error::NumericalFailure {
            message: msg.into(),
            determinant: None,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
