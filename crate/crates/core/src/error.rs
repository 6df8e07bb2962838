use thiserror::Error;

/// Errors produced by the library. Each variant maps onto a distinct CLI
/// exit status.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("not a valid state: {reason} (offending eigenvalue {eigenvalue:e})")]
    NotAState { reason: String, eigenvalue: f64 },

    #[error("parse error at {context}: {message}")]
    Parse { context: String, message: String },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("degenerate calibration: r = 1 leaves no interfering pairs")]
    DegenerateCalibration,

    #[error("optimizer did not converge: {message} (best objective {best_value})")]
    OptimizerDiagnostic { message: String, best_value: f64 },

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn parse(context: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            context: context.into(),
            message: message.into(),
        }
    }

    pub(crate) fn invalid(message: impl Into<String>) -> Self {
        Error::InvalidArgument(message.into())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
