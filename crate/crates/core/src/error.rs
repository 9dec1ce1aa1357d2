use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Arguments violate an operation's preconditions (dimension mismatch,
    /// out-of-range index, bad configuration value).
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The input is well formed but carries no usable information, e.g. a
    /// blank image or a histogram with a single occupied bin.
    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("cannot read {}: {message}", path.display())]
    Input { path: PathBuf, message: String },

    #[error("cannot write {}: {message}", path.display())]
    Output { path: PathBuf, message: String },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn degenerate(msg: impl Into<String>) -> Self {
        Error::Degenerate(msg.into())
    }

    pub(crate) fn input(path: impl Into<PathBuf>, message: impl ToString) -> Self {
        Error::Input {
            path: path.into(),
            message: message.to_string(),
        }
    }

    pub(crate) fn output(path: impl Into<PathBuf>, message: impl ToString) -> Self {
        Error::Output {
            path: path.into(),
            message: message.to_string(),
        }
    }
}
