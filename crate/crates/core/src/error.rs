//! Error type shared by all fallible operations in this crate.

use alloc::string::String;
use core::fmt;

/// Convenience alias used throughout the crate.
pub type Result<T> = core::result::Result<T, Error>;

/// Failure modes of the numerical and model-construction routines.
///
/// `Contract` marks violated preconditions (bad shapes, invalid
/// configuration); `Numerical` marks routines that ran but could not
/// produce a trustworthy answer (e.g. an iteration that failed to
/// converge, or an input outside the numerical domain of the algorithm).
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A documented precondition of the called operation was violated.
    Contract(String),
    /// A numerical routine failed to reach its accuracy target.
    Numerical(String),
}

impl Error {
    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub(crate) fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }

    /// True when the error reports a violated precondition.
    pub fn is_contract(&self) -> bool {
        matches!(self, Error::Contract(_))
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Contract(msg) => write!(f, "contract violation: {msg}"),
            Error::Numerical(msg) => write!(f, "numerical failure: {msg}"),
        }
    }
}

impl core::error::Error for Error {}
