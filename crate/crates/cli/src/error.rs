//! Error type shared by the command implementations, carrying the
//! process exit code: 1 for anything that prevented a clean run (usage,
//! ingestion, contract violations, I/O), 2 for a verdict failure — the
//! run completed but a check that should hold did not.

use std::fmt;

/// What went wrong, from the exit-code point of view.
#[derive(Debug)]
pub enum CliError {
    /// Bad invocation: unknown flags, missing or conflicting arguments.
    Usage(String),
    /// Input files that do not parse or contradict their declared shape.
    Ingest(String),
    /// A library precondition was violated (bad dimensions, invalid
    /// parameters, numerically impossible requests).
    Contract(String),
    /// Reading or writing artifacts failed.
    Io(String),
    /// The run finished, but a property that should provably hold was
    /// violated.
    Verdict(String),
}

impl CliError {
    /// Process exit code for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Verdict(_) => 2,
            _ => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "usage: {msg}"),
            CliError::Ingest(msg) => write!(f, "ingest: {msg}"),
            CliError::Contract(msg) => write!(f, "contract: {msg}"),
            CliError::Io(msg) => write!(f, "io: {msg}"),
            CliError::Verdict(msg) => write!(f, "verdict failure: {msg}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<dln_core::Error> for CliError {
    fn from(e: dln_core::Error) -> Self {
        CliError::Contract(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Ingest(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Ingest(e.to_string())
    }
}

/// Result alias for command implementations.
pub type Result<T> = std::result::Result<T, CliError>;
