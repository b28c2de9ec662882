//! Command-line companion to the core training library: argument
//! parsing, CSV/JSON/SVG artifacts, and the `dln` binary's subcommand
//! implementations.
//!
//! The split of responsibilities:
//!
//! * [`config`] — every subcommand's flags as one serializable
//!   [`config::RunConfig`], hashed into artifact filenames and replayable
//!   via `--config`,
//! * [`commands`] — the subcommand implementations and their artifacts,
//! * [`files`] — CSV ingestion/serialization with bit-exact floats,
//! * [`plot`] — deterministic, dependency-free SVG charts,
//! * [`error`] — the error type whose variants carry the process exit
//!   code (1 for plumbing problems, 2 for a failed theory verdict).

pub mod commands;
pub mod config;
pub mod error;
pub mod files;
pub mod plot;

pub use config::{Cli, RunConfig};
pub use error::{CliError, Result};
