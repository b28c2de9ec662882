//! The `dln` binary: parse arguments (or replay a saved configuration),
//! dispatch the subcommand, and map the outcome onto the exit-code
//! convention — 0 on success, 1 for usage/ingestion/contract/IO
//! problems, 2 when a theory check that should have held did not.

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use dln_cli::config::{load_config, Cli};
use dln_cli::error::{CliError, Result};
use dln_cli::commands;

fn run(cli: Cli) -> Result<()> {
    let config = match (cli.config, cli.command) {
        (Some(path), None) => load_config(&path)?,
        (None, Some(command)) => command,
        (Some(_), Some(_)) => {
            return Err(CliError::Usage(
                "give either a subcommand or --config, not both".into(),
            ))
        }
        (None, None) => {
            return Err(CliError::Usage(
                "give a subcommand or --config FILE (see --help)".into(),
            ))
        }
    };
    commands::dispatch(&config)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // --help and --version are successful outcomes; anything else
            // is a usage problem and exits 1 (2 is reserved for failed
            // theory verdicts).
            let requested = matches!(err.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
            let _ = err.print();
            return if requested { ExitCode::SUCCESS } else { ExitCode::from(1) };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("{err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
