use std::process::ExitCode;

use clap::Parser;
use marcskos_cli::{run, Cli, CliError};

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if !matches!(e, CliError::NoMatch(_)) {
                eprintln!("marcskos: {e}");
            }
            ExitCode::from(e.exit_code())
        }
    }
}
