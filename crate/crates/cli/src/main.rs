//! `randiter` command-line driver.
//!
//! Exit codes: 0 success, 1 internal failure, 2 usage error, 3 no convergence
//! on a solvable system, 4 I/O or parse failure. Diagnostics go to standard
//! error under `RANDITER_LOG={off,info,debug}`; data only ever goes to files.

mod args;
mod commands;
mod error;
mod meta;

use std::process::ExitCode;

use clap::Parser;

use crate::args::{Cli, Command};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("RANDITER_LOG", "off")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Generate(a) => commands::generate(a),
        Command::Solve(a) => commands::solve(a),
        Command::Compare(a) => commands::compare(a),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
