//! `qrel`: divergences, channels and jump verification from the command line.
//!
//! Exit codes: 0 when every check passes, 1 when a check fails, 2 on bad
//! input or configuration.

mod commands;
mod config;
mod output;
mod svg;

use std::process::ExitCode;

use clap::Parser;

use crate::config::Cli;

/// Outcome of a command that ran to completion.
pub enum Status {
    Pass,
    Fail,
}

/// Errors that end a run with exit code 2.
#[derive(Debug)]
pub struct InputError(pub String);

impl<E: std::fmt::Display> From<E> for InputError {
    fn from(e: E) -> Self {
        Self(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(cli) {
        Ok(Status::Pass) => ExitCode::SUCCESS,
        Ok(Status::Fail) => ExitCode::from(1),
        Err(InputError(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
