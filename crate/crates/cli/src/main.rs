mod args;
mod commands;
mod svg;

use std::process::ExitCode;

use clap::{CommandFactory, FromArgMatches};

use crate::args::{Cli, Command};

/// Failure classes, mapped to exit codes 1 (usage), 2 (data) and 3 (internal).
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
    Internal(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Internal(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Data(m) | CliError::Internal(m) => m,
        }
    }
}

impl From<sng::SngError> for CliError {
    fn from(e: sng::SngError) -> Self {
        use sng::SngError::*;
        let msg = e.to_string();
        match e {
            InvalidArgument(_) => CliError::Usage(msg),
            InvalidState(_) => CliError::Internal(msg),
            Data(_) | Io { .. } | Csv(_) | Json(_) => CliError::Data(msg),
        }
    }
}

fn main() -> ExitCode {
    let matches = match Cli::command().try_get_matches() {
        Ok(m) => m,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    let sub = matches
        .subcommand()
        .map(|(_, m)| m)
        .expect("subcommand is required");

    let result = match cli.command {
        Command::Train(a) => commands::train(a, sub),
        Command::Generate(a) => commands::generate(a, sub),
        Command::Evaluate(a) => commands::evaluate(a, sub),
        Command::DemoTopology(a) => commands::demo_topology(a, sub),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message().replace('\n', " "));
            ExitCode::from(e.exit_code())
        }
    }
}
