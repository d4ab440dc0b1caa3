//! `compass`: code generation, decoding, channels, sweeps and thresholds.
//!
//! Exit status is 0 on success, 1 on usage errors and 2 when a computation
//! fails. Errors go to stderr as one line of JSON `{"code", "message"}`.

mod args;
mod commands;
mod config;
mod output;

use std::ffi::OsString;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use serde::Serialize;

use args::Cli;

#[derive(Debug, Serialize)]
pub struct CliError {
    pub code: &'static str,
    pub message: String,
    #[serde(skip)]
    pub exit: u8,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError {
            code: "usage",
            message: message.into(),
            exit: 1,
        }
    }

    pub fn failed(code: &'static str, message: impl ToString) -> Self {
        CliError {
            code,
            message: message.to_string(),
            exit: 2,
        }
    }
}

fn run(argv: Vec<OsString>) -> Result<(), CliError> {
    let argv = config::merge(argv)?;
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return Ok(());
        }
        Err(e) => return Err(CliError::usage(e.render().to_string().trim())),
    };
    let jobs = match cli.jobs {
        Some(0) => return Err(CliError::usage("--jobs must be at least 1")),
        Some(j) => j,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build_global()
        .map_err(|e| CliError::failed("internal", e))?;
    let ctx = output::Context {
        jobs,
        config_file: cli.config.clone(),
    };
    commands::dispatch(cli.command, &ctx)
}

fn main() -> ExitCode {
    match run(std::env::args_os().collect()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", serde_json::to_string(&e).expect("error serializes"));
            ExitCode::from(e.exit)
        }
    }
}
