mod args;
mod commands;
mod load;
mod output;

use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use mflab_core::report::Status;
use mflab_core::MflabError;

use args::Cli;
use output::{emit_error, emit_report};

/// Failures that end a run before a report exists.
#[derive(Debug)]
pub enum CliError {
    /// Unreadable or malformed input files and bad arguments.
    Input(String),
    Engine(MflabError),
}

impl From<MflabError> for CliError {
    fn from(e: MflabError) -> Self {
        CliError::Engine(e)
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "{m}"),
            CliError::Engine(e) => write!(f, "{e}"),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

pub fn exit_code_for_status(s: Status) -> u8 {
    match s {
        Status::Pass => 0,
        Status::Fail => 1,
        Status::Inconclusive => 2,
    }
}

pub fn exit_code_for_error(e: &CliError) -> u8 {
    match e {
        CliError::Input(_) => 3,
        CliError::Engine(e) => match e {
            MflabError::Failed(_) | MflabError::NotAFactorization { .. } => 1,
            MflabError::Inconclusive(_)
            | MflabError::NotStabilized { .. }
            | MflabError::PrecisionTooLow { .. }
            | MflabError::WindowExceeded { .. }
            | MflabError::InfiniteLength(_)
            | MflabError::Cancelled => 2,
            _ => 3,
        },
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let config = match cli.config() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(3);
        }
    };
    if let Some(j) = config.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(j.max(1)).build_global() {
            eprintln!("error: cannot size the worker pool: {e}");
            return ExitCode::from(3);
        }
    }
    let start = Instant::now();
    let result = commands::dispatch(&cli.command, &config);
    if config.verbosity > 0 {
        eprintln!("{}: {:.2} s", cli.command.name(), start.elapsed().as_secs_f64());
    }
    let code = match result {
        Ok(report) => {
            let code = exit_code_for_status(report.status);
            if let Err(e) = emit_report(&report, &config) {
                eprintln!("error: {e}");
                return ExitCode::from(3);
            }
            code
        }
        Err(e) => {
            eprintln!("error: {e}");
            emit_error(&e, &cli.command.name(), &config);
            exit_code_for_error(&e)
        }
    };
    ExitCode::from(code)
}
