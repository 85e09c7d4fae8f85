//! `redundancy`: sweeps, optimal-strategy reports, figure data and
//! conjecture probes for coded distributed jobs.
//!
//! Exit codes: 0 success, 2 usage error, 3 method unavailable.

mod args;
mod figure;
mod output;
mod probe;
mod sweep;

use std::process::ExitCode;

use clap::Parser;
use redundancy_core::birthday::{birthday_asymptotic, birthday_expectation};

use args::{BirthdayArgs, Cli, Command};
use output::g17;

pub const EXIT_USAGE: u8 = 2;
pub const EXIT_METHOD_UNAVAILABLE: u8 = 3;
const EXIT_IO: u8 = 1;

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl From<redundancy_core::Error> for CliError {
    fn from(e: redundancy_core::Error) -> Self {
        let code = if e.is_method_unavailable() {
            EXIT_METHOD_UNAVAILABLE
        } else {
            EXIT_USAGE
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError {
            code: EXIT_IO,
            message: e.to_string(),
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError {
            code: EXIT_IO,
            message: e.to_string(),
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError {
            code: EXIT_IO,
            message: e.to_string(),
        }
    }
}

fn run_birthday(args: &BirthdayArgs) -> Result<(), CliError> {
    let exact = birthday_expectation(args.n, args.d)?;
    println!("E({}, {}) = {}", args.n, args.d, g17(exact));
    if args.asymptotic {
        let approx = birthday_asymptotic(args.n, args.d);
        println!("asymptotic = {}", g17(approx));
        println!("ratio exact/asymptotic = {}", g17(exact / approx));
    }
    Ok(())
}

/// `REDUNDANCY_THREADS` caps the worker pool. Results do not depend on it.
fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("REDUNDANCY_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| CliError::usage(format!("REDUNDANCY_THREADS must be a positive integer, got '{raw}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::usage(e.to_string()))
}

fn run(cli: &Cli) -> Result<(), CliError> {
    configure_threads()?;
    match &cli.command {
        Command::Sweep(a) => sweep::run_sweep(a),
        Command::Optimal(a) => sweep::run_optimal(a),
        Command::Figure(a) => figure::run_figure(a),
        Command::Probe(a) => probe::run_probe(a),
        Command::Birthday(a) => run_birthday(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
