//! Command-line front end for `tailquant`.
//!
//! Every command writes one CSV whose first line is
//! `# tailquant v<version> spec=<canonical spec>`, followed by a header row
//! and one row per grid point in grid order. Numbers are written with 17
//! significant digits; a failed field is left empty and the reason goes to
//! the `error` column.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod args;
pub mod report;
pub mod spec;

use std::fs;
use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use thiserror::Error;

pub use args::Cli;
pub use spec::{Command, GridSpec, RunSpec};

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "TAILQUANT_THREADS";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error(transparent)]
    Core(#[from] tailquant::Error),
    #[error("cannot write output: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    /// 3 for reference failures and runs with too many failed rows, 2 otherwise.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.is_oracle_failure() => 3,
            CliError::Core(tailquant::Error::TooManyFailures { .. }) => 3,
            _ => 2,
        }
    }
}

/// CSV bytes of a completed run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub csv: Vec<u8>,
    pub rows: usize,
    pub failed_rows: usize,
}

/// Executes a validated spec and returns the CSV without writing it.
pub fn run(spec: &RunSpec) -> Result<RunOutput, CliError> {
    report::render(spec)
}

/// Runs `spec` and writes the CSV to its output path, or stdout.
pub fn run_to_output(spec: &RunSpec) -> Result<RunOutput, CliError> {
    let out = run(spec)?;
    match &spec.output_path {
        Some(path) => fs::write(path, &out.csv)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(&out.csv)?;
            stdout.flush()?;
        }
    }
    if out.failed_rows > 0 {
        log::warn!("{} of {} rows failed", out.failed_rows, out.rows);
    }
    log::info!("{} rows written", out.rows);
    Ok(out)
}

/// Reads `TAILQUANT_THREADS`; `None` when unset.
pub fn thread_limit() -> Result<Option<usize>, CliError> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Some(n)),
            _ => Err(CliError::Validation(format!("{THREADS_ENV} = '{s}' must be an integer >= 1"))),
        },
    }
}

fn execute(cli: Cli) -> Result<RunOutput, CliError> {
    let spec = RunSpec::from_cli(cli)?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_limit()? {
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| CliError::Validation(format!("thread pool: {e}")))?;
    pool.install(|| run_to_output(&spec))
}

/// Entry point shared by the binary: parse, run, map errors to exit codes.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match execute(cli) {
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
