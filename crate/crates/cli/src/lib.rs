//! The `cpcsc` command line: sparse coding, denoising, dictionary training
//! and image comparison on PGM files.
//!
//! Exit codes: 0 success, 2 bad arguments, 3 unreadable or malformed files,
//! 4 numerical failure (divergence or a degenerate operator).

mod args;
mod commands;
mod config;

use std::ffi::OsString;
use std::fmt;
use std::io::Write;

use clap::Parser;

pub use args::Cli;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_NUMERIC: i32 = 4;

/// A failed command, classified by exit code.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io(String),
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Io(_) => EXIT_IO,
            CliError::Numeric(_) => EXIT_NUMERIC,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Io(m) | CliError::Numeric(m) => f.write_str(m),
        }
    }
}

impl From<cpcsc::Error> for CliError {
    fn from(e: cpcsc::Error) -> Self {
        let msg = e.to_string();
        match e.root() {
            cpcsc::Error::InvalidArgument(_) => CliError::Usage(msg),
            cpcsc::Error::DegenerateOperator { .. } | cpcsc::Error::Divergence { .. } => CliError::Numeric(msg),
            _ => CliError::Io(msg),
        }
    }
}

/// Runs one invocation with the process's standard streams.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(argv, &mut stdout.lock(), &mut stderr.lock())
}

/// Runs one invocation, writing results to `out` and diagnostics to `err`.
/// `argv[0]` is the program name.
pub fn run_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    match commands::execute(cli, out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
