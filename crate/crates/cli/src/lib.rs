//! Command-line front end for `prabhakar-core`.
//!
//! Exit codes: 0 success, 2 usage error, 3 numerical failure, 4 an
//! acceptance criterion failed in `reproduce`. Failures also print a JSON
//! diagnostic on stderr.

pub mod args;
pub mod commands;
pub mod error;

use std::io::Write;
use std::path::Path;

pub use args::{parse_args, Format, Param, ParseOutcome, RunConfig};
pub use commands::{registry, Command};
pub use error::CliError;

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn execute(cfg: &RunConfig, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), CliError> {
    let command = commands::find(cfg.subcommand).expect("subcommand was validated");
    let artifacts = command.run(cfg)?;
    let primary = match cfg.format {
        Format::Json => artifacts.json.as_deref(),
        Format::Csv => artifacts.csv.as_deref(),
    };
    if let Some(text) = primary {
        match &cfg.output_path {
            Some(path) => write_file(path, text)?,
            None => stdout.write_all(text.as_bytes())?,
        }
    }
    let (json_out, csv_out) = commands::extra_outputs(cfg);
    if let (Some(path), Some(text)) = (json_out, artifacts.json.as_deref()) {
        write_file(&path, text)?;
    }
    if let (Some(path), Some(text)) = (csv_out, artifacts.csv.as_deref()) {
        write_file(&path, text)?;
    }
    for line in &artifacts.log {
        writeln!(stderr, "{line}")?;
    }
    match artifacts.status {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

/// Runs a parsed config; returns the process exit code.
pub fn run(cfg: &RunConfig, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    match execute(cfg, stdout, stderr) {
        Ok(()) => 0,
        Err(e) => report(&e, stderr),
    }
}

fn report(e: &CliError, stderr: &mut dyn Write) -> i32 {
    let _ = writeln!(stderr, "{}", e.diagnostic());
    e.exit_code()
}

/// Parses and runs `argv` (without the program name).
pub fn main_with_args<S: AsRef<str>>(argv: &[S], stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    match parse_args(argv) {
        Ok(cfg) => run(&cfg, stdout, stderr),
        Err(ParseOutcome::Info(text)) => {
            let _ = stdout.write_all(text.as_bytes());
            0
        }
        Err(ParseOutcome::Error(e)) => report(&e, stderr),
    }
}
