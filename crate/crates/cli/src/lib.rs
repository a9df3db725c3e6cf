//! Command-line front end: argument parsing, command dispatch and output.

pub mod args;
pub mod output;
pub mod run;

use std::path::PathBuf;

use thiserror::Error;

pub use args::{parse_args, Command, Format, GridSpec, RunConfig};
pub use output::{render, Report};

#[derive(Debug, Error)]
pub enum CliError {
    /// Help or version text requested.
    #[error("{0}")]
    Help(String),
    #[error("{0}")]
    Usage(String),
    #[error("file not found: {}", .0.display())]
    FileNotFound(PathBuf),
    #[error("{0}")]
    Analysis(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Help(_) => 0,
            CliError::Usage(_) => 2,
            CliError::FileNotFound(_) => 3,
            CliError::Analysis(_) => 1,
        }
    }
}

/// Runs `cfg` and writes its output; returns the process exit code.
pub fn execute(cfg: &RunConfig) -> Result<i32, CliError> {
    let outcome = run::run(cfg)?;
    let text = render(cfg, &outcome.report);
    match &cfg.out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::Analysis(format!("{}: {e}", path.display())))?,
        None => print!("{text}"),
    }
    Ok(if outcome.success { 0 } else { 1 })
}

/// Full command line to exit code, reporting errors on stderr.
pub fn main_with_args<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let result = parse_args(argv).and_then(|cfg| execute(&cfg));
    match result {
        Ok(code) => code,
        Err(CliError::Help(text)) => {
            print!("{text}");
            0
        }
        Err(e) => {
            match &e {
                CliError::Usage(msg) => eprint!("{}", if msg.ends_with('\n') { msg.clone() } else { format!("error: {msg}\n") }),
                other => eprintln!("error: {other}"),
            }
            e.exit_code()
        }
    }
}
