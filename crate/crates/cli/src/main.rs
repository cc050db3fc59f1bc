mod commands;
mod config;

use std::fs;
use std::io::Write;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use lorentz_core::LabError;
use thiserror::Error;

use crate::config::{Cli, Command, RunConfig, SEED_ENV};

pub const EXIT_PASS: u8 = 0;
pub const EXIT_FAIL: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_INTERNAL: u8 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error(transparent)]
    Lab(#[from] LabError),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Lab(LabError::Parse(_) | LabError::Domain(_) | LabError::Precondition(_)) => EXIT_USAGE,
            CliError::Lab(_) | CliError::Io(_) => EXIT_INTERNAL,
        }
    }
}

fn run(cli: &Cli) -> Result<commands::Outcome, CliError> {
    let seed_env = std::env::var(SEED_ENV).ok();
    let cfg = RunConfig::from_cli(cli, seed_env.as_deref())?;
    let no_ts = cli.global.no_timestamp;
    match &cli.command {
        Command::Norm { item, p, q, functional } => commands::norm(&cfg, item, *p, *q, *functional, no_ts),
        Command::Witness { p, q1, q2, n, r } => commands::witness(&cfg, *p, *q1, *q2, *n, *r, no_ts),
        Command::Verify { suite, out_dir } => commands::verify(&cfg, *suite, out_dir, no_ts),
        Command::Sweep { family, grid, functional } => commands::sweep(&cfg, family, grid, *functional, no_ts),
        Command::Gallery => commands::gallery(&cfg, no_ts),
    }
}

fn emit(cli: &Cli, text: &str) -> Result<(), CliError> {
    match &cli.global.output {
        Some(path) => fs::write(path, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::from(EXIT_PASS),
                _ => ExitCode::from(EXIT_USAGE),
            };
        }
    };
    let result = run(&cli).and_then(|out| emit(&cli, &out.text).map(|_| out.passed));
    match result {
        Ok(true) => ExitCode::from(EXIT_PASS),
        Ok(false) => ExitCode::from(EXIT_FAIL),
        Err(e) => {
            eprintln!("lorentz-lab: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
