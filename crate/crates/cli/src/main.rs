//! Batch driver: `wsquad <capacitance|convergence|weights|constants> [flags]`.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 configuration error, 3 numeric
//! failure.

mod commands;
mod config;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use config::{Cli, Command, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("output error: {0}")]
    Output(#[from] io::Error),
    #[error(transparent)]
    Compute(#[from] wsquad::Error),
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io { .. } | CliError::Output(_) => 1,
            CliError::Compute(wsquad::Error::InvalidArgument(_) | wsquad::Error::NotImplemented(_)) => 2,
            CliError::Compute(_) => 3,
        }
    }
}

fn run(cfg: &RunConfig) -> Result<(), CliError> {
    let mut out: Box<dyn Write> = match &cfg.out {
        Some(path) => {
            let file = File::create(path).map_err(|e| CliError::Io { path: path.clone(), source: e })?;
            Box::new(BufWriter::new(file))
        }
        None => Box::new(io::stdout().lock()),
    };
    match cfg.command {
        Command::Capacitance => commands::run_capacitance(cfg, &mut out)?,
        Command::Convergence => commands::run_convergence(cfg, &mut out)?,
        Command::Weights => commands::run_weights(cfg, &mut out)?,
        Command::Constants => commands::run_constants(cfg, &mut out)?,
    }
    out.flush().map_err(|e| match &cfg.out {
        Some(path) => CliError::Io { path: path.clone(), source: e },
        None => CliError::Output(e),
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = RunConfig::from_cli(&cli).and_then(|cfg| run(&cfg));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        // A reader such as `head` closing stdout early is not a failure.
        Err(CliError::Output(e)) if e.kind() == io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("wsquad: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
