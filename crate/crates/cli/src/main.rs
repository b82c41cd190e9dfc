//! Command-line runner for parameter sweeps, the random network ensemble and
//! the acceptance suite.

mod config;
mod sweep;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use config::{Args, Experiment, SweepConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("cannot write output: {0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Encode(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            Self::Config(_) | Self::Io(_) => 2,
            Self::Encode(_) => 1,
        }
    }
}

fn write_output(cfg: &SweepConfig, text: &str) -> Result<(), CliError> {
    match &cfg.out {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn verify(cfg: &SweepConfig) -> Result<bool, CliError> {
    let outcomes = qkur::acceptance::run_all();
    let mut text = String::new();
    for o in &outcomes {
        text.push_str(&format!("{o}\n"));
    }
    let passed = outcomes.iter().filter(|o| o.passed).count();
    text.push_str(&format!("{passed} of {} criteria passed\n", outcomes.len()));
    write_output(cfg, &text)?;
    Ok(passed == outcomes.len())
}

fn run(args: Args) -> Result<bool, CliError> {
    let cfg = SweepConfig::try_from(args)?;
    if cfg.experiment == Experiment::Verify {
        return verify(&cfg);
    }
    let table = sweep::run_sweep(&cfg)?;
    write_output(&cfg, &table.render(cfg.format)?)?;
    Ok(true)
}

fn main() -> ExitCode {
    match run(Args::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
