//! `minimax`: classify stationary points, run trajectory ensembles and
//! avoidance experiments, and sweep timescale parameters.
//!
//! Exit codes: 0 on success, 1 on usage or input errors, 2 when a predicted
//! verdict is contradicted by observation.

mod args;
mod commands;

use std::process::ExitCode;

use clap::Parser;
use minimax_core::Error;

use crate::args::{Cli, Command};

pub const EXIT_INPUT: u8 = 1;
pub const EXIT_MISMATCH: u8 = 2;

/// Returned by a command that completed but found a theory mismatch.
#[derive(Debug)]
pub struct Mismatch(pub Vec<String>);

impl std::fmt::Display for Mismatch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "prediction contradicted by observation: {}", self.0.join("; "))
    }
}

impl std::error::Error for Mismatch {}

fn exit_code(err: &anyhow::Error) -> u8 {
    let mismatch = err.chain().any(|e| {
        e.downcast_ref::<Mismatch>().is_some()
            || matches!(e.downcast_ref::<Error>(), Some(Error::CriteriaMismatch(_)))
    });
    if mismatch {
        EXIT_MISMATCH
    } else {
        EXIT_INPUT
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_INPUT) } else { ExitCode::SUCCESS };
        }
    };
    let result = match &cli.command {
        Command::Classify(a) => commands::classify(a),
        Command::Simulate(a) => commands::simulate(a),
        Command::Avoidance(a) => commands::avoidance(a),
        Command::Sweep(a) => commands::sweep(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
