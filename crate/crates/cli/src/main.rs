mod args;
mod commands;
mod input;
mod verify;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

/// Failure classes with their stable exit codes.
#[derive(Debug)]
pub enum Failure {
    Invalid(String),
    Io(String),
    Solver(String),
    Verification(usize),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Invalid(_) => 2,
            Failure::Io(_) => 3,
            Failure::Solver(_) => 4,
            Failure::Verification(_) => 5,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Invalid(m) => write!(f, "invalid input: {m}"),
            Failure::Io(m) => write!(f, "i/o error: {m}"),
            Failure::Solver(m) => write!(f, "{m}"),
            Failure::Verification(n) => write!(f, "{n} verification check(s) failed"),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Construct(a) => commands::construct(&a),
        Command::Value(a) => commands::value(&a),
        Command::LhsBound(a) => commands::lhs_bound(&a),
        Command::Certify(a) => commands::certify(&a),
        Command::Sweep(a) => commands::sweep(&a),
        Command::Verify(a) => verify::run(&a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("steercert: {e}");
            ExitCode::from(e.code())
        }
    }
}
