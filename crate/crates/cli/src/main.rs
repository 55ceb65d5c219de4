mod args;
mod commands;
mod error;
mod manifest;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use error::CliError;

fn threads_of(cmd: &Command) -> usize {
    match cmd {
        Command::StudyLognormal(a) | Command::StudyAffineQoi(a) => a.common.threads,
        Command::FemVerify(a) => a.common.threads,
        Command::Moments(a) => a.common.threads,
        Command::LatticeGen(a) => a.common.threads,
        Command::CheckTheory(a) => a.common.threads,
    }
}

fn dispatch(cmd: &Command) -> Result<(), CliError> {
    let threads = threads_of(cmd);
    if threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Usage(format!("--threads: {e}")))?;
    }
    match cmd {
        Command::StudyLognormal(a) => commands::run_study("study-lognormal", "lognormal", a),
        Command::StudyAffineQoi(a) => commands::run_study("study-affine-qoi", "affine-qoi", a),
        Command::FemVerify(a) => commands::run_fem_verify(a),
        Command::Moments(a) => commands::run_moments(a),
        Command::LatticeGen(a) => commands::run_lattice_gen(a),
        Command::CheckTheory(a) => commands::run_check_theory(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
