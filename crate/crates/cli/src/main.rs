#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod args;
mod commands;
mod error;
mod manifest;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use args::{Cli, Command};
use error::{CliError, CliResult};

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().skip(1).collect();
    match run(&argv) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) if msg.is_empty() => ExitCode::from(1),
        Err(e) => {
            eprintln!("resdeconv: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

/// Parses `args` (without the program name) and dispatches.
pub fn run(args: &[String]) -> CliResult<()> {
    let cli = match Cli::try_parse_from(std::iter::once("resdeconv".to_string()).chain(args.iter().cloned())) {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return Ok(());
        }
        Err(e) => {
            eprint!("{e}");
            return Err(CliError::Usage(String::new()));
        }
    };
    match &cli.command {
        Command::Degrade(a) => commands::degrade::run(a, args),
        Command::Deconv(a) => commands::deconv::run(a, args),
        Command::Eval(a) => commands::eval::run(a),
        Command::OracleCheck(a) => commands::oracle::run(a),
        Command::KernelGen(a) => commands::kernels::kernel_gen(a, args),
        Command::MakeTestset(a) => commands::kernels::make_testset(a, args),
        Command::Trace(a) => commands::trace::run(a, args),
        Command::LossFixture(a) => commands::fixture::run(a, args),
        Command::Replay(a) => commands::replay::run(a),
    }
}
