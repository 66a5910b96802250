use std::process::ExitCode;

use clap::Parser;
use doublesel_cli::args::Cli;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match doublesel_cli::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("doublesel: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
