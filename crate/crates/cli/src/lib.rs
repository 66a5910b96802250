//! Command-line front end for the `doublesel` estimator.

pub mod args;
pub mod commands;
pub mod dataset;
pub mod error;
pub mod report;

use args::{Cli, Command};
use error::CliResult;

pub fn run(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::Fit(a) => commands::fit(a),
        Command::Simulate(a) => commands::simulate(a),
        Command::Diagnose(a) => commands::diagnose(a),
    }
}
