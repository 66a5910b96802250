use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "doublesel",
    version,
    about = "Treatment-effect inference after selecting among many controls"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate a treatment effect from a CSV file.
    Fit(FitArgs),
    /// Run the Monte Carlo designs and write summary reports.
    Simulate(SimulateArgs),
    /// Compute sparse eigenvalues of the empirical Gram matrix of the controls.
    Diagnose(DiagnoseArgs),
}

#[derive(Debug, Args)]
pub struct PenaltyArgs {
    /// Penalty slack constant (must exceed 1).
    #[arg(long, default_value_t = 1.1)]
    pub c: f64,
    /// Penalty confidence parameter.
    #[arg(long, default_value_t = 0.05)]
    pub gamma: f64,
    /// Control selector: iterated-lasso, sqrt-lasso-homoscedastic,
    /// sqrt-lasso-conservative or sqrt-lasso-iterated.
    #[arg(long, default_value = "iterated-lasso")]
    pub selector: String,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// CSV file with a header row.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub outcome: String,
    #[arg(long)]
    pub treatment: String,
    /// Comma-separated control columns.
    #[arg(long, conflicts_with = "controls_all_others", required_unless_present = "controls_all_others")]
    pub controls: Option<String>,
    /// Use every column other than outcome and treatment as a control.
    #[arg(long)]
    pub controls_all_others: bool,
    /// Comma-separated controls always kept in the final regression.
    #[arg(long)]
    pub amelioration: Option<String>,
    #[command(flatten)]
    pub penalty: PenaltyArgs,
    /// Confidence level of the reported intervals.
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,
    /// Do not add an intercept column.
    #[arg(long)]
    pub no_intercept: bool,
    /// Offer a cross-validated ridge fit of the treatment as an extra control.
    #[arg(long)]
    pub with_ridge: bool,
    /// Seed for the cross-validation folds; printed when omitted.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Write the JSON report here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Design 1 (homoscedastic), 2 (heteroscedastic) or 3 (random tail).
    #[arg(long)]
    pub design: u8,
    /// `full`, or R^2 pairs `r2_y,r2_d` separated by `;` (a flat
    /// comma-separated list of even length is read pairwise).
    #[arg(long)]
    pub r2_grid: String,
    #[arg(long)]
    pub reps: usize,
    /// Comma-separated estimators: oracle, ds-oracle, post-lasso,
    /// double-selection, double-selection-ridge.
    #[arg(long, default_value = "oracle,ds-oracle,post-lasso,double-selection,double-selection-ridge")]
    pub estimators: String,
    /// Seed for every random draw; printed when omitted.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = 100)]
    pub n: usize,
    #[arg(long, default_value_t = 200)]
    pub p: usize,
    #[arg(long, default_value_t = 0.5)]
    pub alpha0: f64,
    #[arg(long, default_value_t = 0.5)]
    pub rho: f64,
    /// Design 3: last index receiving a random coefficient (default: all).
    #[arg(long)]
    pub tail_limit: Option<usize>,
    /// Standard error used by the tests: jackknife or plugin.
    #[arg(long, default_value = "jackknife")]
    pub se: String,
    #[command(flatten)]
    pub penalty: PenaltyArgs,
    /// Output directory.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Also write per-replication studentized statistics.
    #[arg(long)]
    pub emit_studentized: bool,
}

#[derive(Debug, Args)]
pub struct DiagnoseArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// Comma-separated control columns.
    #[arg(long, conflicts_with = "controls_all", required_unless_present = "controls_all")]
    pub controls: Option<String>,
    /// Use every column as a control.
    #[arg(long)]
    pub controls_all: bool,
    /// Sparsity level.
    #[arg(long)]
    pub m: usize,
    /// Largest number of supports to enumerate.
    #[arg(long, default_value_t = 200_000)]
    pub cap: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}
