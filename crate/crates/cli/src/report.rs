//! JSON report documents. Each carries a schema name and version; the
//! matching JSON Schemas live in `docs/schemas/`.

use serde::Serialize;

use doublesel::diagnostics::SparseEigMethod;
use doublesel::double_selection::Interval;
use doublesel::penalty::SelectorKind;
use doublesel::simulation::{EstimatorSummary, SeKind, SimulationReport};

pub const ESTIMATION_SCHEMA: &str = "doublesel/estimation-report";
pub const SIMULATION_SCHEMA: &str = "doublesel/simulation-report";
pub const SPARSE_EIG_SCHEMA: &str = "doublesel/sparse-eigenvalue-report";
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize)]
pub struct FitConfig {
    pub c: f64,
    pub gamma: f64,
    pub selector: SelectorKind,
    pub level: f64,
    pub seed: u64,
    pub intercept: bool,
    pub with_ridge: bool,
    pub max_loading_iterations: usize,
    pub loading_tolerance: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EstimationReport {
    pub schema: &'static str,
    pub schema_version: u32,
    pub outcome: String,
    pub treatment: String,
    pub alpha_hat: f64,
    /// Asymptotic standard deviation; `se_plugin = sigma_plugin / sqrt(n_used)`.
    pub sigma_plugin: f64,
    pub se_plugin: f64,
    pub se_jackknife: f64,
    pub ci_plugin: Interval,
    pub ci_jackknife: Interval,
    pub selected_for_treatment: Vec<String>,
    pub selected_for_outcome: Vec<String>,
    pub amelioration: Vec<String>,
    pub union: Vec<String>,
    pub union_size: usize,
    pub n_used: usize,
    pub rows_dropped: usize,
    pub p: usize,
    pub rank_deficient: bool,
    pub config: FitConfig,
}

#[derive(Debug, Clone, Serialize)]
pub struct SparseEigenvalueReport {
    pub schema: &'static str,
    pub schema_version: u32,
    pub controls: Vec<String>,
    pub n_used: usize,
    pub rows_dropped: usize,
    pub p: usize,
    pub m: usize,
    pub phi_min: f64,
    pub phi_max: f64,
    pub method: SparseEigMethod,
    pub subsets_examined: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulationConfig {
    pub c: f64,
    pub gamma: f64,
    pub selector: SelectorKind,
    pub ridge_folds: usize,
    pub rho: f64,
    pub tail_limit: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulationPointReport {
    pub schema: &'static str,
    pub schema_version: u32,
    pub design: u8,
    pub n: usize,
    pub p: usize,
    pub alpha0: f64,
    pub r2_y: f64,
    pub r2_d: f64,
    pub reps: usize,
    pub seed: u64,
    pub se: SeKind,
    pub test_size: f64,
    /// Hexadecimal digest of the per-replication draw checksums.
    pub draw_digest: String,
    pub estimators: Vec<EstimatorSummary>,
    pub config: SimulationConfig,
}

impl SimulationPointReport {
    pub fn new(report: &SimulationReport, config: SimulationConfig) -> Self {
        SimulationPointReport {
            schema: SIMULATION_SCHEMA,
            schema_version: SCHEMA_VERSION,
            design: report.design,
            n: report.n,
            p: report.p,
            alpha0: report.alpha0,
            r2_y: report.r2_y,
            r2_d: report.r2_d,
            reps: report.reps,
            seed: report.seed,
            se: report.se,
            test_size: report.test_size,
            draw_digest: format!("{:016x}", report.draw_digest),
            estimators: report.estimators.clone(),
            config,
        }
    }
}

/// Pretty-printed JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types always serialize");
    s.push('\n');
    s
}
