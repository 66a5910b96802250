//! Monte Carlo designs for the partially linear model and a harness that
//! compares estimators on common random draws.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::diagnostics::ks_distance_to_normal;
use crate::double_selection::{
    jackknife_variance, plugin_variance, post_double_selection, post_double_selection_ridge,
    post_single_selection, TreatmentEffectEstimate,
};
use crate::error::{argument, Error, Result};
use crate::numerics::{normal_quantile, ols_fit, toeplitz_correlation_factor, RealMatrix, RealVector, RngStream};
use crate::penalty::PenaltyConfig;
use crate::ridge::RidgeCvSpec;

/// Number of deterministic coefficients in the random-tail design.
pub const DETERMINISTIC_TERMS: usize = 5;

/// The `R^2` values used on both axes of the full grid.
pub const R2_LEVELS: [f64; 5] = [0.0, 0.2, 0.4, 0.6, 0.8];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignSpec {
    /// 1: homoscedastic, 2: heteroscedastic, 3: deterministic head plus random tail.
    pub design: u8,
    pub n: usize,
    pub p: usize,
    pub alpha0: f64,
    pub rho: f64,
    pub r2_y: f64,
    pub r2_d: f64,
    pub seed: u64,
    /// Design 3 only: last index (1-based) that receives a random coefficient.
    /// `None` randomizes every index after the deterministic head.
    pub tail_limit: Option<usize>,
}

impl DesignSpec {
    pub fn new(design: u8, r2_y: f64, r2_d: f64, seed: u64) -> Self {
        DesignSpec {
            design,
            n: 100,
            p: 200,
            alpha0: 0.5,
            rho: 0.5,
            r2_y,
            r2_d,
            seed,
            tail_limit: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.design) {
            return argument(format!("design must be 1, 2 or 3, got {}", self.design));
        }
        if self.n < 2 || self.p < 1 {
            return argument(format!("need n >= 2 and p >= 1, got n = {}, p = {}", self.n, self.p));
        }
        for (name, r2) in [("r2_y", self.r2_y), ("r2_d", self.r2_d)] {
            if !(0.0..1.0).contains(&r2) {
                return argument(format!("{name} must lie in [0, 1), got {r2}"));
            }
        }
        if !(self.rho.abs() < 1.0) {
            return argument(format!("rho must satisfy |rho| < 1, got {}", self.rho));
        }
        if !self.alpha0.is_finite() {
            return argument("alpha0 must be finite");
        }
        Ok(())
    }

    fn with_point(&self, r2_y: f64, r2_d: f64) -> Self {
        DesignSpec { r2_y, r2_d, ..self.clone() }
    }
}

/// `beta_j = (1/j)^2` for `j = 1..=p`, zero beyond `terms` when given.
pub fn decay_vector(p: usize, terms: Option<usize>) -> RealVector {
    let cut = terms.unwrap_or(p);
    RealVector::from_fn(p, |j, _| if j < cut { 1.0 / ((j + 1) as f64).powi(2) } else { 0.0 })
}

fn toeplitz_quadratic_form(beta: &RealVector, rho: f64) -> f64 {
    let p = beta.len();
    let mut total = 0.0;
    for k in 0..p {
        if beta[k] == 0.0 {
            continue;
        }
        for j in 0..p {
            total += beta[k] * beta[j] * rho.powi((k as i32 - j as i32).abs());
        }
    }
    total
}

/// `(c_y, c_d)` hitting the target population `R^2`s of the outcome
/// (reduced form) and treatment equations under unit error variances.
pub fn design_constants(spec: &DesignSpec) -> Result<(f64, f64)> {
    spec.validate()?;
    let terms = (spec.design == 3).then_some(DETERMINISTIC_TERMS);
    let b = toeplitz_quadratic_form(&decay_vector(spec.p, terms), spec.rho);
    let c_d = (spec.r2_d / ((1.0 - spec.r2_d) * b)).sqrt();
    let reduced = (spec.r2_y * (spec.alpha0 * spec.alpha0 + 1.0) / ((1.0 - spec.r2_y) * b)).sqrt();
    let c_y = reduced - spec.alpha0 * c_d;
    if !c_y.is_finite() || !c_d.is_finite() {
        return argument("R^2 targets give non-finite design constants");
    }
    Ok((c_y, c_d))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplicationDraw {
    pub y: RealVector,
    pub d: RealVector,
    pub x: RealMatrix,
    pub theta_g: RealVector,
    pub theta_m: RealVector,
}

impl ReplicationDraw {
    /// FNV-1a over the bit patterns of `y`, `d` and `x`.
    pub fn checksum(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for v in self.y.iter().chain(self.d.iter()).chain(self.x.iter()) {
            for byte in v.to_bits().to_le_bytes() {
                h ^= byte as u64;
                h = h.wrapping_mul(0x0000_0100_0000_01b3);
            }
        }
        h
    }

    /// Controls with a leading all-ones column.
    pub fn controls_with_intercept(&self) -> RealMatrix {
        self.x.clone().insert_column(0, 1.0)
    }
}

/// Draws replications of one design point. Holds the correlation factor and
/// the design constants so repeated draws do not recompute them.
#[derive(Debug, Clone)]
pub struct DesignSampler {
    spec: DesignSpec,
    factor: RealMatrix,
    beta0: RealVector,
    c_y: f64,
    c_d: f64,
}

impl DesignSampler {
    pub fn new(spec: &DesignSpec) -> Result<Self> {
        let (c_y, c_d) = design_constants(spec)?;
        Ok(DesignSampler {
            factor: toeplitz_correlation_factor(spec.p, spec.rho)?,
            beta0: decay_vector(spec.p, None),
            spec: spec.clone(),
            c_y,
            c_d,
        })
    }

    pub fn spec(&self) -> &DesignSpec {
        &self.spec
    }

    pub fn constants(&self) -> (f64, f64) {
        (self.c_y, self.c_d)
    }

    /// Draw order: design-3 tail coefficients (pairs `(g, m)` by index),
    /// then the rows of `x`, then `v`, then `zeta`.
    pub fn draw(&self, stream: &mut RngStream) -> ReplicationDraw {
        let DesignSpec { n, p, alpha0, .. } = self.spec;
        let (theta_g, theta_m) = if self.spec.design == 3 {
            let head = decay_vector(p, Some(DETERMINISTIC_TERMS));
            let mut g = &head * self.c_y;
            let mut m = &head * self.c_d;
            let last = self.spec.tail_limit.unwrap_or(p).min(p);
            let sd = (1.0 / p as f64).sqrt();
            for j in DETERMINISTIC_TERMS..last {
                g[j] = sd * stream.normal();
                m[j] = sd * stream.normal();
            }
            (g, m)
        } else {
            (&self.beta0 * self.c_y, &self.beta0 * self.c_d)
        };

        let mut z = RealMatrix::zeros(p, n);
        for i in 0..n {
            stream.fill_normal(z.column_mut(i).as_mut_slice());
        }
        let x = (&self.factor * z).transpose();
        let mut v = RealVector::zeros(n);
        stream.fill_normal(v.as_mut_slice());
        let mut zeta = RealVector::zeros(n);
        stream.fill_normal(zeta.as_mut_slice());

        let xm = &x * &theta_m;
        let xg = &x * &theta_g;
        let (d, y) = if self.spec.design == 2 {
            let base = (&x * &self.beta0).add_scalar(1.0);
            let sd_d = normalized_scale(&base);
            let d = RealVector::from_fn(n, |i, _| xm[i] + sd_d[i] * v[i]);
            let outcome_base = RealVector::from_fn(n, |i, _| base[i] + alpha0 * d[i]);
            let sd_y = normalized_scale(&outcome_base);
            let y = RealVector::from_fn(n, |i, _| alpha0 * d[i] + xg[i] + sd_y[i] * zeta[i]);
            (d, y)
        } else {
            let d = &xm + &v;
            let y = RealVector::from_fn(n, |i, _| alpha0 * d[i] + xg[i] + zeta[i]);
            (d, y)
        };
        ReplicationDraw { y, d, x, theta_g, theta_m }
    }
}

/// `|a_i| / sqrt(En[a^2])`, so that `En[scale^2] = 1`.
fn normalized_scale(a: &RealVector) -> RealVector {
    let ms = a.norm_squared() / a.len() as f64;
    a.map(|v| v.abs() / ms.sqrt())
}

pub fn generate_replication(spec: &DesignSpec, stream: &mut RngStream) -> Result<ReplicationDraw> {
    Ok(DesignSampler::new(spec)?.draw(stream))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Estimator {
    Oracle,
    DsOracle,
    PostLasso,
    DoubleSelection,
    DoubleSelectionRidge,
}

impl Estimator {
    pub const ALL: [Estimator; 5] = [
        Estimator::Oracle,
        Estimator::DsOracle,
        Estimator::PostLasso,
        Estimator::DoubleSelection,
        Estimator::DoubleSelectionRidge,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Estimator::Oracle => "oracle",
            Estimator::DsOracle => "ds-oracle",
            Estimator::PostLasso => "post-lasso",
            Estimator::DoubleSelection => "double-selection",
            Estimator::DoubleSelectionRidge => "double-selection-ridge",
        }
    }
}

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Estimator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Estimator::ALL.into_iter().find(|e| e.name() == s).ok_or_else(|| {
            let valid: Vec<_> = Estimator::ALL.iter().map(|e| e.name()).collect();
            Error::Argument(format!("unknown estimator '{s}'; valid: {}", valid.join(", ")))
        })
    }
}

/// Which standard error studentizes the test statistic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeKind {
    Jackknife,
    Plugin,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointEstimate {
    pub alpha: f64,
    pub se_jackknife: f64,
    pub se_plugin: f64,
}

impl PointEstimate {
    pub fn se(&self, kind: SeKind) -> f64 {
        match kind {
            SeKind::Jackknife => self.se_jackknife,
            SeKind::Plugin => self.se_plugin,
        }
    }
}

impl From<&TreatmentEffectEstimate> for PointEstimate {
    fn from(e: &TreatmentEffectEstimate) -> Self {
        PointEstimate { alpha: e.alpha_hat, se_jackknife: e.se_jackknife, se_plugin: e.se_plugin }
    }
}

/// OLS of `response` on `[regressor, 1]` with both standard errors of the slope.
fn simple_regression(response: &RealVector, regressor: &RealVector) -> Result<PointEstimate> {
    let n = response.len();
    let w = RealMatrix::from_fn(n, 2, |i, j| if j == 0 { regressor[i] } else { 1.0 });
    let fit = ols_fit(&w, response)?;
    let centered = regressor.add_scalar(-regressor.sum() / n as f64);
    let zeta = &fit.residuals * (n as f64 / (n - 2) as f64).sqrt();
    Ok(PointEstimate {
        alpha: fit.coefficients[0],
        se_jackknife: jackknife_variance(&w, &fit.residuals, 0)?.sqrt(),
        se_plugin: (plugin_variance(&centered, &zeta)? / n as f64).sqrt(),
    })
}

/// OLS of `y - x'theta_g` on `d` (with an intercept).
pub fn oracle_estimate(draw: &ReplicationDraw) -> Result<PointEstimate> {
    let target = &draw.y - &draw.x * &draw.theta_g;
    simple_regression(&target, &draw.d)
}

/// OLS of `y - x'theta_g` on `d - x'theta_m` (with an intercept).
pub fn ds_oracle_estimate(draw: &ReplicationDraw) -> Result<PointEstimate> {
    let target = &draw.y - &draw.x * &draw.theta_g;
    let partialled = &draw.d - &draw.x * &draw.theta_m;
    simple_regression(&target, &partialled)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationOptions {
    pub penalty: PenaltyConfig,
    pub ridge: RidgeCvSpec,
    pub se: SeKind,
    /// Nominal size of the two-sided test of `alpha = alpha0`.
    pub test_size: f64,
}

impl Default for SimulationOptions {
    fn default() -> Self {
        SimulationOptions {
            penalty: PenaltyConfig::default(),
            ridge: RidgeCvSpec::default(),
            se: SeKind::Jackknife,
            test_size: 0.05,
        }
    }
}

/// Applies one estimator to a draw. `stream` supplies the ridge folds.
pub fn apply_estimator(
    estimator: Estimator,
    draw: &ReplicationDraw,
    controls: &RealMatrix,
    options: &SimulationOptions,
    stream: &mut RngStream,
) -> Result<PointEstimate> {
    let level = 1.0 - options.test_size;
    match estimator {
        Estimator::Oracle => oracle_estimate(draw),
        Estimator::DsOracle => ds_oracle_estimate(draw),
        Estimator::PostLasso => {
            post_single_selection(&draw.y, &draw.d, controls, &options.penalty, level).map(|e| (&e).into())
        }
        Estimator::DoubleSelection => {
            post_double_selection(&draw.y, &draw.d, controls, &[], &options.penalty, level).map(|e| (&e).into())
        }
        Estimator::DoubleSelectionRidge => post_double_selection_ridge(
            &draw.y,
            &draw.d,
            controls,
            &[],
            &options.penalty,
            level,
            &options.ridge,
            stream,
        )
        .map(|e| (&e).into()),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplicationRecord {
    pub replication: u64,
    pub checksum: u64,
    /// One entry per requested estimator, in request order.
    pub results: Vec<std::result::Result<PointEstimate, Error>>,
}

/// Runs one replication: draws from stream `(seed, replication)` and feeds
/// the same draw to every estimator.
pub fn run_replication(
    sampler: &DesignSampler,
    replication: u64,
    estimators: &[Estimator],
    options: &SimulationOptions,
) -> ReplicationRecord {
    let mut stream = RngStream::new(sampler.spec.seed, replication);
    let draw = sampler.draw(&mut stream);
    let controls = draw.controls_with_intercept();
    let results = estimators
        .iter()
        .map(|&e| apply_estimator(e, &draw, &controls, options, &mut stream.clone()))
        .collect();
    ReplicationRecord { replication, checksum: draw.checksum(), results }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorSummary {
    pub estimator: Estimator,
    pub rmse: f64,
    pub bias: f64,
    /// Standard deviation with divisor equal to the number of successes.
    pub std: f64,
    pub rejection_rate: f64,
    pub successes: usize,
    pub exclusions: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
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
    /// Order-dependent fold of the per-replication draw checksums.
    pub draw_digest: u64,
    pub estimators: Vec<EstimatorSummary>,
}

impl SimulationReport {
    pub fn summary(&self, estimator: Estimator) -> Option<&EstimatorSummary> {
        self.estimators.iter().find(|s| s.estimator == estimator)
    }
}

fn run_records(
    sampler: &DesignSampler,
    reps: usize,
    estimators: &[Estimator],
    options: &SimulationOptions,
) -> Vec<ReplicationRecord> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..reps as u64)
            .into_par_iter()
            .map(|r| run_replication(sampler, r, estimators, options))
            .collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..reps as u64)
            .map(|r| run_replication(sampler, r, estimators, options))
            .collect()
    }
}

pub fn summarize(
    estimator: Estimator,
    estimates: &[PointEstimate],
    exclusions: usize,
    alpha0: f64,
    se: SeKind,
    critical: f64,
) -> EstimatorSummary {
    let k = estimates.len();
    if k == 0 {
        return EstimatorSummary {
            estimator,
            rmse: f64::NAN,
            bias: f64::NAN,
            std: f64::NAN,
            rejection_rate: f64::NAN,
            successes: 0,
            exclusions,
        };
    }
    let kf = k as f64;
    let mean = estimates.iter().map(|e| e.alpha).sum::<f64>() / kf;
    let var = estimates.iter().map(|e| (e.alpha - mean).powi(2)).sum::<f64>() / kf;
    let bias = mean - alpha0;
    let rejections = estimates
        .iter()
        .filter(|e| (e.alpha - alpha0).abs() > critical * e.se(se))
        .count();
    EstimatorSummary {
        estimator,
        rmse: (bias * bias + var).sqrt(),
        bias,
        std: var.sqrt(),
        rejection_rate: rejections as f64 / kf,
        successes: k,
        exclusions,
    }
}

fn report_from_records(
    spec: &DesignSpec,
    reps: usize,
    estimators: &[Estimator],
    options: &SimulationOptions,
    records: &[ReplicationRecord],
) -> Result<SimulationReport> {
    let critical = normal_quantile(1.0 - options.test_size / 2.0)?;
    let mut summaries = Vec::with_capacity(estimators.len());
    for (k, &estimator) in estimators.iter().enumerate() {
        let ok: Vec<PointEstimate> = records.iter().filter_map(|r| r.results[k].as_ref().ok().copied()).collect();
        let exclusions = records.len() - ok.len();
        summaries.push(summarize(estimator, &ok, exclusions, spec.alpha0, options.se, critical));
    }
    let draw_digest = records
        .iter()
        .fold(0u64, |acc, r| acc.rotate_left(5) ^ r.checksum);
    Ok(SimulationReport {
        design: spec.design,
        n: spec.n,
        p: spec.p,
        alpha0: spec.alpha0,
        r2_y: spec.r2_y,
        r2_d: spec.r2_d,
        reps,
        seed: spec.seed,
        se: options.se,
        test_size: options.test_size,
        draw_digest,
        estimators: summaries,
    })
}

fn check_run(reps: usize, estimators: &[Estimator], options: &SimulationOptions) -> Result<()> {
    if reps < 1 {
        return argument("at least one replication is required");
    }
    if estimators.is_empty() {
        return argument("no estimators requested");
    }
    if !(options.test_size > 0.0 && options.test_size < 1.0) {
        return argument(format!("test size must lie in (0, 1), got {}", options.test_size));
    }
    options.penalty.validate()
}

/// Runs `reps` replications at one design point and keeps the per-replication
/// records alongside the summary.
pub fn run_point(
    spec: &DesignSpec,
    reps: usize,
    estimators: &[Estimator],
    options: &SimulationOptions,
) -> Result<(SimulationReport, Vec<ReplicationRecord>)> {
    check_run(reps, estimators, options)?;
    let sampler = DesignSampler::new(spec)?;
    let records = run_records(&sampler, reps, estimators, options);
    let report = report_from_records(spec, reps, estimators, options, &records)?;
    Ok((report, records))
}

/// One report per `(r2_y, r2_d)` pair. `base` supplies everything except the
/// two `R^2` targets.
pub fn run_grid(
    base: &DesignSpec,
    grid: &[(f64, f64)],
    reps: usize,
    estimators: &[Estimator],
    options: &SimulationOptions,
) -> Result<Vec<SimulationReport>> {
    if grid.is_empty() {
        return argument("empty R^2 grid");
    }
    grid.iter()
        .map(|&(r2_y, r2_d)| run_point(&base.with_point(r2_y, r2_d), reps, estimators, options).map(|(r, _)| r))
        .collect()
}

/// Every pair from [`R2_LEVELS`], outcome `R^2` varying slowest.
pub fn full_grid() -> Vec<(f64, f64)> {
    R2_LEVELS
        .iter()
        .flat_map(|&y| R2_LEVELS.iter().map(move |&d| (y, d)))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudentizedSamples {
    /// `(alpha_hat - alpha0) / se` for each successful replication.
    pub samples: Vec<f64>,
    pub ks: f64,
    pub exclusions: usize,
}

/// Studentized statistics of `estimator` from the records of a run.
pub fn studentize(
    records: &[ReplicationRecord],
    index: usize,
    alpha0: f64,
    se: SeKind,
) -> Result<StudentizedSamples> {
    let samples: Vec<f64> = records
        .iter()
        .filter_map(|r| r.results.get(index)?.as_ref().ok())
        .map(|e| (e.alpha - alpha0) / e.se(se))
        .collect();
    let exclusions = records.len() - samples.len();
    let ks = ks_distance_to_normal(&samples)?;
    Ok(StudentizedSamples { samples, ks, exclusions })
}

pub fn studentized_samples(
    spec: &DesignSpec,
    reps: usize,
    estimator: Estimator,
    options: &SimulationOptions,
) -> Result<StudentizedSamples> {
    if reps < 100 {
        return argument(format!("studentized samples need at least 100 replications, got {reps}"));
    }
    let (_, records) = run_point(spec, reps, &[estimator], options)?;
    studentize(&records, 0, spec.alpha0, options.se)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn constants_at_zero() {
        let (c_y, c_d) = design_constants(&DesignSpec::new(1, 0.0, 0.0, 1)).unwrap();
        assert_eq!((c_y, c_d), (0.0, 0.0));
        let (_, c_d) = design_constants(&DesignSpec::new(1, 0.5, 0.0, 1)).unwrap();
        assert_eq!(c_d, 0.0);
        assert!(design_constants(&DesignSpec::new(1, 1.0, 0.0, 1)).is_err());
        assert!(design_constants(&DesignSpec::new(4, 0.1, 0.0, 1)).is_err());
    }

    #[test]
    fn quadratic_form_by_hand() {
        let b = RealVector::from_vec(vec![1.0, 0.25]);
        assert_abs_diff_eq!(toeplitz_quadratic_form(&b, 0.5), 1.0 + 0.0625 + 2.0 * 0.25 * 0.5, epsilon = 1e-15);
    }

    #[test]
    fn zero_constants_draw() {
        let spec = DesignSpec { n: 20, p: 10, ..DesignSpec::new(1, 0.0, 0.0, 3) };
        let draw = generate_replication(&spec, &mut RngStream::new(3, 0)).unwrap();
        // Replay the stream: x rows first, then v, then zeta.
        let mut s = RngStream::new(3, 0);
        let mut skip = vec![0.0; 200];
        s.fill_normal(&mut skip);
        let v: Vec<f64> = (0..20).map(|_| s.normal()).collect();
        let zeta: Vec<f64> = (0..20).map(|_| s.normal()).collect();
        for i in 0..20 {
            assert_eq!(draw.d[i], v[i]);
            assert_eq!(draw.y[i], 0.5 * v[i] + zeta[i]);
        }
    }

    #[test]
    fn heteroscedastic_scale_normalizes() {
        let spec = DesignSpec { n: 50, p: 30, ..DesignSpec::new(2, 0.4, 0.6, 8) };
        let sampler = DesignSampler::new(&spec).unwrap();
        for r in 0..5 {
            let draw = sampler.draw(&mut RngStream::new(8, r));
            let base = (&draw.x * decay_vector(30, None)).add_scalar(1.0);
            let s = normalized_scale(&base);
            assert_abs_diff_eq!(s.norm_squared() / 50.0, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn random_tail_modes() {
        let spec = DesignSpec { n: 10, p: 200, ..DesignSpec::new(3, 0.5, 0.5, 2) };
        let draw = generate_replication(&spec, &mut RngStream::new(2, 0)).unwrap();
        assert!(draw.theta_g.rows(5, 195).iter().all(|&v| v != 0.0));
        let limited = DesignSpec { tail_limit: Some(100), ..spec.clone() };
        let draw = generate_replication(&limited, &mut RngStream::new(2, 0)).unwrap();
        assert!(draw.theta_g.rows(5, 95).iter().all(|&v| v != 0.0));
        assert!(draw.theta_g.rows(100, 100).iter().all(|&v| v == 0.0));
        let (c_y, c_d) = design_constants(&spec).unwrap();
        assert_abs_diff_eq!(draw.theta_m[1], c_d / 4.0, epsilon = 1e-15);
        assert_abs_diff_eq!(draw.theta_g[4], c_y / 25.0, epsilon = 1e-15);
        // Fresh coefficients per replication.
        let other = generate_replication(&spec, &mut RngStream::new(2, 1)).unwrap();
        let first = generate_replication(&spec, &mut RngStream::new(2, 0)).unwrap();
        assert_ne!(first.theta_g[50], other.theta_g[50]);
    }

    #[test]
    fn oracles_recover_alpha_without_noise() {
        let spec = DesignSpec { n: 40, p: 15, ..DesignSpec::new(1, 0.5, 0.5, 4) };
        let mut draw = generate_replication(&spec, &mut RngStream::new(4, 0)).unwrap();
        let xg = &draw.x * &draw.theta_g;
        draw.y = &draw.d * 0.5 + &xg;
        assert_abs_diff_eq!(oracle_estimate(&draw).unwrap().alpha, 0.5, epsilon = 1e-12);

        let mut shifted = draw.clone();
        let noise = RealVector::from_fn(40, |i, _| (i as f64).sin());
        shifted.y = &draw.y + &noise;
        let a = oracle_estimate(&shifted).unwrap();
        let mut moved = shifted.clone();
        moved.theta_g = &shifted.theta_g * 2.0;
        moved.y = &shifted.y + &xg;
        let b = oracle_estimate(&moved).unwrap();
        assert_abs_diff_eq!(a.alpha, b.alpha, epsilon = 1e-10);

        let mut ds = draw.clone();
        let xm = &ds.x * &ds.theta_m;
        ds.y = (&ds.d - &xm) * 0.5 + &xg;
        assert_abs_diff_eq!(ds_oracle_estimate(&ds).unwrap().alpha, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn summary_identities() {
        let ests: Vec<PointEstimate> = [0.4, 0.7, 0.45, 0.52]
            .iter()
            .map(|&a| PointEstimate { alpha: a, se_jackknife: 0.1, se_plugin: 0.1 })
            .collect();
        let s = summarize(Estimator::Oracle, &ests, 1, 0.5, SeKind::Jackknife, 1.959964);
        assert_abs_diff_eq!(s.rmse * s.rmse, s.bias * s.bias + s.std * s.std, epsilon = 1e-12);
        assert_eq!(s.rejection_rate, 0.25);
        assert_eq!(s.successes + s.exclusions, 5);
        let one = summarize(Estimator::Oracle, &ests[..1], 0, 0.5, SeKind::Jackknife, 1.96);
        assert_eq!(one.std, 0.0);
        assert_abs_diff_eq!(one.bias, -0.1, epsilon = 1e-15);
    }

    #[test]
    fn names_round_trip() {
        for e in Estimator::ALL {
            assert_eq!(e.name().parse::<Estimator>().unwrap(), e);
        }
        assert!("lasso".parse::<Estimator>().is_err());
    }

    #[test]
    fn small_run_is_deterministic_and_shares_draws() {
        let spec = DesignSpec { n: 60, p: 40, ..DesignSpec::new(1, 0.4, 0.4, 21) };
        let opts = SimulationOptions::default();
        let (a, recs_a) = run_point(&spec, 6, &Estimator::ALL, &opts).unwrap();
        let (b, recs_b) = run_point(&spec, 6, &Estimator::ALL, &opts).unwrap();
        assert_eq!(a, b);
        assert_eq!(recs_a, recs_b);
        let sampler = DesignSampler::new(&spec).unwrap();
        for r in &recs_a {
            let draw = sampler.draw(&mut RngStream::new(21, r.replication));
            assert_eq!(draw.checksum(), r.checksum);
        }
        for s in &a.estimators {
            assert_eq!(s.successes + s.exclusions, 6);
            assert!((0.0..=1.0).contains(&s.rejection_rate));
        }
    }
}
