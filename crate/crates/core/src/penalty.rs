//! Plug-in penalty levels and data-driven penalty loadings.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{argument, estimation, Error, Result};
use crate::lasso::{post_lasso_refit, solve, Design, LassoFit, LassoProblem, Objective, SolverOptions};
use crate::numerics::{column_mean_squares, is_constant_one_column, normal_quantile, RealMatrix, RealVector};

/// Loadings below this fraction of the largest loading are raised to it.
pub const LOADING_FLOOR_RATIO: f64 = 1e-6;

/// Post-fit residuals with mean square below this fraction of `En[y^2]`
/// count as an exact fit.
const ZERO_RESIDUAL_RATIO: f64 = 1e-20;

/// Which feasible Lasso variant selects controls.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SelectorKind {
    /// Lasso with loadings re-estimated from post-Lasso residuals.
    IteratedLasso,
    /// Square-root Lasso with `l_j = sqrt(En[x_j^2])`.
    SqrtLassoHomoscedastic,
    /// Square-root Lasso with `l_j = 2 (En[x_j^4])^(1/4)`.
    SqrtLassoConservative,
    /// Square-root Lasso with loadings re-estimated from post-fit residuals.
    SqrtLassoIterated,
}

impl SelectorKind {
    pub const ALL: [SelectorKind; 4] = [
        SelectorKind::IteratedLasso,
        SelectorKind::SqrtLassoHomoscedastic,
        SelectorKind::SqrtLassoConservative,
        SelectorKind::SqrtLassoIterated,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SelectorKind::IteratedLasso => "iterated-lasso",
            SelectorKind::SqrtLassoHomoscedastic => "sqrt-lasso-homoscedastic",
            SelectorKind::SqrtLassoConservative => "sqrt-lasso-conservative",
            SelectorKind::SqrtLassoIterated => "sqrt-lasso-iterated",
        }
    }

    pub fn objective(self) -> Objective {
        match self {
            SelectorKind::IteratedLasso => Objective::Lasso,
            _ => Objective::SqrtLasso,
        }
    }
}

impl fmt::Display for SelectorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SelectorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SelectorKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                let valid: Vec<_> = SelectorKind::ALL.iter().map(|k| k.name()).collect();
                Error::Argument(format!("unknown selector '{s}'; valid: {}", valid.join(", ")))
            })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PenaltyConfig {
    /// Slack constant, `c > 1`.
    pub c: f64,
    /// Confidence parameter, `0 < gamma < 1`.
    pub gamma: f64,
    pub selector: SelectorKind,
    /// Cap `K` on loading iterations.
    pub max_iterations: usize,
    /// Stop once no loading moves by more than this.
    pub tolerance: f64,
    /// Columns used for the initial residuals. `None` uses every all-ones
    /// column (the intercept) and nothing else.
    pub initial_set: Option<Vec<usize>>,
    /// Columns whose loading is forced to zero.
    pub unpenalized: Vec<usize>,
    pub solver: SolverOptions,
}

impl Default for PenaltyConfig {
    fn default() -> Self {
        PenaltyConfig {
            c: 1.1,
            gamma: 0.05,
            selector: SelectorKind::IteratedLasso,
            max_iterations: 15,
            tolerance: 1e-8,
            initial_set: None,
            unpenalized: Vec::new(),
            solver: SolverOptions::default(),
        }
    }
}

impl PenaltyConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.c > 1.0 && self.c.is_finite()) {
            return argument(format!("c must exceed 1, got {}", self.c));
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return argument(format!("gamma must lie in (0, 1), got {}", self.gamma));
        }
        if self.max_iterations < 1 {
            return argument("at least one loading iteration is required");
        }
        if !(self.tolerance >= 0.0) {
            return argument("loading tolerance must be nonnegative");
        }
        Ok(())
    }

    fn initial_columns(&self, x: &RealMatrix) -> Vec<usize> {
        match &self.initial_set {
            Some(set) => set.clone(),
            None => intercept_columns(x),
        }
    }
}

/// Every column whose entries are all exactly one.
pub fn intercept_columns(x: &RealMatrix) -> Vec<usize> {
    (0..x.ncols()).filter(|&j| is_constant_one_column(x, j)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadingEstimate {
    pub loadings: RealVector,
    pub lambda: f64,
    /// Number of loading updates performed.
    pub iterations: usize,
    /// Fit at the final loadings.
    pub fit: LassoFit,
    /// Largest absolute loading change at each update.
    pub history: Vec<f64>,
    /// The last change was within tolerance (rather than the cap ending the loop).
    pub converged: bool,
}

fn check_penalty_args(n: usize, p: usize, c: f64, gamma: f64) -> Result<()> {
    if n < 1 || p < 1 {
        return argument("penalty level needs n >= 1 and p >= 1");
    }
    if !(c > 1.0 && c.is_finite()) {
        return argument(format!("c must exceed 1, got {c}"));
    }
    if !(gamma > 0.0 && gamma < 1.0) {
        return argument(format!("gamma must lie in (0, 1), got {gamma}"));
    }
    Ok(())
}

/// `2 c sqrt(n) Phi^{-1}(1 - gamma / (2p))`.
pub fn lasso_lambda(n: usize, p: usize, c: f64, gamma: f64) -> Result<f64> {
    Ok(2.0 * sqrt_lasso_lambda(n, p, c, gamma)?)
}

/// `c sqrt(n) Phi^{-1}(1 - gamma / (2p))`.
pub fn sqrt_lasso_lambda(n: usize, p: usize, c: f64, gamma: f64) -> Result<f64> {
    check_penalty_args(n, p, c, gamma)?;
    let q = normal_quantile(1.0 - gamma / (2.0 * p as f64))?;
    Ok(c * (n as f64).sqrt() * q)
}

/// `sqrt(En[x_j^2 e^2])` for every column.
fn cross_moment_roots(x: &RealMatrix, e: &RealVector) -> RealVector {
    let n = x.nrows().max(1) as f64;
    let e2: Vec<f64> = e.iter().map(|v| v * v).collect();
    RealVector::from_iterator(
        x.ncols(),
        x.column_iter().map(|col| {
            let s: f64 = col.iter().zip(&e2).map(|(xi, ei)| xi * xi * ei).sum();
            (s / n).sqrt()
        }),
    )
}

/// `sqrt(En[x_j^2 r^2])` with `r` the residuals of OLS of `y` on `x[initial]`.
pub fn initial_loadings(x: &RealMatrix, y: &RealVector, initial: &[usize]) -> Result<RealVector> {
    let refit = post_lasso_refit(x, y, initial)?;
    Ok(cross_moment_roots(x, &refit.residuals))
}

/// `sqrt(En[x_j^2])`.
pub fn sqrt_lasso_homoscedastic_loadings(x: &RealMatrix) -> RealVector {
    column_mean_squares(x).map(f64::sqrt)
}

/// `2 (En[x_j^4])^(1/4)`.
pub fn sqrt_lasso_conservative_loadings(x: &RealMatrix) -> RealVector {
    let n = x.nrows().max(1) as f64;
    RealVector::from_iterator(
        x.ncols(),
        x.column_iter()
            .map(|c| 2.0 * (c.iter().map(|v| v.powi(4)).sum::<f64>() / n).powf(0.25)),
    )
}

/// Raises small loadings to `1e-6 * max_j l_j`; all-zero loadings become 1.
pub fn floor_loadings(loadings: &mut RealVector) {
    let max = loadings.iter().cloned().fold(0.0, f64::max);
    if max <= 0.0 {
        loadings.fill(1.0);
        return;
    }
    let floor = LOADING_FLOOR_RATIO * max;
    for l in loadings.iter_mut() {
        if *l < floor {
            *l = floor;
        }
    }
}

fn finalize_loadings(mut loadings: RealVector, config: &PenaltyConfig) -> RealVector {
    floor_loadings(&mut loadings);
    for &j in &config.unpenalized {
        if j < loadings.len() {
            loadings[j] = 0.0;
        }
    }
    loadings
}

fn check_inputs(design: &Design, y: &RealVector, lambda: f64, config: &PenaltyConfig) -> Result<()> {
    config.validate()?;
    if design.nrows() != y.len() {
        return argument(format!(
            "design has {} rows but response has length {}",
            design.nrows(),
            y.len()
        ));
    }
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return argument(format!("penalty level must be finite and >= 0, got {lambda}"));
    }
    Ok(())
}

#[derive(Clone, Copy)]
enum Update {
    /// `sqrt(En[x^2 e^2]) * sqrt(n / (n - s))`
    DofInflated,
    /// `sqrt(En[x^2 e^2]) / sqrt(En[e^2])`
    SelfNormalized,
}

fn iterate(
    design: &Design,
    y: &RealVector,
    lambda: f64,
    config: &PenaltyConfig,
    start: RealVector,
    objective: Objective,
    update: Update,
) -> Result<LoadingEstimate> {
    let x = design.matrix();
    let n = x.nrows();
    let mut loadings = finalize_loadings(start, config);
    let mut history = Vec::new();
    let mut converged = false;

    for _ in 0..=config.max_iterations {
        let problem = LassoProblem {
            design,
            response: y,
            lambda,
            loadings: loadings.clone(),
            objective,
        };
        let fit = solve(&problem, &config.solver)?;
        let refit = post_lasso_refit(x, y, &fit.support)?;
        let roots = cross_moment_roots(x, &refit.residuals);
        let raw = match update {
            Update::DofInflated => {
                let s = fit.support.len();
                if s >= n {
                    return estimation(format!(
                        "selected model with {s} columns leaves no degrees of freedom (n = {n})"
                    ));
                }
                roots * (n as f64 / (n - s) as f64).sqrt()
            }
            Update::SelfNormalized => {
                let ms = refit.residuals.norm_squared() / n as f64;
                let scale = y.norm_squared() / n as f64;
                if ms <= ZERO_RESIDUAL_RATIO * scale {
                    return estimation("post-fit residuals are identically zero");
                }
                roots / ms.sqrt()
            }
        };
        let next = finalize_loadings(raw, config);
        let change = (&next - &loadings).amax();
        history.push(change);
        loadings = next;
        if change <= config.tolerance {
            converged = true;
            break;
        }
    }

    let fit = solve(
        &LassoProblem {
            design,
            response: y,
            lambda,
            loadings: loadings.clone(),
            objective,
        },
        &config.solver,
    )?;
    Ok(LoadingEstimate {
        iterations: history.len(),
        loadings,
        lambda,
        fit,
        history,
        converged,
    })
}

/// Lasso loadings re-estimated from post-Lasso residuals, starting from the
/// residuals of the initial set.
pub fn iterate_loadings_lasso(
    design: &Design,
    y: &RealVector,
    lambda: f64,
    config: &PenaltyConfig,
) -> Result<LoadingEstimate> {
    check_inputs(design, y, lambda, config)?;
    let start = initial_loadings(design.matrix(), y, &config.initial_columns(design.matrix()))?;
    iterate(design, y, lambda, config, start, Objective::Lasso, Update::DofInflated)
}

/// Square-root Lasso loadings re-estimated from post-fit residuals, starting
/// from the conservative loadings.
pub fn iterate_loadings_sqrt(
    design: &Design,
    y: &RealVector,
    lambda: f64,
    config: &PenaltyConfig,
) -> Result<LoadingEstimate> {
    check_inputs(design, y, lambda, config)?;
    let start = sqrt_lasso_conservative_loadings(design.matrix());
    iterate(design, y, lambda, config, start, Objective::SqrtLasso, Update::SelfNormalized)
}

fn fixed_loadings(
    design: &Design,
    y: &RealVector,
    lambda: f64,
    config: &PenaltyConfig,
    raw: RealVector,
) -> Result<LoadingEstimate> {
    check_inputs(design, y, lambda, config)?;
    let loadings = finalize_loadings(raw, config);
    let fit = solve(
        &LassoProblem {
            design,
            response: y,
            lambda,
            loadings: loadings.clone(),
            objective: Objective::SqrtLasso,
        },
        &config.solver,
    )?;
    Ok(LoadingEstimate {
        loadings,
        lambda,
        iterations: 0,
        fit,
        history: Vec::new(),
        converged: true,
    })
}

/// Runs the configured feasible Lasso of `y` on the design, with the plug-in
/// penalty level for `n = rows` and `p = columns`.
pub fn feasible_lasso(design: &Design, y: &RealVector, config: &PenaltyConfig) -> Result<LoadingEstimate> {
    config.validate()?;
    let (n, p) = (design.nrows(), design.ncols());
    match config.selector {
        SelectorKind::IteratedLasso => {
            let lambda = lasso_lambda(n, p, config.c, config.gamma)?;
            iterate_loadings_lasso(design, y, lambda, config)
        }
        SelectorKind::SqrtLassoIterated => {
            let lambda = sqrt_lasso_lambda(n, p, config.c, config.gamma)?;
            iterate_loadings_sqrt(design, y, lambda, config)
        }
        SelectorKind::SqrtLassoHomoscedastic => {
            let lambda = sqrt_lasso_lambda(n, p, config.c, config.gamma)?;
            fixed_loadings(design, y, lambda, config, sqrt_lasso_homoscedastic_loadings(design.matrix()))
        }
        SelectorKind::SqrtLassoConservative => {
            let lambda = sqrt_lasso_lambda(n, p, config.c, config.gamma)?;
            fixed_loadings(design, y, lambda, config, sqrt_lasso_conservative_loadings(design.matrix()))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lasso::solve_lasso;
    use crate::numerics::{normal_cdf, RngStream};
    use approx::assert_abs_diff_eq;

    /// Quantile by bisection on the distribution function.
    fn quantile_oracle(p: f64) -> f64 {
        let (mut lo, mut hi) = (-10.0, 10.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if normal_cdf(mid) < p {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn lambda_reference_values() {
        let l = lasso_lambda(100, 200, 1.1, 0.05).unwrap();
        assert!((l - 22.0 * quantile_oracle(0.999875)).abs() < 1e-2);
        assert!((l - 80.571).abs() < 1e-2);
        let small = lasso_lambda(1, 1, 1.1, 0.5).unwrap();
        assert!((small - 2.2 * quantile_oracle(0.75)).abs() < 1e-3);
        assert!((small - 1.4839).abs() < 1e-3);
        let s = sqrt_lasso_lambda(100, 200, 1.1, 0.05).unwrap();
        assert!((s - 40.286).abs() < 1e-2);
    }

    #[test]
    fn lambda_identities() {
        for &(n, p, c, g) in &[(100, 200, 1.1, 0.05), (7, 3, 1.5, 0.2), (5000, 13, 2.0, 0.01)] {
            let l = lasso_lambda(n, p, c, g).unwrap();
            let s = sqrt_lasso_lambda(n, p, c, g).unwrap();
            assert_eq!(s, l / 2.0);
            assert_eq!(lasso_lambda(n, 2 * p, c, 2.0 * g).unwrap(), l);
            assert_eq!(sqrt_lasso_lambda(n, p, 2.0 * c, g).unwrap(), 2.0 * s);
        }
        assert!(lasso_lambda(10, 10, 1.0, 0.05).is_err());
        assert!(lasso_lambda(10, 10, 1.1, 1.0).is_err());
        assert!(lasso_lambda(0, 10, 1.1, 0.05).is_err());
    }

    #[test]
    fn selector_names_round_trip() {
        for k in SelectorKind::ALL {
            assert_eq!(k.name().parse::<SelectorKind>().unwrap(), k);
        }
        assert!("lasso".parse::<SelectorKind>().is_err());
    }

    #[test]
    fn simple_loading_formulas() {
        let x = RealMatrix::from_column_slice(2, 3, &[3.0, 4.0, 1.0, -1.0, 0.0, 0.0]);
        let h = sqrt_lasso_homoscedastic_loadings(&x);
        assert_abs_diff_eq!(h[0], 12.5f64.sqrt(), epsilon = 1e-15);
        assert_eq!(h[1], 1.0);
        assert_eq!(h[2], 0.0);
        let c = sqrt_lasso_conservative_loadings(&x);
        assert_eq!(c[1], 2.0);
        assert_eq!(c[2], 0.0);

        let mut floored = c.clone();
        floor_loadings(&mut floored);
        assert!(floored[2] > 0.0);
        assert_abs_diff_eq!(floored[2], LOADING_FLOOR_RATIO * c.max(), epsilon = 1e-20);
        let mut zeros = RealVector::zeros(3);
        floor_loadings(&mut zeros);
        assert_eq!(zeros, RealVector::repeat(3, 1.0));
    }

    #[test]
    fn conservative_loading_normal_column() {
        let mut s = RngStream::new(11, 0);
        let x = RealMatrix::from_fn(10_000, 1, |_, _| s.normal());
        let c = sqrt_lasso_conservative_loadings(&x);
        assert!((c[0] - 2.0 * 3f64.powf(0.25)).abs() < 0.05);
    }

    #[test]
    fn initial_loadings_cases() {
        // Intercept only: loading of the ones column is the population SD of y.
        let y = RealVector::from_vec(vec![1.0, 2.0, 4.0, 7.0]);
        let x = RealMatrix::from_column_slice(4, 2, &[1.0, 1.0, 1.0, 1.0, 0.5, -1.0, 2.0, 0.0]);
        let l = initial_loadings(&x, &y, &[0]).unwrap();
        let mean = 3.5;
        let sd = (y.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / 4.0).sqrt();
        assert_abs_diff_eq!(l[0], sd, epsilon = 1e-14);
        // Hand arithmetic for the second column: residuals (-2.5, -1.5, 0.5, 3.5).
        let hand = ((0.25 * 6.25 + 1.0 * 2.25 + 4.0 * 0.25 + 0.0) / 4.0f64).sqrt();
        assert_abs_diff_eq!(l[1], hand, epsilon = 1e-14);

        // n = 5, p = 2 with an explicit two-column initial set.
        let x = RealMatrix::from_column_slice(5, 2, &[1.0, 1.0, 1.0, 1.0, 1.0, 0.0, 1.0, 2.0, 3.0, 4.0]);
        let y = RealVector::from_vec(vec![1.0, 3.0, 2.0, 5.0, 4.0]);
        // OLS line: slope 0.8, intercept 1.4 -> residuals (-0.4, 0.8, -1.0, 1.2, -0.6).
        let r = [-0.4, 0.8, -1.0, 1.2, -0.6];
        let l = initial_loadings(&x, &y, &[0, 1]).unwrap();
        let l0 = (r.iter().map(|v| v * v).sum::<f64>() / 5.0).sqrt();
        let l1 = (r.iter().enumerate().map(|(i, v)| (i * i) as f64 * v * v).sum::<f64>() / 5.0).sqrt();
        assert_abs_diff_eq!(l[0], l0, epsilon = 1e-12);
        assert_abs_diff_eq!(l[1], l1, epsilon = 1e-12);

        // y spanned by the initial set: all loadings vanish.
        let y = x.column(0) * 2.0 + x.column(1) * 0.5;
        let l = initial_loadings(&x, &y, &[0, 1]).unwrap();
        assert!(l.amax() < 1e-12);
    }

    fn toy_design(seed: u64, n: usize, p: usize, sigma: f64) -> (Design, RealVector) {
        let mut s = RngStream::new(seed, 0);
        let x = RealMatrix::from_fn(n, p, |_, _| s.normal());
        let mut y = RealVector::from_fn(n, |_, _| sigma * s.normal());
        y.axpy(1.0, &x.column(0).into_owned(), 1.0);
        y.axpy(-0.5, &x.column(1).into_owned(), 1.0);
        (Design::new(x).unwrap(), y)
    }

    #[test]
    fn single_update_matches_hand_trace() {
        let (design, y) = toy_design(5, 60, 10, 1.0);
        let config = PenaltyConfig {
            tolerance: f64::INFINITY,
            ..Default::default()
        };
        let lambda = lasso_lambda(60, 10, 1.1, 0.05).unwrap();
        let est = iterate_loadings_lasso(&design, &y, lambda, &config).unwrap();
        assert_eq!(est.iterations, 1);
        assert!(est.converged);

        let x = design.matrix();
        let mut l0 = initial_loadings(x, &y, &[]).unwrap();
        floor_loadings(&mut l0);
        let fit = solve_lasso(
            &LassoProblem { design: &design, response: &y, lambda, loadings: l0, objective: Objective::Lasso },
            &SolverOptions::default(),
        )
        .unwrap();
        let refit = post_lasso_refit(x, &y, &fit.support).unwrap();
        let s = fit.support.len() as f64;
        let mut l1 = cross_moment_roots(x, &refit.residuals) * (60.0 / (60.0 - s)).sqrt();
        floor_loadings(&mut l1);
        assert_eq!(est.loadings, l1);
    }

    #[test]
    fn sqrt_single_update_and_ones_column() {
        let (design, y) = toy_design(6, 80, 6, 1.0);
        let mut x = design.into_matrix();
        x.column_mut(5).fill(1.0);
        let design = Design::new(x).unwrap();
        let lambda = sqrt_lasso_lambda(80, 6, 1.1, 0.05).unwrap();
        let config = PenaltyConfig {
            selector: SelectorKind::SqrtLassoIterated,
            tolerance: f64::INFINITY,
            ..Default::default()
        };
        let est = iterate_loadings_sqrt(&design, &y, lambda, &config).unwrap();
        assert_eq!(est.iterations, 1);
        assert_abs_diff_eq!(est.loadings[5], 1.0, epsilon = 1e-12);

        let full = iterate_loadings_sqrt(&design, &y, lambda, &PenaltyConfig::default()).unwrap();
        assert_abs_diff_eq!(full.loadings[5], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn dof_inflation_is_exact() {
        let (design, y) = toy_design(8, 50, 8, 0.7);
        let lambda = lasso_lambda(50, 8, 1.1, 0.05).unwrap();
        let config = PenaltyConfig { tolerance: f64::INFINITY, ..Default::default() };
        let est = iterate_loadings_lasso(&design, &y, lambda, &config).unwrap();
        let first = solve_lasso(
            &LassoProblem {
                design: &design,
                response: &y,
                lambda,
                loadings: {
                    let mut l = initial_loadings(design.matrix(), &y, &[]).unwrap();
                    floor_loadings(&mut l);
                    l
                },
                objective: Objective::Lasso,
            },
            &SolverOptions::default(),
        )
        .unwrap();
        let refit = post_lasso_refit(design.matrix(), &y, &first.support).unwrap();
        let roots = cross_moment_roots(design.matrix(), &refit.residuals);
        let factor = (50.0 / (50.0 - first.support.len() as f64)).sqrt();
        for j in 0..8 {
            assert_eq!(est.loadings[j], roots[j] * factor);
        }
    }

    #[test]
    fn history_and_determinism() {
        let (design, y) = toy_design(9, 100, 30, 1.0);
        let lambda = lasso_lambda(100, 30, 1.1, 0.05).unwrap();
        let config = PenaltyConfig::default();
        let a = iterate_loadings_lasso(&design, &y, lambda, &config).unwrap();
        let b = iterate_loadings_lasso(&design, &y, lambda, &config).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.history.len(), a.iterations);
        assert!(a.iterations <= config.max_iterations + 1);
        if a.iterations <= config.max_iterations {
            assert!(*a.history.last().unwrap() <= config.tolerance);
        }
        assert!(a.loadings.iter().all(|&l| l > 0.0));
    }

    #[test]
    fn homoscedastic_limits() {
        let (design, y) = toy_design(10, 2000, 20, 1.0);
        let lasso = feasible_lasso(&design, &y, &PenaltyConfig::default()).unwrap();
        let ms = column_mean_squares(design.matrix()).map(f64::sqrt);
        for j in 0..20 {
            assert!((lasso.loadings[j] - ms[j]).abs() <= 0.15, "lasso j={j}: {}", lasso.loadings[j]);
        }
        let config = PenaltyConfig { selector: SelectorKind::SqrtLassoIterated, ..Default::default() };
        let sqrt = feasible_lasso(&design, &y, &config).unwrap();
        for j in 0..20 {
            assert!((sqrt.loadings[j] - 1.0).abs() <= 0.15, "sqrt j={j}: {}", sqrt.loadings[j]);
        }
        assert_eq!(lasso.fit.support, vec![0, 1]);
        assert_eq!(sqrt.fit.support, vec![0, 1]);
    }

    #[test]
    fn unpenalized_columns_get_zero_loading() {
        let (design, y) = toy_design(12, 80, 10, 1.0);
        let config = PenaltyConfig { unpenalized: vec![3], ..Default::default() };
        let est = feasible_lasso(&design, &y, &config).unwrap();
        assert_eq!(est.loadings[3], 0.0);
        assert!(est.fit.support.contains(&3) || est.fit.beta[3] == 0.0);
        let r = &y - design.matrix() * &est.fit.beta;
        assert!((design.matrix().column(3).dot(&r) / 80.0).abs() <= 1e-7);
    }

    #[test]
    fn saturated_support_is_an_error() {
        // Tiny lambda with p > n selects too many columns for the correction.
        let (design, y) = toy_design(13, 10, 30, 1.0);
        let err = iterate_loadings_lasso(&design, &y, 1e-6, &PenaltyConfig::default());
        assert!(matches!(err, Err(Error::Estimation(_))));
    }

    #[test]
    fn sqrt_iteration_rejects_zero_residuals() {
        let (design, y) = toy_design(14, 10, 30, 1.0);
        let err = iterate_loadings_sqrt(&design, &y, 1e-8, &PenaltyConfig::default());
        assert!(matches!(err, Err(Error::Estimation(_))));
    }
}
