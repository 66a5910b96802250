//! Weighted-penalty Lasso and Square-root Lasso by cyclic coordinate descent.
//!
//! Both programs use the `En[.]` (sample mean) scaling:
//!
//! * Lasso: `En[(y - x'b)^2] + (lambda/n) sum_j l_j |b_j|`
//! * Square-root Lasso: `sqrt(En[(y - x'b)^2]) + (lambda/n) sum_j l_j |b_j|`
//!
//! A loading of exactly zero leaves that coefficient unpenalized. Columns are
//! used as given; the loadings carry any standardization.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{argument, Result};
use crate::numerics::{
    ensure_finite_matrix, ensure_finite_vector, ols_fit, select_columns, OlsFit, RealMatrix,
    RealVector,
};

/// A design matrix with a lazily computed `X'X / n`.
#[derive(Debug)]
pub struct Design {
    x: RealMatrix,
    gram: OnceLock<RealMatrix>,
}

impl Design {
    pub fn new(x: RealMatrix) -> Result<Self> {
        ensure_finite_matrix(&x, "design matrix")?;
        Ok(Design {
            x,
            gram: OnceLock::new(),
        })
    }

    pub fn matrix(&self) -> &RealMatrix {
        &self.x
    }

    pub fn into_matrix(self) -> RealMatrix {
        self.x
    }

    pub fn nrows(&self) -> usize {
        self.x.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.x.ncols()
    }

    /// `En[x x']`.
    pub fn gram(&self) -> &RealMatrix {
        self.gram.get_or_init(|| {
            let n = self.x.nrows().max(1) as f64;
            self.x.tr_mul(&self.x) / n
        })
    }
}

impl Clone for Design {
    fn clone(&self) -> Self {
        let gram = OnceLock::new();
        if let Some(g) = self.gram.get() {
            let _ = gram.set(g.clone());
        }
        Design {
            x: self.x.clone(),
            gram,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Objective {
    Lasso,
    SqrtLasso,
}

#[derive(Debug, Clone)]
pub struct LassoProblem<'a> {
    pub design: &'a Design,
    pub response: &'a RealVector,
    /// Penalty level on the `lambda / n` scale.
    pub lambda: f64,
    pub loadings: RealVector,
    pub objective: Objective,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    /// Bound on the KKT residual for a fit to count as converged.
    pub tolerance: f64,
    /// Sweeps stop once the largest coefficient move is below
    /// `coefficient_tolerance * (1 + max |b|)` and the KKT bound holds.
    pub coefficient_tolerance: f64,
    pub max_sweeps: usize,
    /// Above this many columns the solver streams inner products instead of
    /// precomputing `X'X`.
    pub gram_max_cols: usize,
    /// Square-root Lasso: residual RMS is floored at this multiple of the
    /// response RMS.
    pub residual_floor: f64,
    /// Record the objective after every sweep.
    pub record_objective: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tolerance: 1e-7,
            coefficient_tolerance: 1e-10,
            max_sweeps: 10_000,
            gram_max_cols: 1000,
            residual_floor: 1e-10,
            record_objective: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LassoFit {
    pub beta: RealVector,
    /// Indices of the nonzero coefficients, ascending.
    pub support: Vec<usize>,
    pub objective: f64,
    pub kkt_residual: f64,
    /// Full coordinate-descent sweeps performed.
    pub iterations: usize,
    pub converged: bool,
    /// Objective after each sweep, when requested.
    pub objective_trace: Vec<f64>,
}

fn support_of(beta: &RealVector) -> Vec<usize> {
    beta.iter()
        .enumerate()
        .filter(|(_, &b)| b != 0.0)
        .map(|(j, _)| j)
        .collect()
}

fn validate(problem: &LassoProblem<'_>) -> Result<()> {
    let (n, p) = (problem.design.nrows(), problem.design.ncols());
    if n == 0 || p == 0 {
        return argument("Lasso needs at least one observation and one column");
    }
    if problem.response.len() != n {
        return argument(format!(
            "design has {n} rows but response has length {}",
            problem.response.len()
        ));
    }
    if problem.loadings.len() != p {
        return argument(format!(
            "{} loadings supplied for {p} columns",
            problem.loadings.len()
        ));
    }
    ensure_finite_vector(problem.response, "response")?;
    ensure_finite_vector(&problem.loadings, "loadings")?;
    if problem.loadings.iter().any(|&l| l < 0.0) {
        return argument("penalty loadings must be nonnegative");
    }
    if !(problem.lambda >= 0.0 && problem.lambda.is_finite()) {
        return argument(format!("penalty level must be finite and >= 0, got {}", problem.lambda));
    }
    Ok(())
}

fn mean_square(v: &RealVector) -> f64 {
    v.norm_squared() / v.len().max(1) as f64
}

fn penalty(problem: &LassoProblem<'_>, beta: &RealVector) -> f64 {
    let n = problem.design.nrows() as f64;
    problem.lambda / n
        * beta
            .iter()
            .zip(problem.loadings.iter())
            .map(|(b, l)| l * b.abs())
            .sum::<f64>()
}

fn objective_from_rss(problem: &LassoProblem<'_>, beta: &RealVector, rss: f64, floor: f64) -> f64 {
    let fit_term = match problem.objective {
        Objective::Lasso => rss,
        Objective::SqrtLasso => rss.max(0.0).sqrt().max(floor),
    };
    fit_term + penalty(problem, beta)
}

fn floor_for(problem: &LassoProblem<'_>, options: &SolverOptions) -> f64 {
    options.residual_floor * mean_square(problem.response).sqrt()
}

/// Largest violation of the subgradient optimality conditions at `beta`.
///
/// For the Lasso the score is `2 En[x_j r]` against `(lambda/n) l_j`; for the
/// Square-root Lasso it is `En[x_j r] / sqrt(En[r^2])`. Inactive coordinates
/// may not exceed the penalty in absolute value, active ones must match it
/// with the coefficient's sign. Computed from scratch.
pub fn kkt_residual(problem: &LassoProblem<'_>, beta: &RealVector) -> f64 {
    kkt_with_floor(problem, beta, SolverOptions::default().residual_floor)
}

fn kkt_with_floor(problem: &LassoProblem<'_>, beta: &RealVector, floor_ratio: f64) -> f64 {
    let x = problem.design.matrix();
    let n = x.nrows() as f64;
    let residual = problem.response - x * beta;
    let scale = match problem.objective {
        Objective::Lasso => 2.0,
        Objective::SqrtLasso => {
            let floor = floor_ratio * mean_square(problem.response).sqrt();
            let sigma = mean_square(&residual).sqrt().max(floor);
            if sigma == 0.0 {
                return 0.0;
            }
            1.0 / sigma
        }
    };
    let score = x.tr_mul(&residual) * (scale / n);
    let mut worst: f64 = 0.0;
    for j in 0..beta.len() {
        let pen = problem.lambda / n * problem.loadings[j];
        let s = score[j];
        let violation = if beta[j] == 0.0 {
            (s.abs() - pen).max(0.0)
        } else {
            (s - pen * beta[j].signum()).abs()
        };
        worst = worst.max(violation);
    }
    worst
}

/// Solves the weighted Lasso program.
pub fn solve_lasso(problem: &LassoProblem<'_>, options: &SolverOptions) -> Result<LassoFit> {
    if problem.objective != Objective::Lasso {
        return argument("solve_lasso called on a square-root Lasso problem");
    }
    solve(problem, options)
}

/// Solves the weighted Square-root Lasso program.
pub fn solve_sqrt_lasso(problem: &LassoProblem<'_>, options: &SolverOptions) -> Result<LassoFit> {
    if problem.objective != Objective::SqrtLasso {
        return argument("solve_sqrt_lasso called on a Lasso problem");
    }
    solve(problem, options)
}

/// Dispatches on the problem's objective.
pub fn solve(problem: &LassoProblem<'_>, options: &SolverOptions) -> Result<LassoFit> {
    validate(problem)?;
    let p = problem.design.ncols();
    if problem.response.iter().all(|&v| v == 0.0) {
        let beta = RealVector::zeros(p);
        return Ok(LassoFit {
            objective: 0.0,
            kkt_residual: 0.0,
            support: Vec::new(),
            beta,
            iterations: 0,
            converged: true,
            objective_trace: Vec::new(),
        });
    }
    if p <= options.gram_max_cols {
        let state = CovarianceState::new(problem);
        coordinate_descent(problem, options, state)
    } else {
        let state = ResidualState::new(problem);
        coordinate_descent(problem, options, state)
    }
}

/// Per-coordinate view of the current residual.
trait CdState {
    /// `En[x_j r]` at the current coefficients.
    fn score(&self, j: usize) -> f64;
    /// Records `b_j += delta`; `score_j` is the score before the move.
    fn apply(&mut self, j: usize, delta: f64, score_j: f64);
    fn rss(&self) -> f64;
    /// Recomputes cached quantities exactly from `beta`.
    fn refresh(&mut self, beta: &RealVector);
    fn diag(&self, j: usize) -> f64;
}

struct CovarianceState<'a> {
    gram: &'a RealMatrix,
    xty: RealVector,
    yy: f64,
    /// `En[x_j r]` for every column.
    scores: RealVector,
    rss: f64,
}

impl<'a> CovarianceState<'a> {
    fn new(problem: &LassoProblem<'a>) -> Self {
        let x = problem.design.matrix();
        let n = x.nrows() as f64;
        let xty = x.tr_mul(problem.response) / n;
        let yy = mean_square(problem.response);
        CovarianceState {
            gram: problem.design.gram(),
            scores: xty.clone(),
            xty,
            yy,
            rss: yy,
        }
    }
}

impl CdState for CovarianceState<'_> {
    fn score(&self, j: usize) -> f64 {
        self.scores[j]
    }

    fn apply(&mut self, j: usize, delta: f64, score_j: f64) {
        self.scores.axpy(-delta, &self.gram.column(j), 1.0);
        self.rss += delta * (delta * self.gram[(j, j)] - 2.0 * score_j);
    }

    fn rss(&self) -> f64 {
        self.rss
    }

    fn refresh(&mut self, beta: &RealVector) {
        self.scores = &self.xty - self.gram * beta;
        // En[r^2] = En[y^2] - 2 b'c + b'Gb and b'Gb = b'c - b'(c - Gb).
        self.rss = (self.yy - beta.dot(&self.xty) - beta.dot(&self.scores)).max(0.0);
    }

    fn diag(&self, j: usize) -> f64 {
        self.gram[(j, j)]
    }
}

struct ResidualState<'a> {
    x: &'a RealMatrix,
    y: &'a RealVector,
    residual: RealVector,
    col_ms: Vec<f64>,
    rss: f64,
}

impl<'a> ResidualState<'a> {
    fn new(problem: &LassoProblem<'a>) -> Self {
        let x = problem.design.matrix();
        let n = x.nrows() as f64;
        ResidualState {
            x,
            y: problem.response,
            residual: problem.response.clone(),
            col_ms: x.column_iter().map(|c| c.norm_squared() / n).collect(),
            rss: mean_square(problem.response),
        }
    }
}

impl CdState for ResidualState<'_> {
    fn score(&self, j: usize) -> f64 {
        self.x.column(j).dot(&self.residual) / self.x.nrows() as f64
    }

    fn apply(&mut self, j: usize, delta: f64, score_j: f64) {
        self.residual.axpy(-delta, &self.x.column(j), 1.0);
        self.rss += delta * (delta * self.col_ms[j] - 2.0 * score_j);
    }

    fn rss(&self) -> f64 {
        self.rss
    }

    fn refresh(&mut self, beta: &RealVector) {
        self.residual = self.y - self.x * beta;
        self.rss = mean_square(&self.residual);
    }

    fn diag(&self, j: usize) -> f64 {
        self.col_ms[j]
    }
}

/// Soft threshold with a closed zero region: `|rho| <= t` maps to zero.
fn soft_threshold(rho: f64, t: f64) -> f64 {
    if rho.abs() <= t {
        0.0
    } else {
        rho - t * rho.signum()
    }
}

/// Exact minimizer over `b` of `sqrt(S0 - 2 rho b + g b^2) + t |b|`.
fn sqrt_lasso_coordinate(rho: f64, s0: f64, g: f64, t: f64) -> f64 {
    let s0 = s0.max(0.0);
    if rho.abs() <= t * s0.sqrt() {
        return 0.0;
    }
    if t == 0.0 || g <= t * t {
        return rho / g;
    }
    // Part of S0 not explained by this column.
    let unexplained = (s0 - rho * rho / g).max(0.0);
    let shrink = t * (unexplained * g / (g - t * t)).sqrt();
    (rho - rho.signum() * shrink) / g
}

fn coordinate_descent<S: CdState>(
    problem: &LassoProblem<'_>,
    options: &SolverOptions,
    mut state: S,
) -> Result<LassoFit> {
    let n = problem.design.nrows() as f64;
    let p = problem.design.ncols();
    let floor = floor_for(problem, options);
    let mut beta = RealVector::zeros(p);
    let mut trace = Vec::new();
    let mut converged = false;
    let mut sweeps = 0;

    while sweeps < options.max_sweeps {
        sweeps += 1;
        let mut max_move: f64 = 0.0;
        for j in 0..p {
            let g = state.diag(j);
            let current = beta[j];
            if g <= 0.0 {
                if current != 0.0 {
                    let s = state.score(j);
                    state.apply(j, -current, s);
                    beta[j] = 0.0;
                }
                continue;
            }
            let score = state.score(j);
            let rho = score + g * current;
            let updated = match problem.objective {
                Objective::Lasso => {
                    soft_threshold(rho, problem.lambda * problem.loadings[j] / (2.0 * n)) / g
                }
                Objective::SqrtLasso => {
                    let s0 = state.rss() + current * (2.0 * score + current * g);
                    let t = problem.lambda * problem.loadings[j] / n;
                    sqrt_lasso_coordinate(rho, s0, g, t)
                }
            };
            let delta = updated - current;
            if delta != 0.0 {
                state.apply(j, delta, score);
                beta[j] = updated;
                max_move = max_move.max(delta.abs());
            }
        }
        state.refresh(&beta);
        if options.record_objective {
            trace.push(objective_from_rss(problem, &beta, state.rss(), floor));
        }

        if problem.objective == Objective::SqrtLasso && state.rss().sqrt() < floor {
            converged = true;
            break;
        }
        if max_move <= options.coefficient_tolerance * (1.0 + beta.amax()) {
            if kkt_with_floor(problem, &beta, options.residual_floor) <= options.tolerance {
                converged = true;
                break;
            }
        }
    }

    let residual = problem.response - problem.design.matrix() * &beta;
    let rss = mean_square(&residual);
    Ok(LassoFit {
        objective: objective_from_rss(problem, &beta, rss, floor),
        kkt_residual: kkt_with_floor(problem, &beta, options.residual_floor),
        support: support_of(&beta),
        beta,
        iterations: sweeps,
        converged,
        objective_trace: trace,
    })
}

/// OLS of `y` on the columns of `x` listed in `support`. An empty support
/// yields zero fitted values and residuals equal to `y`.
pub fn post_lasso_refit(x: &RealMatrix, y: &RealVector, support: &[usize]) -> Result<OlsFit> {
    if let Some(&j) = support.iter().find(|&&j| j >= x.ncols()) {
        return argument(format!("support index {j} out of range for {} columns", x.ncols()));
    }
    ols_fit(&select_columns(x, support), y)
}
