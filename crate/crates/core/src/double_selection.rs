//! Treatment-effect estimation after selecting controls for both the
//! treatment and the outcome equation.

use serde::{Deserialize, Serialize};

use crate::error::{argument, estimation, Result};
use crate::lasso::Design;
use crate::numerics::{
    ensure_finite_matrix, ensure_finite_vector, normal_quantile, ols_fit, select_columns, RealMatrix,
    RealVector, RngStream, RANK_TOLERANCE,
};
use crate::penalty::{feasible_lasso, intercept_columns, PenaltyConfig};
use crate::ridge::{ridge_cv_fit, RidgeCvSpec};

/// Leverage at or above `1 - LEVERAGE_LIMIT` makes the jackknife undefined.
pub const LEVERAGE_LIMIT: f64 = 1e-10;

/// Smallest admissible `En[v^2]` for the treatment residuals.
pub const MIN_TREATMENT_VARIATION: f64 = 1e-12;

/// Picks the controls that predict a target.
pub trait ControlSelector {
    fn select(&self, design: &Design, target: &RealVector) -> Result<Vec<usize>>;
}

/// Support of the feasible Lasso configured by a [`PenaltyConfig`].
#[derive(Debug, Clone, PartialEq)]
pub struct FeasibleLasso {
    pub config: PenaltyConfig,
}

impl ControlSelector for FeasibleLasso {
    fn select(&self, design: &Design, target: &RealVector) -> Result<Vec<usize>> {
        if design.nrows() != target.len() {
            return argument(format!(
                "design has {} rows but target has length {}",
                design.nrows(),
                target.len()
            ));
        }
        if target.iter().all(|&v| v == 0.0) {
            return Ok(Vec::new());
        }
        Ok(feasible_lasso(design, target, &self.config)?.fit.support)
    }
}

/// Controls selected by the configured feasible Lasso of `target` on `x`.
pub fn select_controls(x: &RealMatrix, target: &RealVector, config: &PenaltyConfig) -> Result<Vec<usize>> {
    let design = Design::new(x.clone())?;
    FeasibleLasso { config: config.clone() }.select(&design, target)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectionSets {
    /// Controls that predict the treatment.
    pub treatment: Vec<usize>,
    /// Controls that predict the outcome.
    pub outcome: Vec<usize>,
    /// Controls forced into the final regression.
    pub amelioration: Vec<usize>,
    /// Sorted union of the three sets.
    pub union: Vec<usize>,
}

impl SelectionSets {
    pub fn new(treatment: Vec<usize>, outcome: Vec<usize>, amelioration: Vec<usize>) -> Self {
        let mut union: Vec<usize> = treatment
            .iter()
            .chain(&outcome)
            .chain(&amelioration)
            .copied()
            .collect();
        union.sort_unstable();
        union.dedup();
        SelectionSets { treatment, outcome, amelioration, union }
    }

    pub fn size(&self) -> usize {
        self.union.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lower: f64,
    pub upper: f64,
}

impl Interval {
    pub fn contains(&self, value: f64) -> bool {
        self.lower <= value && value <= self.upper
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TreatmentEffectEstimate {
    pub alpha_hat: f64,
    /// Coefficients on the controls, zero outside the selected union.
    pub beta_hat: RealVector,
    /// Square root of the sandwich variance; the standard error is this over `sqrt(n)`.
    pub sigma_plugin: f64,
    pub se_plugin: f64,
    /// HC3 standard error of `alpha_hat`.
    pub se_jackknife: f64,
    pub ci_plugin: Interval,
    pub ci_jackknife: Interval,
    pub level: f64,
    pub selection: SelectionSets,
    /// Residuals of the treatment on the selected controls.
    pub v_hat: RealVector,
    /// Outcome residuals scaled by `sqrt(n / (n - s - 1))`.
    pub zeta_hat: RealVector,
    pub n: usize,
    pub p: usize,
    /// The final regression design, or the treatment against some control,
    /// is exactly collinear.
    pub rank_deficient: bool,
}

/// `(En[v^2])^-1 En[v^2 z^2] (En[v^2])^-1`.
pub fn plugin_variance(v_hat: &RealVector, zeta_hat: &RealVector) -> Result<f64> {
    if v_hat.len() != zeta_hat.len() {
        return argument(format!(
            "residual vectors differ in length ({} vs {})",
            v_hat.len(),
            zeta_hat.len()
        ));
    }
    let n = v_hat.len();
    if n < 2 {
        return argument("plug-in variance needs at least two observations");
    }
    let nf = n as f64;
    let ev2 = v_hat.norm_squared() / nf;
    if ev2 <= 0.0 {
        return estimation("treatment residuals are identically zero");
    }
    let cross = v_hat
        .iter()
        .zip(zeta_hat.iter())
        .map(|(v, z)| v * v * z * z)
        .sum::<f64>()
        / nf;
    Ok(cross / (ev2 * ev2))
}

/// HC3 variance of coefficient `index` in the OLS of some response on `w`,
/// given that regression's residuals: the `index` diagonal entry of
/// `(W'W)^-1 W' diag(e_i^2 / (1 - h_i)^2) W (W'W)^-1`.
pub fn jackknife_variance(w: &RealMatrix, residuals: &RealVector, index: usize) -> Result<f64> {
    let (n, k) = w.shape();
    if residuals.len() != n {
        return argument(format!("design has {n} rows but {} residuals were given", residuals.len()));
    }
    if index >= k {
        return argument(format!("coefficient index {index} out of range for {k} columns"));
    }
    let svd = w.clone().svd(true, true);
    let u = svd.u.as_ref().expect("left singular vectors requested");
    let v_t = svd.v_t.as_ref().expect("right singular vectors requested");
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let tol = RANK_TOLERANCE * n.max(k) as f64 * smax;
    // Row `index` of the pseudo-inverse, and the hat diagonal.
    let mut a = RealVector::zeros(n);
    let mut h = RealVector::zeros(n);
    for (r, &s) in svd.singular_values.iter().enumerate() {
        if s <= tol {
            continue;
        }
        let weight = v_t[(r, index)] / s;
        for i in 0..n {
            let uir = u[(i, r)];
            a[i] += weight * uir;
            h[i] += uir * uir;
        }
    }
    let mut var = 0.0;
    for i in 0..n {
        if h[i] >= 1.0 - LEVERAGE_LIMIT {
            return estimation(format!("leverage one at observation {i}"));
        }
        let e = residuals[i] / (1.0 - h[i]);
        var += a[i] * a[i] * e * e;
    }
    Ok(var)
}

/// `alpha_hat -/+ q sigma / sqrt(n)` with `q` the two-sided normal quantile.
/// `sigma` is on the scale of the asymptotic standard deviation, not yet
/// divided by `sqrt(n)`.
pub fn confidence_interval(alpha_hat: f64, sigma: f64, n: usize, level: f64) -> Result<Interval> {
    if !(level > 0.0 && level < 1.0) {
        return argument(format!("confidence level must lie in (0, 1), got {level}"));
    }
    if n == 0 {
        return argument("confidence interval needs n >= 1");
    }
    let q = normal_quantile(1.0 - (1.0 - level) / 2.0)?;
    let half = q * sigma / (n as f64).sqrt();
    Ok(Interval { lower: alpha_hat - half, upper: alpha_hat + half })
}

fn check_inputs(y: &RealVector, d: &RealVector, x: &RealMatrix, level: f64) -> Result<()> {
    let n = x.nrows();
    if y.len() != n || d.len() != n {
        return argument(format!(
            "outcome ({}), treatment ({}) and controls ({n} rows) disagree in length",
            y.len(),
            d.len()
        ));
    }
    if n < 3 {
        return argument(format!("need at least 3 observations, got {n}"));
    }
    if !(level > 0.0 && level < 1.0) {
        return argument(format!("confidence level must lie in (0, 1), got {level}"));
    }
    ensure_finite_vector(y, "outcome")?;
    ensure_finite_vector(d, "treatment")?;
    ensure_finite_matrix(x, "controls")
}

fn check_indices(indices: &[usize], p: usize, what: &str) -> Result<()> {
    match indices.iter().find(|&&j| j >= p) {
        Some(j) => argument(format!("{what} index {j} out of range for {p} controls")),
        None => Ok(()),
    }
}

/// Amelioration set with every all-ones column added.
fn with_intercepts(x: &RealMatrix, amelioration: &[usize]) -> Vec<usize> {
    let mut set = amelioration.to_vec();
    set.extend(intercept_columns(x));
    set.sort_unstable();
    set.dedup();
    set
}

fn treatment_duplicates_a_control(d: &RealVector, x: &RealMatrix) -> bool {
    let dn = d.norm();
    if dn == 0.0 {
        return false;
    }
    x.column_iter().any(|c| {
        let cn = c.norm();
        cn > 0.0 && (c.dot(d).abs() / (cn * dn)) >= 1.0 - 1e-12
    })
}

/// OLS of `y` on `[d, x[union]]` plus both standard errors.
fn final_regression(
    y: &RealVector,
    d: &RealVector,
    x: &RealMatrix,
    selection: SelectionSets,
    level: f64,
) -> Result<TreatmentEffectEstimate> {
    let (n, p) = x.shape();
    let s = selection.size();
    if s + 1 >= n {
        return estimation(format!(
            "selected model exhausts sample ({s} controls plus the treatment with n = {n})"
        ));
    }
    let controls = select_columns(x, &selection.union);
    let mut w = RealMatrix::zeros(n, s + 1);
    w.set_column(0, d);
    w.view_mut((0, 1), (n, s)).copy_from(&controls);

    let treatment_fit = ols_fit(&controls, d)?;
    let v_hat = treatment_fit.residuals;
    if v_hat.norm_squared() / (n as f64) < MIN_TREATMENT_VARIATION {
        return estimation("treatment fully explained by selected controls");
    }

    let fit = ols_fit(&w, y)?;
    let alpha_hat = fit.coefficients[0];
    let mut beta_hat = RealVector::zeros(p);
    for (k, &j) in selection.union.iter().enumerate() {
        beta_hat[j] = fit.coefficients[k + 1];
    }
    let zeta_hat = &fit.residuals * (n as f64 / (n - s - 1) as f64).sqrt();
    let sigma_plugin = plugin_variance(&v_hat, &zeta_hat)?.sqrt();
    let se_jackknife = jackknife_variance(&w, &fit.residuals, 0)?.sqrt();
    let root_n = (n as f64).sqrt();
    if !(sigma_plugin > 0.0 && se_jackknife > 0.0) {
        return estimation("outcome residuals are identically zero; the variance is degenerate");
    }
    Ok(TreatmentEffectEstimate {
        alpha_hat,
        beta_hat,
        sigma_plugin,
        se_plugin: sigma_plugin / root_n,
        se_jackknife,
        ci_plugin: confidence_interval(alpha_hat, sigma_plugin, n, level)?,
        ci_jackknife: confidence_interval(alpha_hat, se_jackknife * root_n, n, level)?,
        level,
        rank_deficient: fit.is_rank_deficient() || treatment_duplicates_a_control(d, x),
        selection,
        v_hat,
        zeta_hat,
        n,
        p,
    })
}

/// Double selection with an arbitrary selector. Every all-ones column of `x`
/// joins the amelioration set.
pub fn post_double_selection_with(
    selector: &dyn ControlSelector,
    y: &RealVector,
    d: &RealVector,
    x: &RealMatrix,
    amelioration: &[usize],
    level: f64,
) -> Result<TreatmentEffectEstimate> {
    check_inputs(y, d, x, level)?;
    check_indices(amelioration, x.ncols(), "amelioration")?;
    let design = Design::new(x.clone())?;
    let treatment = selector.select(&design, d)?;
    let outcome = selector.select(&design, y)?;
    let selection = SelectionSets::new(treatment, outcome, with_intercepts(x, amelioration));
    final_regression(y, d, x, selection, level)
}

/// Select controls for `d` and for `y` with the feasible Lasso, then regress
/// `y` on `d` and the union of the selections and the amelioration set.
pub fn post_double_selection(
    y: &RealVector,
    d: &RealVector,
    x: &RealMatrix,
    amelioration: &[usize],
    config: &PenaltyConfig,
    level: f64,
) -> Result<TreatmentEffectEstimate> {
    config.validate()?;
    let selector = FeasibleLasso { config: config.clone() };
    post_double_selection_with(&selector, y, d, x, amelioration, level)
}

/// One feasible Lasso of `y` on `[d, x]` with `d` unpenalized, then OLS of
/// `y` on `d` and the selected controls (plus any all-ones column).
pub fn post_single_selection(
    y: &RealVector,
    d: &RealVector,
    x: &RealMatrix,
    config: &PenaltyConfig,
    level: f64,
) -> Result<TreatmentEffectEstimate> {
    config.validate()?;
    check_inputs(y, d, x, level)?;
    let (n, p) = x.shape();
    let mut joint = RealMatrix::zeros(n, p + 1);
    joint.set_column(0, d);
    joint.view_mut((0, 1), (n, p)).copy_from(x);
    let intercepts = intercept_columns(x);

    let mut initial: Vec<usize> = match &config.initial_set {
        Some(set) => set.iter().map(|j| j + 1).collect(),
        None => intercepts.iter().map(|j| j + 1).collect(),
    };
    initial.insert(0, 0);
    let mut unpenalized: Vec<usize> = config.unpenalized.iter().map(|j| j + 1).collect();
    unpenalized.push(0);
    let joint_config = PenaltyConfig {
        initial_set: Some(initial),
        unpenalized,
        ..config.clone()
    };
    let design = Design::new(joint)?;
    let selected: Vec<usize> = if y.iter().all(|&v| v == 0.0) {
        Vec::new()
    } else {
        feasible_lasso(&design, y, &joint_config)?.fit.support
    };
    let outcome: Vec<usize> = selected.into_iter().filter(|&j| j > 0).map(|j| j - 1).collect();
    let selection = SelectionSets::new(Vec::new(), outcome, intercepts);
    final_regression(y, d, x, selection, level)
}

/// Double selection on `[x, r]`, where `r` is the cross-validated ridge fit
/// of `d` on `x`. Selection indices refer to the augmented design, with the
/// ridge column at index `x.ncols()`.
pub fn post_double_selection_ridge(
    y: &RealVector,
    d: &RealVector,
    x: &RealMatrix,
    amelioration: &[usize],
    config: &PenaltyConfig,
    level: f64,
    cv: &RidgeCvSpec,
    stream: &mut RngStream,
) -> Result<TreatmentEffectEstimate> {
    config.validate()?;
    check_inputs(y, d, x, level)?;
    check_indices(amelioration, x.ncols(), "amelioration")?;
    let ridge = ridge_cv_fit(x, d, cv.folds, &cv.grid, stream)?;
    let mut augmented = x.clone().insert_column(x.ncols(), 0.0);
    augmented.set_column(x.ncols(), &ridge.fitted);
    post_double_selection(y, d, &augmented, amelioration, config, level)
}
