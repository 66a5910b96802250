//! Browser bindings for the demo page in `www/`.
//!
//! Each exported function has a plain Rust counterpart returning
//! `doublesel::Result`, so the logic is testable off the browser.

use wasm_bindgen::prelude::*;

use doublesel::lasso::Design;
use doublesel::numerics::RngStream;
use doublesel::penalty::{feasible_lasso, lasso_lambda, sqrt_lasso_lambda, PenaltyConfig, SelectorKind};
use doublesel::simulation::{run_point, studentize, DesignSampler, DesignSpec, Estimator, SimulationOptions};

const MAX_REPS: usize = 5000;

fn js(e: doublesel::Error) -> JsError {
    JsError::new(&e.to_string())
}

/// `[lasso level, square-root Lasso level]`.
pub fn penalty_levels_impl(n: usize, p: usize, c: f64, gamma: f64) -> doublesel::Result<Vec<f64>> {
    Ok(vec![lasso_lambda(n, p, c, gamma)?, sqrt_lasso_lambda(n, p, c, gamma)?])
}

#[wasm_bindgen]
pub fn penalty_levels(n: usize, p: usize, c: f64, gamma: f64) -> Result<Vec<f64>, JsError> {
    penalty_levels_impl(n, p, c, gamma).map_err(js)
}

/// Controls chosen for the treatment equation of one design-1 draw.
#[wasm_bindgen]
#[derive(Debug, Clone)]
pub struct Selection {
    selected: Vec<u32>,
    loadings: Vec<f64>,
    lambda: f64,
    iterations: usize,
    converged: bool,
}

#[wasm_bindgen]
impl Selection {
    /// 1-based control indices, intercept excluded.
    pub fn selected(&self) -> Vec<u32> {
        self.selected.clone()
    }

    /// Final penalty loadings of the controls, intercept excluded.
    pub fn loadings(&self) -> Vec<f64> {
        self.loadings.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    #[wasm_bindgen(getter)]
    pub fn iterations(&self) -> usize {
        self.iterations
    }

    #[wasm_bindgen(getter)]
    pub fn converged(&self) -> bool {
        self.converged
    }
}

pub fn treatment_selection_impl(seed: u32, p: usize, r2_d: f64, selector: &str) -> doublesel::Result<Selection> {
    let selector: SelectorKind = selector.parse()?;
    let spec = DesignSpec { p, ..DesignSpec::new(1, 0.0, r2_d, seed as u64) };
    let draw = DesignSampler::new(&spec)?.draw(&mut RngStream::new(spec.seed, 0));
    let design = Design::new(draw.controls_with_intercept())?;
    let config = PenaltyConfig { selector, ..Default::default() };
    let est = feasible_lasso(&design, &draw.d, &config)?;
    Ok(Selection {
        selected: est.fit.support.iter().filter(|&&j| j > 0).map(|&j| j as u32).collect(),
        loadings: est.loadings.iter().skip(1).copied().collect(),
        lambda: est.lambda,
        iterations: est.iterations,
        converged: est.converged,
    })
}

#[wasm_bindgen]
pub fn treatment_selection(seed: u32, p: usize, r2_d: f64, selector: &str) -> Result<Selection, JsError> {
    treatment_selection_impl(seed, p, r2_d, selector).map_err(js)
}

/// Studentized statistics of post-Lasso and double selection on shared draws.
#[wasm_bindgen]
#[derive(Debug, Clone)]
pub struct Comparison {
    post_lasso: Vec<f64>,
    double_selection: Vec<f64>,
    ks_post_lasso: f64,
    ks_double_selection: f64,
    rejection_post_lasso: f64,
    rejection_double_selection: f64,
}

#[wasm_bindgen]
impl Comparison {
    pub fn post_lasso(&self) -> Vec<f64> {
        self.post_lasso.clone()
    }

    pub fn double_selection(&self) -> Vec<f64> {
        self.double_selection.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn ks_post_lasso(&self) -> f64 {
        self.ks_post_lasso
    }

    #[wasm_bindgen(getter)]
    pub fn ks_double_selection(&self) -> f64 {
        self.ks_double_selection
    }

    #[wasm_bindgen(getter)]
    pub fn rejection_post_lasso(&self) -> f64 {
        self.rejection_post_lasso
    }

    #[wasm_bindgen(getter)]
    pub fn rejection_double_selection(&self) -> f64 {
        self.rejection_double_selection
    }
}

pub fn compare_estimators_impl(
    design: u8,
    r2_y: f64,
    r2_d: f64,
    reps: usize,
    seed: u32,
) -> doublesel::Result<Comparison> {
    if !(2..=MAX_REPS).contains(&reps) {
        return Err(doublesel::Error::Argument(format!("replications must lie in 2..={MAX_REPS}, got {reps}")));
    }
    let spec = DesignSpec::new(design, r2_y, r2_d, seed as u64);
    let options = SimulationOptions::default();
    let (report, records) = run_point(&spec, reps, &[Estimator::PostLasso, Estimator::DoubleSelection], &options)?;
    let pl = studentize(&records, 0, spec.alpha0, options.se)?;
    let ds = studentize(&records, 1, spec.alpha0, options.se)?;
    Ok(Comparison {
        post_lasso: pl.samples,
        double_selection: ds.samples,
        ks_post_lasso: pl.ks,
        ks_double_selection: ds.ks,
        rejection_post_lasso: report.estimators[0].rejection_rate,
        rejection_double_selection: report.estimators[1].rejection_rate,
    })
}

#[wasm_bindgen]
pub fn compare_estimators(design: u8, r2_y: f64, r2_d: f64, reps: usize, seed: u32) -> Result<Comparison, JsError> {
    compare_estimators_impl(design, r2_y, r2_d, reps, seed).map_err(js)
}
