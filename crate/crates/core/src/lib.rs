//! Inference on a treatment effect after selecting among many controls.
//!
//! The estimator selects controls that predict the treatment and controls
//! that predict the outcome with a feasible Lasso, regresses the outcome on
//! the treatment and the union of both selections, and reports
//! heteroscedasticity-robust standard errors and confidence intervals.

pub mod diagnostics;
pub mod double_selection;
pub mod error;
pub mod lasso;
pub mod numerics;
pub mod penalty;
pub mod ridge;
pub mod simulation;

pub use error::{Error, Result};
