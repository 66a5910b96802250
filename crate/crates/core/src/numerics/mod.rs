//! Dense linear algebra, normal distribution functions and reproducible
//! random streams.

mod dist;
mod linalg;
mod rng;

pub use dist::{normal_cdf, normal_pdf, normal_quantile};
pub use linalg::{
    column_mean_squares, ensure_finite_matrix, ensure_finite_vector, is_constant_one_column,
    ols_fit, select_columns, OlsFit, RealMatrix, RealVector, RANK_TOLERANCE,
};
pub use rng::{sample_gaussian_rows, sample_gaussian_vector, toeplitz_correlation_factor, RngStream};
