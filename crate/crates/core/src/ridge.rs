//! Ridge regression with the penalty chosen by K-fold cross-validation.

use crate::error::{argument, Result};
use crate::numerics::{is_constant_one_column, select_columns, RealMatrix, RealVector, RngStream};

/// Eigenvalues below this fraction of the largest are dropped when `kappa = 0`.
const PINV_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct RidgeCvSpec {
    pub folds: usize,
    /// Candidate values of `kappa`; the penalty is `kappa * n_train`.
    pub grid: Vec<f64>,
}

impl Default for RidgeCvSpec {
    fn default() -> Self {
        RidgeCvSpec {
            folds: 10,
            grid: default_ridge_grid(),
        }
    }
}

/// 25 points log-spaced over `[1e-4, 1e4]`.
pub fn default_ridge_grid() -> Vec<f64> {
    (0..25).map(|k| 10f64.powf(-4.0 + k as f64 / 3.0)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct RidgeCvFit {
    /// In-sample fitted values at the selected penalty.
    pub fitted: RealVector,
    pub kappa: f64,
    /// Cross-validated mean squared error per grid point, in grid order.
    pub cv_error: Vec<f64>,
}

/// Coefficients along the ridge path, `coef(mu) = basis * (proj / (eig + mu))`.
struct RidgePath {
    basis: RealMatrix,
    eig: RealVector,
    proj: RealVector,
}

impl RidgePath {
    /// Uses the eigensystem of `x'x` when `p <= n` and of `x x'` otherwise.
    fn new(x: &RealMatrix, y: &RealVector) -> Self {
        let (n, p) = x.shape();
        if p <= n {
            let eig = (x.transpose() * x).symmetric_eigen();
            let proj = eig.eigenvectors.transpose() * (x.transpose() * y);
            RidgePath { basis: eig.eigenvectors, eig: eig.eigenvalues, proj }
        } else {
            let eig = (x * x.transpose()).symmetric_eigen();
            let proj = eig.eigenvectors.transpose() * y;
            RidgePath { basis: x.transpose() * eig.eigenvectors, eig: eig.eigenvalues, proj }
        }
    }

    fn weights(&self, mu: f64) -> RealVector {
        let cut = PINV_TOLERANCE * self.eig.iter().cloned().fold(0.0, f64::max);
        RealVector::from_iterator(
            self.eig.len(),
            self.eig.iter().zip(self.proj.iter()).map(|(&l, &b)| {
                let l = l.max(0.0);
                if mu == 0.0 && l <= cut {
                    0.0
                } else {
                    b / (l + mu)
                }
            }),
        )
    }
}

/// Centering applied when the design carries an intercept column.
struct Centered {
    x: RealMatrix,
    y: RealVector,
    x_mean: RealVector,
    y_mean: f64,
}

fn center(x: &RealMatrix, y: &RealVector, penalized: &[usize], intercept: bool) -> Centered {
    let n = x.nrows() as f64;
    let mut xc = RealMatrix::zeros(x.nrows(), penalized.len());
    let mut x_mean = RealVector::zeros(penalized.len());
    for (k, &j) in penalized.iter().enumerate() {
        let col = x.column(j);
        let m = if intercept { col.sum() / n } else { 0.0 };
        x_mean[k] = m;
        xc.set_column(k, &col.map(|v| v - m));
    }
    let y_mean = if intercept { y.sum() / n } else { 0.0 };
    Centered { x: xc, y: y.map(|v| v - y_mean), x_mean, y_mean }
}

fn rows(x: &RealMatrix, idx: &[usize]) -> RealMatrix {
    RealMatrix::from_fn(idx.len(), x.ncols(), |i, j| x[(idx[i], j)])
}

fn subvec(y: &RealVector, idx: &[usize]) -> RealVector {
    RealVector::from_iterator(idx.len(), idx.iter().map(|&i| y[i]))
}

/// Ridge fit of `y` on `x` with `kappa` chosen by `folds`-fold
/// cross-validation over `grid`. The penalty on the training fold is
/// `kappa * n_train`. All-ones columns are left unpenalized by centering.
/// Ties in cross-validated error go to the earliest grid entry.
pub fn ridge_cv_fit(
    x: &RealMatrix,
    y: &RealVector,
    folds: usize,
    grid: &[f64],
    stream: &mut RngStream,
) -> Result<RidgeCvFit> {
    let (n, p) = x.shape();
    if y.len() != n {
        return argument(format!("design has {n} rows but response has length {}", y.len()));
    }
    if folds < 2 || folds > n {
        return argument(format!("fold count must lie in [2, {n}], got {folds}"));
    }
    if grid.is_empty() {
        return argument("ridge penalty grid is empty");
    }
    if let Some(k) = grid.iter().find(|k| !(**k >= 0.0 && k.is_finite())) {
        return argument(format!("ridge penalties must be finite and >= 0, got {k}"));
    }
    let intercept = (0..p).any(|j| is_constant_one_column(x, j));
    let penalized: Vec<usize> = (0..p).filter(|&j| !is_constant_one_column(x, j)).collect();

    let mut order: Vec<usize> = (0..n).collect();
    stream.shuffle(&mut order);
    let mut fold_of = vec![0; n];
    for (i, &row) in order.iter().enumerate() {
        fold_of[row] = i % folds;
    }

    let mut sse = vec![0.0; grid.len()];
    for f in 0..folds {
        let train: Vec<usize> = (0..n).filter(|&i| fold_of[i] != f).collect();
        let test: Vec<usize> = (0..n).filter(|&i| fold_of[i] == f).collect();
        let c = center(&rows(x, &train), &subvec(y, &train), &penalized, intercept);
        let path = RidgePath::new(&c.x, &c.y);
        let x_test = rows(&select_columns(x, &penalized), &test);
        let mut x_test_c = x_test;
        for (k, m) in c.x_mean.iter().enumerate() {
            x_test_c.column_mut(k).add_scalar_mut(-m);
        }
        let projected = &x_test_c * &path.basis;
        let y_test = subvec(y, &test);
        for (g, &kappa) in grid.iter().enumerate() {
            let pred = &projected * path.weights(kappa * train.len() as f64);
            sse[g] += pred
                .iter()
                .zip(y_test.iter())
                .map(|(pr, yt)| (yt - c.y_mean - pr).powi(2))
                .sum::<f64>();
        }
    }
    let cv_error: Vec<f64> = sse.iter().map(|s| s / n as f64).collect();
    let mut best = 0;
    for g in 1..grid.len() {
        if cv_error[g] < cv_error[best] {
            best = g;
        }
    }
    let kappa = grid[best];
    let c = center(x, y, &penalized, intercept);
    let path = RidgePath::new(&c.x, &c.y);
    let coef = &path.basis * path.weights(kappa * n as f64);
    let fitted = (&c.x * coef).add_scalar(c.y_mean);
    Ok(RidgeCvFit { fitted, kappa, cv_error })
}
