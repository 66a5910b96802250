//! Sparse eigenvalues of a Gram matrix and distance of a sample to the
//! standard normal.

use serde::{Deserialize, Serialize};

use crate::error::{argument, Error, Result};
use crate::numerics::{normal_cdf, RealMatrix};

pub const DEFAULT_SUBSET_CAP: u128 = 200_000;

/// Tolerance for symmetry and positive semi-definiteness, relative to the
/// largest absolute entry (or 1 if that is smaller).
const PSD_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SparseEigMethod {
    /// Every size-`m` principal submatrix was examined.
    ExactEnumeration,
    /// `m = p`: the extremes of the full spectrum.
    FullSpectrum,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseEigReport {
    pub m: usize,
    pub phi_min: f64,
    pub phi_max: f64,
    pub method: SparseEigMethod,
    pub subsets_examined: u128,
}

/// `C(p, m)`, saturating at `u128::MAX`.
pub fn binomial(p: usize, m: usize) -> u128 {
    if m > p {
        return 0;
    }
    let m = m.min(p - m);
    let mut acc: u128 = 1;
    for i in 0..m {
        // acc * (p - i) / (i + 1) stays integral at every step.
        acc = match acc.checked_mul((p - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

fn extreme_eigenvalues(m: &RealMatrix) -> (f64, f64) {
    if m.nrows() == 1 {
        let v = m[(0, 0)];
        return (v, v);
    }
    let eig = m.clone().symmetric_eigenvalues();
    let lo = eig.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = eig.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    (lo, hi)
}

/// Advances `idx` to the next size-`idx.len()` subset of `0..p` in
/// lexicographic order. Returns `false` after the last one.
fn next_combination(idx: &mut [usize], p: usize) -> bool {
    let m = idx.len();
    let mut i = m;
    while i > 0 {
        i -= 1;
        if idx[i] < p - m + i {
            idx[i] += 1;
            for k in i + 1..m {
                idx[k] = idx[k - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Minimal and maximal `m`-sparse eigenvalues of a symmetric positive
/// semi-definite matrix, by enumerating every size-`m` support. Fails with a
/// capacity error when `C(p, m)` exceeds `cap`.
pub fn sparse_eigenvalues(matrix: &RealMatrix, m: usize, cap: u128) -> Result<SparseEigReport> {
    let p = matrix.nrows();
    if matrix.ncols() != p || p == 0 {
        return argument(format!("expected a nonempty square matrix, got {}x{}", p, matrix.ncols()));
    }
    if m < 1 || m > p {
        return argument(format!("sparsity m must lie in [1, {p}], got {m}"));
    }
    if matrix.iter().any(|v| !v.is_finite()) {
        return argument("matrix contains non-finite entries");
    }
    let scale = matrix.amax().max(1.0);
    if (matrix - matrix.transpose()).amax() > PSD_TOLERANCE * scale {
        return argument("matrix is not symmetric");
    }
    let subsets = binomial(p, m);
    if subsets > cap {
        return Err(Error::Capacity { p, m, subsets, cap });
    }
    let symmetric = (matrix + matrix.transpose()) * 0.5;
    let (full_min, full_max) = extreme_eigenvalues(&symmetric);
    if full_min < -PSD_TOLERANCE * scale {
        return argument(format!("matrix is not positive semi-definite (eigenvalue {full_min:e})"));
    }

    let (lo, hi, method) = if m == p {
        (full_min, full_max, SparseEigMethod::FullSpectrum)
    } else {
        let mut idx: Vec<usize> = (0..m).collect();
        let mut sub = RealMatrix::zeros(m, m);
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        loop {
            for (a, &i) in idx.iter().enumerate() {
                for (b, &j) in idx.iter().enumerate() {
                    sub[(a, b)] = symmetric[(i, j)];
                }
            }
            let (l, h) = extreme_eigenvalues(&sub);
            lo = lo.min(l);
            hi = hi.max(h);
            if !next_combination(&mut idx, p) {
                break;
            }
        }
        (lo, hi, SparseEigMethod::ExactEnumeration)
    };
    Ok(SparseEigReport {
        m,
        phi_min: lo.max(0.0),
        phi_max: hi.max(0.0),
        method,
        subsets_examined: subsets,
    })
}

/// `sup_t |F_n(t) - Phi(t)|` for the empirical distribution of `samples`.
pub fn ks_distance_to_normal(samples: &[f64]) -> Result<f64> {
    if samples.len() < 2 {
        return argument(format!("need at least 2 samples, got {}", samples.len()));
    }
    if samples.iter().any(|v| !v.is_finite()) {
        return argument("samples contain non-finite values");
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        // Treat ties as one jump of the empirical distribution.
        let mut j = i;
        while j + 1 < sorted.len() && sorted[j + 1] == sorted[i] {
            j += 1;
        }
        let f = normal_cdf(sorted[i]);
        d = d.max(f - i as f64 / n).max((j + 1) as f64 / n - f);
        i = j + 1;
    }
    Ok(d)
}
