use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use super::linalg::{RealMatrix, RealVector};
use crate::error::{Error, Result};

/// A reproducible random stream identified by `(seed, index)`.
///
/// Backed by ChaCha20: the seed fixes the key and the index selects the
/// 64-bit stream nonce, so distinct indices give independent sequences
/// without any shared state. Normal variates use the ziggurat sampler of
/// `rand_distr::StandardNormal`.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    index: u64,
    rng: ChaCha20Rng,
}

impl RngStream {
    pub const ALGORITHM: &'static str = "chacha20-ziggurat";

    pub fn new(seed: u64, index: u64) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(index);
        RngStream { seed, index, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn index(&self) -> u64 {
        self.index
    }

    pub fn normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    pub fn fill_normal(&mut self, out: &mut [f64]) {
        for v in out {
            *v = self.rng.sample(StandardNormal);
        }
    }

    /// Uniform draw on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    /// Uniform integer in `0..bound`.
    pub fn below(&mut self, bound: usize) -> usize {
        self.rng.random_range(0..bound)
    }

    /// Fisher-Yates shuffle driven by this stream.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i + 1);
            items.swap(i, j);
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }
}

/// Lower-triangular `L` with `L L' = Σ`, `Σ_kj = rho^|k-j|`.
///
/// The AR(1) correlation matrix has the closed-form Cholesky factor
/// `L_i0 = rho^i`, `L_ij = rho^(i-j) sqrt(1 - rho^2)` for `1 <= j <= i`.
pub fn toeplitz_correlation_factor(p: usize, rho: f64) -> Result<RealMatrix> {
    if p == 0 {
        return Err(Error::Argument("dimension must be at least 1".into()));
    }
    if !(rho.abs() < 1.0) {
        return Err(Error::Domain(format!(
            "Toeplitz correlation requires |rho| < 1, got {rho}"
        )));
    }
    let tail = (1.0 - rho * rho).sqrt();
    let mut l = RealMatrix::zeros(p, p);
    for i in 0..p {
        l[(i, 0)] = rho.powi(i as i32);
        for j in 1..=i {
            l[(i, j)] = rho.powi((i - j) as i32) * tail;
        }
    }
    Ok(l)
}

/// `factor * z` with `z` a vector of independent standard normals drawn from
/// the stream.
pub fn sample_gaussian_vector(stream: &mut RngStream, factor: &RealMatrix) -> RealVector {
    let mut z = RealVector::zeros(factor.ncols());
    stream.fill_normal(z.as_mut_slice());
    factor * z
}

/// `rows` independent draws stacked as rows; identical to calling
/// [`sample_gaussian_vector`] once per row on the same stream.
pub fn sample_gaussian_rows(stream: &mut RngStream, factor: &RealMatrix, rows: usize) -> RealMatrix {
    let k = factor.ncols();
    // Row-major draw order, stored transposed so each column is one draw.
    let mut z = RealMatrix::zeros(k, rows);
    for i in 0..rows {
        stream.fill_normal(z.column_mut(i).as_mut_slice());
    }
    (factor * z).transpose()
}
