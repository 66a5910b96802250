use nalgebra::{DMatrix, DVector, SVD};

use crate::error::{argument, Result};

pub type RealMatrix = DMatrix<f64>;
pub type RealVector = DVector<f64>;

/// Relative cut-off for treating a singular value (or pivot) as zero.
pub const RANK_TOLERANCE: f64 = 1e-12;

/// Least-squares fit of `y` on the columns of a design matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct OlsFit {
    pub coefficients: RealVector,
    pub fitted: RealVector,
    pub residuals: RealVector,
    /// Diagonal of the hat matrix.
    pub leverage: RealVector,
    pub rank: usize,
}

impl OlsFit {
    pub fn is_rank_deficient(&self) -> bool {
        self.rank < self.coefficients.len()
    }

    fn empty(y: &RealVector) -> Self {
        let n = y.len();
        OlsFit {
            coefficients: RealVector::zeros(0),
            fitted: RealVector::zeros(n),
            residuals: y.clone(),
            leverage: RealVector::zeros(n),
            rank: 0,
        }
    }
}

pub fn ensure_finite_matrix(x: &RealMatrix, what: &str) -> Result<()> {
    if x.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        argument(format!("{what} contains non-finite entries"))
    }
}

pub fn ensure_finite_vector(x: &RealVector, what: &str) -> Result<()> {
    if x.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        argument(format!("{what} contains non-finite entries"))
    }
}

/// `En[x_j^2]` for every column.
pub fn column_mean_squares(x: &RealMatrix) -> RealVector {
    let n = x.nrows().max(1) as f64;
    RealVector::from_iterator(
        x.ncols(),
        x.column_iter().map(|c| c.norm_squared() / n),
    )
}

pub fn is_constant_one_column(x: &RealMatrix, j: usize) -> bool {
    x.nrows() > 0 && x.column(j).iter().all(|&v| v == 1.0)
}

/// Copies the listed columns, in order, into a new matrix.
pub fn select_columns(x: &RealMatrix, columns: &[usize]) -> RealMatrix {
    let mut out = RealMatrix::zeros(x.nrows(), columns.len());
    for (k, &j) in columns.iter().enumerate() {
        out.set_column(k, &x.column(j));
    }
    out
}

/// Ordinary least squares of `y` on `x`.
///
/// Uses a Householder QR with column-norm pivoting. When a pivot falls below
/// `max(rows, cols) * |R_00| * 1e-12` the design is treated as rank deficient
/// and the minimum-norm solution is taken from an SVD instead; fitted values
/// are the orthogonal projection onto the column space in both cases.
pub fn ols_fit(x: &RealMatrix, y: &RealVector) -> Result<OlsFit> {
    if x.nrows() != y.len() {
        return argument(format!(
            "design has {} rows but response has length {}",
            x.nrows(),
            y.len()
        ));
    }
    if x.nrows() == 0 {
        return argument("least squares needs at least one observation");
    }
    if x.ncols() == 0 {
        return Ok(OlsFit::empty(y));
    }
    let qr = PivotedQr::new(x);
    if qr.rank() == x.ncols() {
        Ok(qr.fit(y))
    } else {
        Ok(svd_fit(x, y))
    }
}

fn svd_fit(x: &RealMatrix, y: &RealVector) -> OlsFit {
    let (n, p) = x.shape();
    let svd = SVD::new(x.clone(), true, true);
    let u = svd.u.as_ref().expect("u requested");
    let v_t = svd.v_t.as_ref().expect("v_t requested");
    let sigma_max = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let tol = n.max(p) as f64 * sigma_max * RANK_TOLERANCE;

    let mut coefficients = RealVector::zeros(p);
    let mut fitted = RealVector::zeros(n);
    let mut leverage = RealVector::zeros(n);
    let mut rank = 0;
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if s <= tol {
            continue;
        }
        rank += 1;
        let uk = u.column(k);
        let proj = uk.dot(y);
        fitted.axpy(proj, &uk, 1.0);
        coefficients.axpy(proj / s, &v_t.row(k).transpose(), 1.0);
        for i in 0..n {
            leverage[i] += uk[i] * uk[i];
        }
    }
    let residuals = y - &fitted;
    OlsFit {
        coefficients,
        fitted,
        residuals,
        leverage,
        rank,
    }
}

/// Householder QR with Businger-Golub column pivoting.
struct PivotedQr {
    /// Householder vectors below the diagonal, R on and above it.
    packed: RealMatrix,
    /// Scaling `2 / v'v` for each reflector (0 for an identity step).
    tau: Vec<f64>,
    r_diag: Vec<f64>,
    perm: Vec<usize>,
}

impl PivotedQr {
    fn new(x: &RealMatrix) -> Self {
        let (n, p) = x.shape();
        let steps = n.min(p);
        let mut a = x.clone();
        let mut perm: Vec<usize> = (0..p).collect();
        let mut tau = vec![0.0; steps];
        let mut r_diag = vec![0.0; steps];

        for k in 0..steps {
            // Exact trailing norms: the designs here are small and downdating
            // loses accuracy exactly where rank decisions are made.
            let (pivot, _) = (k..p)
                .map(|j| (j, a.view((k, j), (n - k, 1)).norm_squared()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pivot != k {
                a.swap_columns(k, pivot);
                perm.swap(k, pivot);
            }

            let norm = a.view((k, k), (n - k, 1)).norm();
            if norm == 0.0 {
                continue;
            }
            let x0 = a[(k, k)];
            let alpha = if x0 >= 0.0 { -norm } else { norm };
            a[(k, k)] = x0 - alpha;
            let v_norm2 = a.view((k, k), (n - k, 1)).norm_squared();
            let t = 2.0 / v_norm2;
            for j in k + 1..p {
                let dot: f64 = (k..n).map(|i| a[(i, k)] * a[(i, j)]).sum();
                let s = t * dot;
                for i in k..n {
                    a[(i, j)] -= s * a[(i, k)];
                }
            }
            tau[k] = t;
            r_diag[k] = alpha;
        }
        PivotedQr {
            packed: a,
            tau,
            r_diag,
            perm,
        }
    }

    fn rank(&self) -> usize {
        let (n, p) = self.packed.shape();
        let lead = self.r_diag.first().map(|v| v.abs()).unwrap_or(0.0);
        let tol = n.max(p) as f64 * lead * RANK_TOLERANCE;
        self.r_diag.iter().filter(|v| v.abs() > tol && lead > 0.0).count()
    }

    /// Applies `H_k` to `b` for the given step.
    fn reflect(&self, k: usize, b: &mut RealVector) {
        let t = self.tau[k];
        if t == 0.0 {
            return;
        }
        let n = self.packed.nrows();
        let dot: f64 = (k..n).map(|i| self.packed[(i, k)] * b[i]).sum();
        let s = t * dot;
        for i in k..n {
            b[i] -= s * self.packed[(i, k)];
        }
    }

    /// Least-squares fit assuming full column rank.
    fn fit(&self, y: &RealVector) -> OlsFit {
        let (n, p) = self.packed.shape();
        let mut qty = y.clone();
        for k in 0..p {
            self.reflect(k, &mut qty);
        }

        let mut z = vec![0.0; p];
        for i in (0..p).rev() {
            let mut acc = qty[i];
            for (j, zj) in z.iter().enumerate().skip(i + 1) {
                acc -= self.packed[(i, j)] * zj;
            }
            z[i] = acc / self.r_diag[i];
        }
        let mut coefficients = RealVector::zeros(p);
        for (k, &j) in self.perm.iter().enumerate() {
            coefficients[j] = z[k];
        }

        let mut fitted = qty;
        for i in p..n {
            fitted[i] = 0.0;
        }
        for k in (0..p).rev() {
            self.reflect(k, &mut fitted);
        }
        let residuals = y - &fitted;

        let mut leverage = RealVector::zeros(n);
        let mut e = RealVector::zeros(n);
        for c in 0..p {
            e.fill(0.0);
            e[c] = 1.0;
            for k in (0..p).rev() {
                self.reflect(k, &mut e);
            }
            for i in 0..n {
                leverage[i] += e[i] * e[i];
            }
        }

        OlsFit {
            coefficients,
            fitted,
            residuals,
            leverage,
            rank: p,
        }
    }
}
