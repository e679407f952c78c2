//! Householder QR with a positive-diagonal convention.
//!
//! Successive interference cancellation and the samplers both consume the
//! triangular factor directly, and the per-level Gaussian widths are scaled
//! by `r[i][i]`, so the factorization fixes the sign ambiguity by flipping
//! reflector signs until every diagonal entry of `R` is positive.

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Real;

/// Relative threshold on the R diagonal below which the input is treated as
/// rank-deficient.
pub const RANK_RTOL: f64 = 1e-12;

/// Q/R factors of a channel matrix (possibly reduced, possibly
/// noise-extended, in which case `q` is rectangular with orthonormal
/// columns and `r` stays square).
#[derive(Debug, Clone)]
pub struct QrFactors<T> {
    pub q: Matrix<T>,
    pub r: Matrix<T>,
}

impl<T: Real> QrFactors<T> {
    /// Lattice dimension (number of columns of the factored matrix).
    pub fn dim(&self) -> usize {
        self.r.cols()
    }

    /// Smallest diagonal entry of `R`.
    pub fn min_diag(&self) -> T {
        (0..self.dim())
            .map(|i| self.r[(i, i)])
            .fold(T::infinity(), |m, d| if d < m { d } else { m })
    }

    /// Applies `Q^T` to a received vector, mapping it into the triangular
    /// system `y' = R x + n'`.
    pub fn project(&self, y: &[T]) -> Result<Vec<T>> {
        self.q.transpose().matvec(y)
    }
}

/// Factors `h = q r` with `r` upper triangular and `r[i][i] > 0`.
///
/// `h` must have at least as many rows as columns and be numerically full
/// column rank; otherwise a singular-matrix error is returned.
pub fn qr_decompose<T: Real>(h: &Matrix<T>) -> Result<QrFactors<T>> {
    let m = h.rows();
    let n = h.cols();
    if m < n {
        return Err(Error::dimension(format!(
            "qr needs rows >= cols, got {}x{}",
            m, n
        )));
    }
    if h.data().iter().any(|x| !x.is_finite()) {
        return Err(Error::parameter("matrix entries must be finite"));
    }

    let mut r = h.clone();
    let mut q = Matrix::<T>::identity(m);
    let mut v = vec![T::zero(); m];

    for k in 0..n {
        // Householder vector for column k below the diagonal.
        let mut sq = T::zero();
        for i in k..m {
            let x = r[(i, k)];
            v[i] = x;
            sq = sq + x * x;
        }
        let nrm = sq.sqrt();
        if nrm == T::zero() {
            continue; // column already zero; rank check below will reject
        }
        let alpha = if v[k] >= T::zero() { -nrm } else { nrm };
        v[k] = v[k] - alpha;
        let vtv = {
            let mut s = T::zero();
            for i in k..m {
                s = s + v[i] * v[i];
            }
            s
        };
        if vtv == T::zero() {
            continue;
        }
        let two = T::of(2.0);

        // R <- H_k R
        for j in k..n {
            let mut d = T::zero();
            for i in k..m {
                d = d + v[i] * r[(i, j)];
            }
            let f = two * d / vtv;
            for i in k..m {
                r[(i, j)] = r[(i, j)] - f * v[i];
            }
        }
        // Q <- Q H_k
        for i in 0..m {
            let mut d = T::zero();
            for l in k..m {
                d = d + q[(i, l)] * v[l];
            }
            let f = two * d / vtv;
            for l in k..m {
                q[(i, l)] = q[(i, l)] - f * v[l];
            }
        }
    }

    // Exact zeros below the diagonal and positive diagonal entries.
    for j in 0..n {
        for i in j + 1..m {
            r[(i, j)] = T::zero();
        }
        if r[(j, j)] < T::zero() {
            for c in j..n {
                r[(j, c)] = -r[(j, c)];
            }
            for i in 0..m {
                q[(i, j)] = -q[(i, j)];
            }
        }
    }

    let mut max_d = T::zero();
    let mut min_d = T::infinity();
    for i in 0..n {
        let d = r[(i, i)];
        if d > max_d {
            max_d = d;
        }
        if d < min_d {
            min_d = d;
        }
    }
    if !(min_d > T::of(RANK_RTOL) * max_d) {
        return Err(Error::singular(format!(
            "rank-deficient input: min diag {:e} vs max diag {:e}",
            min_d.to_f64().unwrap_or(f64::NAN),
            max_d.to_f64().unwrap_or(f64::NAN)
        )));
    }

    // Thin factors: keep the first n columns of Q and the top n rows of R.
    let q_thin = q.select_cols(&(0..n).collect::<Vec<_>>());
    let mut r_thin = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            r_thin[(i, j)] = r[(i, j)];
        }
    }
    Ok(QrFactors { q: q_thin, r: r_thin })
}
