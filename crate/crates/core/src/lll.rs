//! Lenstra-Lenstra-Lovasz basis reduction on the columns of a channel
//! matrix, tracking the integer transform so candidates found in the
//! reduced system can be mapped back to symbol coordinates.

use crate::error::{Error, Result};
use crate::matrix::{dot, norm2, IntMatrix, Matrix};
use crate::scalar::{round_to_i64, Real};

/// Default Lovasz parameter; close to 1 gives the strongest reduction.
pub const LLL_DELTA_DEFAULT: f64 = 0.99;

const MAX_SWEEPS: usize = 100_000;

/// Result of [`lll_reduce`]: `basis = original * transform` with
/// `|det(transform)| = 1`.
#[derive(Debug, Clone)]
pub struct ReducedBasis<T> {
    pub basis: Matrix<T>,
    pub transform: IntMatrix,
}

struct Gso<T> {
    /// Squared norms of the orthogonalized columns.
    b: Vec<T>,
    /// mu[k][j] for j < k.
    mu: Vec<Vec<T>>,
}

fn gram_schmidt<T: Real>(cols: &[Vec<T>]) -> Result<Gso<T>> {
    let n = cols.len();
    let mut star: Vec<Vec<T>> = Vec::with_capacity(n);
    let mut b = vec![T::zero(); n];
    let mut mu = vec![vec![T::zero(); n]; n];
    for k in 0..n {
        let mut v = cols[k].clone();
        for j in 0..k {
            let m = dot(&cols[k], &star[j]) / b[j];
            mu[k][j] = m;
            for (vi, sj) in v.iter_mut().zip(&star[j]) {
                *vi = *vi - m * *sj;
            }
        }
        b[k] = norm2(&v);
        if !(b[k] > T::zero()) || !b[k].is_finite() {
            return Err(Error::singular(
                "basis is not numerically full column rank",
            ));
        }
        star.push(v);
    }
    Ok(Gso { b, mu })
}

/// Reduces the columns of `h` with parameter `delta` in (0.25, 1).
///
/// The output basis spans the same lattice as the input: the returned
/// transform is unimodular and `basis = h * transform` holds exactly up to
/// floating-point rounding in the column operations.
pub fn lll_reduce<T: Real>(h: &Matrix<T>, delta: T) -> Result<ReducedBasis<T>> {
    if !(delta > T::of(0.25) && delta < T::one()) {
        return Err(Error::parameter(format!(
            "lll delta must lie in (0.25, 1), got {}",
            delta
        )));
    }
    if h.rows() < h.cols() {
        return Err(Error::dimension("lll needs rows >= cols"));
    }
    let n = h.cols();
    let mut cols: Vec<Vec<T>> = (0..n).map(|j| h.col(j)).collect();
    let mut u = IntMatrix::identity(n);

    let half = T::of(0.5);
    let mut k = 1usize;
    let mut sweeps = 0usize;
    let mut gso = gram_schmidt(&cols)?;
    while k < n {
        sweeps += 1;
        if sweeps > MAX_SWEEPS {
            return Err(Error::OutOfRange(
                "lll exceeded its iteration guard; input is numerically degenerate".into(),
            ));
        }

        // Size-reduce column k against all earlier columns. Subtracting
        // q * b_j shifts mu[k][j'] by q * mu[j][j'] for every j' < j, so
        // the row must be updated as the loop walks down.
        let mut changed = false;
        for j in (0..k).rev() {
            if gso.mu[k][j].abs() > half {
                let q = round_to_i64(gso.mu[k][j]);
                let qt = T::of(q as f64);
                for i in 0..cols[k].len() {
                    let v = cols[k][i] - qt * cols[j][i];
                    cols[k][i] = v;
                }
                u.col_axpy(k, j, q);
                gso.mu[k][j] = gso.mu[k][j] - qt;
                for jp in 0..j {
                    let m = gso.mu[j][jp];
                    gso.mu[k][jp] = gso.mu[k][jp] - qt * m;
                }
                changed = true;
            }
        }
        if changed {
            // Refresh from the actual columns to keep rounding in check.
            gso = gram_schmidt(&cols)?;
        }

        // Lovasz condition between columns k-1 and k.
        let m = gso.mu[k][k - 1];
        if gso.b[k] >= (delta - m * m) * gso.b[k - 1] {
            k += 1;
        } else {
            cols.swap(k, k - 1);
            u.swap_cols(k, k - 1);
            gso = gram_schmidt(&cols)?;
            k = if k > 1 { k - 1 } else { 1 };
        }
    }

    let mut basis = Matrix::zeros(h.rows(), n);
    for (j, c) in cols.iter().enumerate() {
        basis.set_col(j, c);
    }
    Ok(ReducedBasis { basis, transform: u })
}

/// Checks the size-reduction and Lovasz conditions of a reduced basis.
#[cfg(test)]
fn is_lll_reduced(m: &Matrix<f64>, delta: f64) -> bool {
    let cols: Vec<Vec<f64>> = (0..m.cols()).map(|j| m.col(j)).collect();
    let g = gram_schmidt(&cols).unwrap();
    for k in 1..cols.len() {
        for j in 0..k {
            if g.mu[k][j].abs() > 0.5 + 1e-9 {
                return false;
            }
        }
        let mu = g.mu[k][k - 1];
        if g.b[k] < (delta - mu * mu) * g.b[k - 1] - 1e-9 {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_is_untouched() {
        let h = Matrix::<f64>::identity(4);
        let red = lll_reduce(&h, 0.99).unwrap();
        assert!(red.basis.max_abs_diff(&h) < 1e-12);
        assert_eq!(red.transform, IntMatrix::identity(4));
    }

    #[test]
    fn two_dim_shear_gets_size_reduced() {
        // Columns (1, 0.6) and (0, 1).
        let h = Matrix::from_rows(&[vec![1.0, 0.0], vec![0.6, 1.0]]).unwrap();
        let red = lll_reduce(&h, 0.99).unwrap();
        assert!(is_lll_reduced(&red.basis, 0.99));
        assert_eq!(red.transform.det().abs(), 1);
        let recon = h.matmul(&red.transform.to_real()).unwrap();
        assert!(recon.max_abs_diff(&red.basis) < 1e-9);
    }

    #[test]
    fn skewed_basis_reduces_and_transform_is_unimodular() {
        let h = Matrix::from_rows(&[
            vec![1.0, 0.99, 5.3],
            vec![0.0, 0.01, -2.2],
            vec![0.0, 0.0, 0.4],
        ])
        .unwrap();
        let red = lll_reduce(&h, 0.99).unwrap();
        assert!(is_lll_reduced(&red.basis, 0.99));
        assert_eq!(red.transform.det().abs(), 1);
        let recon = h.matmul(&red.transform.to_real()).unwrap();
        assert!(recon.max_abs_diff(&red.basis) < 1e-9);
        // Reduction must not grow the shortest column.
        let shortest_in: f64 = (0..3).map(|j| norm2(&h.col(j))).fold(f64::MAX, f64::min);
        let shortest_out: f64 = (0..3)
            .map(|j| norm2(&red.basis.col(j)))
            .fold(f64::MAX, f64::min);
        assert!(shortest_out <= shortest_in + 1e-12);
    }

    #[test]
    fn integer_bases_span_the_same_lattice() {
        // For integer inputs the column-style Hermite normal form is an
        // exact lattice invariant; compare input and output forms.
        let h = Matrix::from_rows(&[
            vec![4.0, 1.0, 0.0],
            vec![3.0, 7.0, 2.0],
            vec![0.0, 5.0, 9.0],
        ])
        .unwrap();
        let red = lll_reduce(&h, 0.75).unwrap();
        let as_int = |m: &Matrix<f64>| -> Vec<Vec<i128>> {
            (0..m.rows())
                .map(|i| {
                    (0..m.cols())
                        .map(|j| {
                            let v = m[(i, j)];
                            assert!((v - v.round()).abs() < 1e-6);
                            v.round() as i128
                        })
                        .collect()
                })
                .collect()
        };
        assert_eq!(hnf(as_int(&h)), hnf(as_int(&red.basis)));
        assert_eq!(red.transform.det().abs(), 1);
    }

    #[test]
    fn bad_delta_and_rank_deficiency_are_rejected() {
        let h = Matrix::<f64>::identity(2);
        assert!(lll_reduce(&h, 0.25).is_err());
        assert!(lll_reduce(&h, 1.0).is_err());
        let s = Matrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap();
        assert!(matches!(lll_reduce(&s, 0.99), Err(Error::Singular(_))));
    }

    #[test]
    fn tall_basis_is_supported() {
        let h = Matrix::from_rows(&[
            vec![3.0, 1.0],
            vec![1.0, 2.0],
            vec![0.5, -1.0],
            vec![2.0, 2.1],
        ])
        .unwrap();
        let red = lll_reduce(&h, 0.99).unwrap();
        assert!(is_lll_reduced(&red.basis, 0.99));
        assert_eq!(red.transform.det().abs(), 1);
    }

    /// Column-style Hermite normal form over the integers (test oracle).
    fn hnf(mut a: Vec<Vec<i128>>) -> Vec<Vec<i128>> {
        let rows = a.len();
        let cols = a[0].len();
        let mut pivot_col = 0usize;
        for row in 0..rows {
            if pivot_col >= cols {
                break;
            }
            loop {
                // Find the column (>= pivot_col) with the smallest nonzero
                // entry in this row and move it to the pivot position.
                let mut best: Option<(usize, i128)> = None;
                for c in pivot_col..cols {
                    let v = a[row][c];
                    if v != 0 && best.map_or(true, |(_, bv)| v.abs() < bv.abs()) {
                        best = Some((c, v));
                    }
                }
                let Some((c, _)) = best else {
                    break;
                };
                for r in 0..rows {
                    a[r].swap(pivot_col, c);
                }
                if a[row][pivot_col] < 0 {
                    for r in 0..rows {
                        a[r][pivot_col] = -a[r][pivot_col];
                    }
                }
                let p = a[row][pivot_col];
                let mut done = true;
                for c in pivot_col + 1..cols {
                    let q = a[row][c].div_euclid(p);
                    if q != 0 {
                        for r in 0..rows {
                            a[r][c] -= q * a[r][pivot_col];
                        }
                    }
                    if a[row][c] != 0 {
                        done = false;
                    }
                }
                if done {
                    break;
                }
            }
            if a[row][pivot_col] != 0 {
                // Reduce entries left of the pivot into [0, pivot).
                let p = a[row][pivot_col];
                for c in 0..pivot_col {
                    let q = a[row][c].div_euclid(p);
                    if q != 0 {
                        for r in 0..rows {
                            a[r][c] -= q * a[r][pivot_col];
                        }
                    }
                }
                pivot_col += 1;
            }
        }
        a
    }
}
