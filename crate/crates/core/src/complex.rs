//! Complex-valued channel matrices and the real embedding used to turn an
//! n-dimensional complex system into a 2n-dimensional real one.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Real;

/// Dense row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> CMatrix<T> {
    pub fn new(rows: usize, cols: usize, data: Vec<Complex<T>>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::dimension("matrix dimensions must be positive"));
        }
        if data.len() != rows * cols {
            return Err(Error::dimension(format!(
                "expected {} entries for a {}x{} matrix, got {}",
                rows * cols,
                rows,
                cols,
                data.len()
            )));
        }
        Ok(CMatrix { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix {
            rows,
            cols,
            data: vec![Complex::new(T::zero(), T::zero()); rows * cols],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> Complex<T> {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Complex<T>) {
        self.data[i * self.cols + j] = v;
    }

    pub fn matvec(&self, v: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
        if v.len() != self.cols {
            return Err(Error::dimension(format!(
                "cannot apply {}x{} to a vector of length {}",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        Ok((0..self.rows)
            .map(|i| {
                (0..self.cols).fold(Complex::new(T::zero(), T::zero()), |acc, j| {
                    acc + self.get(i, j) * v[j]
                })
            })
            .collect())
    }
}

/// Embeds `y = H x` over the complex numbers into the reals.
///
/// The real system stacks real parts over imaginary parts:
///
/// ```text
/// [Re(y)]   [Re(H)  -Im(H)] [Re(x)]
/// [Im(y)] = [Im(H)   Re(H)] [Im(x)]
/// ```
///
/// Euclidean norms are preserved, so distances computed in either domain
/// agree.
pub fn complex_to_real<T: Real>(
    h: &CMatrix<T>,
    y: &[Complex<T>],
) -> Result<(Matrix<T>, Vec<T>)> {
    if y.len() != h.rows() {
        return Err(Error::dimension(format!(
            "y has length {} but h has {} rows",
            y.len(),
            h.rows()
        )));
    }
    let (m, n) = (h.rows(), h.cols());
    let mut hr = Matrix::zeros(2 * m, 2 * n);
    for i in 0..m {
        for j in 0..n {
            let v = h.get(i, j);
            hr[(i, j)] = v.re;
            hr[(i, j + n)] = -v.im;
            hr[(i + m, j)] = v.im;
            hr[(i + m, j + n)] = v.re;
        }
    }
    let mut yr = Vec::with_capacity(2 * m);
    yr.extend(y.iter().map(|c| c.re));
    yr.extend(y.iter().map(|c| c.im));
    Ok((hr, yr))
}

/// Embeds a complex vector the same way: `[Re(x); Im(x)]`.
pub fn vector_to_real<T: Real>(x: &[Complex<T>]) -> Vec<T> {
    let mut out = Vec::with_capacity(2 * x.len());
    out.extend(x.iter().map(|c| c.re));
    out.extend(x.iter().map(|c| c.im));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::norm2;

    #[test]
    fn embedding_preserves_products_and_norms() {
        let h = CMatrix::new(
            2,
            2,
            vec![
                Complex::new(0.4, -1.1),
                Complex::new(2.0, 0.3),
                Complex::new(-0.7, 0.9),
                Complex::new(1.2, -0.5),
            ],
        )
        .unwrap();
        let x = vec![Complex::new(1.0, -2.0), Complex::new(-3.0, 0.5)];
        let y = vec![Complex::new(0.2, 0.8), Complex::new(-1.4, 0.1)];

        let (hr, yr) = complex_to_real(&h, &y).unwrap();
        assert_eq!((hr.rows(), hr.cols()), (4, 4));

        let hx = h.matvec(&x).unwrap();
        let hx_real = hr.matvec(&vector_to_real(&x)).unwrap();
        for (c, pair) in hx.iter().zip(hx_real.chunks(1).take(2).zip(&hx_real[2..])) {
            let (re, im): (f64, f64) = (pair.0[0], *pair.1);
            assert!((c.re - re).abs() < 1e-12);
            assert!((c.im - im).abs() < 1e-12);
        }

        // || y - Hx ||^2 matches in both domains.
        let resid_c: f64 = y
            .iter()
            .zip(&hx)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum();
        let diff: Vec<f64> = yr.iter().zip(&hx_real).map(|(a, b)| a - b).collect();
        assert!((resid_c - norm2(&diff)).abs() < 1e-12);
    }

    #[test]
    fn shape_mismatch_is_an_error() {
        let h = CMatrix::<f64>::zeros(2, 2);
        let y = vec![Complex::new(0.0, 0.0)];
        assert!(complex_to_real(&h, &y).is_err());
    }
}
