//! Noise-regularized (MMSE) extension of a linear system.

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Real;

/// The stacked system produced by [`mmse_extend`].
///
/// `h_ext` stacks the channel over `sigma * I`, and `y_ext` pads the
/// received vector with zeros, so that successive cancellation on the
/// extended QR factors performs MMSE-regularized detection instead of
/// zero-forcing. With `sigma = 0` the extension degenerates to the
/// original (zero-forcing) system plus inert zero rows.
#[derive(Debug, Clone)]
pub struct ExtendedSystem<T> {
    pub h_ext: Matrix<T>,
    pub y_ext: Vec<T>,
    pub sigma: T,
}

/// Stacks `h` over `sigma * I` and pads `y` with `n` zeros.
///
/// `sigma` is the noise-to-signal standard-deviation ratio; for
/// unit-variance symbols it is simply the noise standard deviation.
pub fn mmse_extend<T: Real>(h: &Matrix<T>, y: &[T], sigma: T) -> Result<ExtendedSystem<T>> {
    if y.len() != h.rows() {
        return Err(Error::dimension(format!(
            "y has length {} but h has {} rows",
            y.len(),
            h.rows()
        )));
    }
    if !(sigma >= T::zero()) || !sigma.is_finite() {
        return Err(Error::parameter("sigma must be finite and nonnegative"));
    }
    let (m, n) = (h.rows(), h.cols());
    let mut h_ext = Matrix::zeros(m + n, n);
    for i in 0..m {
        for j in 0..n {
            h_ext[(i, j)] = h[(i, j)];
        }
    }
    for j in 0..n {
        h_ext[(m + j, j)] = sigma;
    }
    let mut y_ext = y.to_vec();
    y_ext.resize(m + n, T::zero());
    Ok(ExtendedSystem { h_ext, y_ext, sigma })
}
