//! Parameter tuning for the samplers.
//!
//! The sample size `K` and the concentration `rho` are tied together by
//!
//! ```text
//! K = (1/2) (e rho)^(2n / rho)        derandomized
//! K =       (e rho)^(2n / rho)        randomized
//! ```
//!
//! Both right-hand sides are strictly decreasing in `rho` on (1, inf), so
//! given `K` the optimum concentration is recovered by bisection on the
//! logarithm with geometric bracket growth. From `rho` follow the Gaussian
//! scale `A = ln(rho) / min_i r_ii^2` and the decoding radius
//! `sqrt(2n / rho) * min_i r_ii`.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Below this concentration the radius expression drops third-order terms
/// that are no longer negligible; results should carry a warning.
pub const LOW_RHO_THRESHOLD: f64 = 3.0;

/// Default cap for the sample-size search in [`min_k_for_eta`].
pub const MIN_K_CAP_DEFAULT: u64 = 1 << 32;

/// `ln` of the sampler size as a function of `rho`:
/// `ln_prefactor + (2n/rho)(1 + ln rho)`.
fn log_k_of_rho<T: Real>(rho: T, n: usize, ln_prefactor: T) -> T {
    let two_n = T::of_usize(2 * n);
    ln_prefactor + two_n / rho * (T::one() + rho.ln())
}

fn solve_rho<T: Real>(k: T, n: usize, ln_prefactor: T, what: &str) -> Result<T> {
    if n == 0 {
        return Err(Error::parameter("dimension must be at least 1"));
    }
    if !k.is_finite() {
        return Err(Error::parameter("sample size must be finite"));
    }
    let target = k.ln();
    if !(target > ln_prefactor) {
        return Err(Error::OutOfRange(format!(
            "{} has no solution: sample size {} is at or below the large-rho limit",
            what, k
        )));
    }
    let mut lo = T::one() + T::of(1e-12);
    if target >= log_k_of_rho(lo, n, ln_prefactor) {
        return Err(Error::OutOfRange(format!(
            "{} has no solution with rho > 1: sample size {} is too large for n = {}",
            what, k, n
        )));
    }

    // Geometric growth until the target is bracketed, then bisection.
    let mut hi = T::of(2.0);
    let mut grow = 0;
    while log_k_of_rho(hi, n, ln_prefactor) > target {
        hi = hi * T::of(2.0);
        grow += 1;
        if grow > 2000 {
            return Err(Error::OutOfRange(format!(
                "{}: failed to bracket a root",
                what
            )));
        }
    }
    let tol = T::epsilon() * T::of(8.0);
    for _ in 0..500 {
        if hi - lo <= tol * lo {
            break;
        }
        let mid = (lo + hi) * T::of(0.5);
        if log_k_of_rho(mid, n, ln_prefactor) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo + hi) * T::of(0.5))
}

/// Optimum concentration for the derandomized sampler:
/// solves `k = (1/2)(e rho)^(2n/rho)` for `rho > 1`. Requires `k > 1/2`.
pub fn solve_rho_opt<T: Real>(k: T, n: usize) -> Result<T> {
    solve_rho(k, n, T::of(0.5).ln(), "solve_rho_opt")
}

/// Concentration for the randomized sampler: solves
/// `k = (e rho)^(2n/rho)` for `rho > 1`. Requires `k > 1`.
pub fn randomized_rho<T: Real>(k: T, n: usize) -> Result<T> {
    solve_rho(k, n, T::zero(), "randomized_rho")
}

/// Gaussian scale for a given concentration: `A = ln(rho) / min_rii^2`.
pub fn compute_a<T: Real>(rho: T, min_rii: T) -> Result<T> {
    if !(rho > T::one()) || !rho.is_finite() {
        return Err(Error::parameter(format!("rho must exceed 1, got {}", rho)));
    }
    if !(min_rii > T::zero()) {
        return Err(Error::parameter("min_rii must be positive"));
    }
    Ok(rho.ln() / (min_rii * min_rii))
}

/// Decoding radius achieved by the derandomized sampler with size `k`:
/// `sqrt(2n / rho_opt) * min_rii`.
pub fn decoding_radius<T: Real>(k: T, n: usize, min_rii: T) -> Result<T> {
    if !(min_rii > T::zero()) {
        return Err(Error::parameter("min_rii must be positive"));
    }
    let rho = solve_rho_opt(k, n)?;
    Ok((T::of_usize(2 * n) / rho).sqrt() * min_rii)
}

/// Whether the closed-form radius is outside its accuracy regime.
pub fn low_rho_warning<T: Real>(rho: T) -> bool {
    rho < T::of(LOW_RHO_THRESHOLD)
}

/// Depth of the fixed-complexity expansion stage: the smallest `p` with
/// `(p + 1)^2 >= n`.
pub fn fsd_depth(n: usize) -> Result<usize> {
    if n == 0 {
        return Err(Error::parameter("dimension must be at least 1"));
    }
    let mut p = 0usize;
    while (p + 1) * (p + 1) < n {
        p += 1;
    }
    Ok(p)
}

fn eta_product<T: Real>(k: u64, p: usize) -> T {
    let kf = T::of(k as f64);
    let mut prod = T::one();
    for i in 1..=p as i32 {
        prod = prod * (T::one() - T::of(2.0).powi(i - 2) / kf);
    }
    prod
}

/// Smallest sample size whose expansion-stage retention probability
/// `prod_{i=1..p} (1 - 2^(i-2)/K)` reaches `eta`.
pub fn min_k_for_eta<T: Real>(eta: T, p: usize) -> Result<u64> {
    min_k_for_eta_capped(eta, p, MIN_K_CAP_DEFAULT)
}

/// [`min_k_for_eta`] with an explicit search cap.
pub fn min_k_for_eta_capped<T: Real>(eta: T, p: usize, cap: u64) -> Result<u64> {
    if !(eta > T::zero() && eta < T::one()) {
        return Err(Error::parameter(format!(
            "eta must lie in (0, 1), got {}",
            eta
        )));
    }
    // All factors must stay positive: K > 2^(p-2).
    let floor_k = if p >= 2 { 1u64 << (p - 2) } else { 0 };
    let start = floor_k + 1;
    if start > cap {
        return Err(Error::OutOfRange(format!(
            "sample size search start {} exceeds cap {}",
            start, cap
        )));
    }
    if eta_product::<T>(cap, p) < eta {
        return Err(Error::OutOfRange(format!(
            "eta = {} is unattainable with p = {} under cap {}",
            eta, p, cap
        )));
    }
    // The product is increasing in K; grow geometrically, then bisect to
    // the minimal admissible integer.
    let mut hi = start;
    while eta_product::<T>(hi, p) < eta {
        hi = (hi.saturating_mul(2)).min(cap);
    }
    let mut lo = start;
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if eta_product::<T>(mid, p) < eta {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// Radius of the list-decoding ball: `sqrt(n) * sigma`.
pub fn lsd_radius<T: Real>(n: usize, sigma: T) -> Result<T> {
    if n == 0 {
        return Err(Error::parameter("dimension must be at least 1"));
    }
    if !(sigma > T::zero()) || !sigma.is_finite() {
        return Err(Error::parameter("sigma must be positive and finite"));
    }
    Ok(T::of_usize(n).sqrt() * sigma)
}

/// Sample size that makes the sampler operate at the noise scale:
/// `(1/2) (2 e min_rii^2 / sigma^2) ^ (n sigma^2 / min_rii^2)`.
pub fn near_map_sample_size<T: Real>(n: usize, sigma: T, min_rii: T) -> Result<T> {
    if n == 0 {
        return Err(Error::parameter("dimension must be at least 1"));
    }
    if !(sigma > T::zero()) || !sigma.is_finite() {
        return Err(Error::parameter("sigma must be positive and finite"));
    }
    if !(min_rii > T::zero()) {
        return Err(Error::parameter("min_rii must be positive"));
    }
    let ratio = (min_rii * min_rii) / (sigma * sigma);
    let base = T::of(2.0) * T::of(core::f64::consts::E) * ratio;
    let expo = T::of_usize(n) / ratio;
    let k = T::of(0.5) * base.powf(expo);
    if !k.is_finite() {
        return Err(Error::OutOfRange(
            "near-MAP sample size overflows the scalar type".into(),
        ));
    }
    Ok(k)
}
