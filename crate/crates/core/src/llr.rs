//! Bitwise log-likelihood ratios from a list of candidate lattice points.
//!
//! Conventions used throughout:
//!
//! * the channel metric of a candidate `z` is `-||y - H z||^2 / (2 sigma^2)`
//!   with `sigma` the per-component noise standard deviation;
//! * an LLR is `ln P(bit = 0) - ln P(bit = 1)`, so positive values favor 0;
//! * prior LLRs use the same sign convention.
//!
//! Marginalizing over a finite candidate list can leave one hypothesis set
//! empty, which would give an infinite ratio. Values are therefore clamped
//! to a configurable magnitude, and the `clamped` flag records the bits
//! whose ratio was pinned for that reason (finite values that merely
//! exceed the clamp are clipped without raising the flag).

use crate::error::{Error, Result};
use crate::labeling::BitLabeling;
use crate::matrix::{residual_norm2, Matrix};
use crate::scalar::Real;

/// Default clamp magnitude; generous for any practical channel decoder.
pub const DEFAULT_LLR_CLAMP: f64 = 50.0;

/// Per-bit ratios plus the pinned-bit markers.
#[derive(Debug, Clone, PartialEq)]
pub struct LlrVector<T> {
    pub values: Vec<T>,
    /// True where a hypothesis set was empty and the value is the clamp.
    pub clamped: Vec<bool>,
}

impl<T: Real> LlrVector<T> {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Indices carrying finite (not pinned) information.
    pub fn informative_bits(&self) -> impl Iterator<Item = usize> + '_ {
        self.clamped
            .iter()
            .enumerate()
            .filter_map(|(i, &c)| (!c).then_some(i))
    }
}

fn check_inputs<T: Real>(
    h: &Matrix<T>,
    y: &[T],
    sigma: T,
    candidates: &[Vec<i64>],
    lab: &BitLabeling,
) -> Result<usize> {
    if h.rows() != y.len() {
        return Err(Error::dimension("received vector length mismatch"));
    }
    if candidates.is_empty() {
        return Err(Error::parameter("candidate list is empty"));
    }
    if !(sigma > T::zero()) || !sigma.is_finite() {
        return Err(Error::parameter("noise deviation must be positive"));
    }
    let n = h.cols();
    for z in candidates {
        if z.len() != n {
            return Err(Error::dimension("candidate length mismatch"));
        }
        for &a in z {
            if a < 0 || a as u64 >= lab.q() {
                return Err(Error::parameter(format!(
                    "candidate coordinate {} outside the 0..{} box",
                    a,
                    lab.q()
                )));
            }
        }
    }
    Ok(n)
}

fn log_sum_exp<T: Real>(terms: &[T]) -> Option<T> {
    let mut m = T::neg_infinity();
    for &t in terms {
        if t > m {
            m = t;
        }
    }
    if terms.is_empty() || m == T::neg_infinity() {
        return None;
    }
    let s = terms
        .iter()
        .map(|&t| (t - m).exp())
        .fold(T::zero(), |a, b| a + b);
    Some(m + s.ln())
}

fn llr_from_weights<T: Real>(
    weights: &[T],
    bits: &[Vec<u8>],
    n_bits: usize,
    clamp: T,
) -> LlrVector<T> {
    let mut values = Vec::with_capacity(n_bits);
    let mut clamped = Vec::with_capacity(n_bits);
    let mut zero_terms: Vec<T> = Vec::with_capacity(weights.len());
    let mut one_terms: Vec<T> = Vec::with_capacity(weights.len());
    for k in 0..n_bits {
        zero_terms.clear();
        one_terms.clear();
        for (w, b) in weights.iter().zip(bits) {
            if b[k] == 0 {
                zero_terms.push(*w);
            } else {
                one_terms.push(*w);
            }
        }
        match (log_sum_exp(&zero_terms), log_sum_exp(&one_terms)) {
            (Some(z), Some(o)) => {
                let l = z - o;
                values.push(l.max(-clamp).min(clamp));
                clamped.push(false);
            }
            (Some(_), None) => {
                values.push(clamp);
                clamped.push(true);
            }
            (None, Some(_)) => {
                values.push(-clamp);
                clamped.push(true);
            }
            (None, None) => unreachable!("candidate list checked non-empty"),
        }
    }
    LlrVector { values, clamped }
}

fn channel_metrics<T: Real>(h: &Matrix<T>, y: &[T], sigma: T, candidates: &[Vec<i64>]) -> Vec<T> {
    let two_var = T::of(2.0) * sigma * sigma;
    candidates
        .iter()
        .map(|z| -residual_norm2(h, y, z) / two_var)
        .collect()
}

/// Candidate-list LLRs with the default clamp.
pub fn list_llr<T: Real>(
    h: &Matrix<T>,
    y: &[T],
    sigma: T,
    candidates: &[Vec<i64>],
    lab: &BitLabeling,
) -> Result<LlrVector<T>> {
    list_llr_with_clamp(h, y, sigma, candidates, lab, T::of(DEFAULT_LLR_CLAMP))
}

/// Candidate-list LLRs with an explicit clamp magnitude.
pub fn list_llr_with_clamp<T: Real>(
    h: &Matrix<T>,
    y: &[T],
    sigma: T,
    candidates: &[Vec<i64>],
    lab: &BitLabeling,
    clamp: T,
) -> Result<LlrVector<T>> {
    let n = check_inputs(h, y, sigma, candidates, lab)?;
    if !(clamp > T::zero()) {
        return Err(Error::parameter("clamp must be positive"));
    }
    let weights = channel_metrics(h, y, sigma, candidates);
    let bits: Vec<Vec<u8>> = candidates
        .iter()
        .map(|z| lab.vector_bits(z))
        .collect::<Result<_>>()?;
    Ok(llr_from_weights(&weights, &bits, lab.total_bits(n), clamp))
}

/// Candidate-list posterior LLRs under independent per-bit priors.
///
/// `prior[k]` is the a-priori ratio of global bit `k` in the same sign
/// convention as the output. Candidate weights become
/// `metric(z) - sum_k b_k(z) * prior[k]`; the per-bit prior constants
/// common to both hypotheses cancel in the ratio, so an all-zero prior
/// reproduces [`list_llr_with_clamp`] exactly.
pub fn list_llr_with_prior<T: Real>(
    h: &Matrix<T>,
    y: &[T],
    sigma: T,
    candidates: &[Vec<i64>],
    lab: &BitLabeling,
    prior: &[T],
    clamp: T,
) -> Result<LlrVector<T>> {
    let n = check_inputs(h, y, sigma, candidates, lab)?;
    let n_bits = lab.total_bits(n);
    if prior.len() != n_bits {
        return Err(Error::dimension(format!(
            "prior has {} entries for {} bits",
            prior.len(),
            n_bits
        )));
    }
    if !(clamp > T::zero()) {
        return Err(Error::parameter("clamp must be positive"));
    }
    let metrics = channel_metrics(h, y, sigma, candidates);
    let bits: Vec<Vec<u8>> = candidates
        .iter()
        .map(|z| lab.vector_bits(z))
        .collect::<Result<_>>()?;
    let weights: Vec<T> = metrics
        .iter()
        .zip(&bits)
        .map(|(&m, b)| {
            let penalty = b
                .iter()
                .zip(prior)
                .filter(|(&bit, _)| bit == 1)
                .map(|(_, &l)| l)
                .fold(T::zero(), |a, b| a + b);
            m - penalty
        })
        .collect();
    Ok(llr_from_weights(&weights, &bits, n_bits, clamp))
}
