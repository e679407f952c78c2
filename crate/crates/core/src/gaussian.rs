//! Per-level discrete Gaussian probabilities.
//!
//! At detection level `i` the candidate integers form the window of size
//! `2N` around the zero-forcing estimate `x~`:
//!
//! ```text
//! { floor(x~) - N + 1, ..., floor(x~) + N }
//! ```
//!
//! and each candidate `j` carries probability `exp(-c_i (x~ - j)^2) / s`
//! where `s` normalizes over the window and `c_i = A r_ii^2` scales with
//! the level's triangular diagonal. Randomized sampling draws from this
//! table; the derandomized tree expands it deterministically.

use rand::Rng;

use crate::error::{Error, Result};
use crate::scalar::{round_to_i64, Real};

/// Default truncation: a window of 2N = 4 integers per level.
pub const TRUNCATION_DEFAULT: usize = 2;

/// Parameters shared by the randomized and derandomized samplers.
#[derive(Debug, Clone, Copy)]
pub struct SamplerParams<T> {
    /// Gaussian scale `A`; level `i` uses `c_i = a_param * r_ii^2`.
    pub a_param: T,
    /// Half-width `N` of the per-level candidate window.
    pub truncation_n: usize,
    /// The concentration parameter the scale was derived from.
    pub rho: T,
    /// Nominal sample size `K` the parameters were tuned for.
    pub nominal_k: T,
}

impl<T: Real> SamplerParams<T> {
    /// Builds parameters from a concentration `rho > 1`:
    /// `A = ln(rho) / min_i r_ii^2`.
    pub fn from_rho(rho: T, min_rii: T, truncation_n: usize, nominal_k: T) -> Result<Self> {
        if !(rho > T::one()) || !rho.is_finite() {
            return Err(Error::parameter(format!("rho must exceed 1, got {}", rho)));
        }
        if !(min_rii > T::zero()) {
            return Err(Error::parameter("min_rii must be positive"));
        }
        Self::validate_common(truncation_n, nominal_k)?;
        Ok(SamplerParams {
            a_param: rho.ln() / (min_rii * min_rii),
            truncation_n,
            rho,
            nominal_k,
        })
    }

    /// Builds parameters from an explicit scale `A` (e.g. the
    /// `ln(n)`-style choice of the original randomized sampler); `rho` is
    /// back-filled so the invariant `A = ln(rho)/min_rii^2` still holds.
    pub fn from_a_param(a_param: T, min_rii: T, truncation_n: usize, nominal_k: T) -> Result<Self> {
        if !(a_param > T::zero()) || !a_param.is_finite() {
            return Err(Error::parameter("a_param must be positive and finite"));
        }
        if !(min_rii > T::zero()) {
            return Err(Error::parameter("min_rii must be positive"));
        }
        Self::validate_common(truncation_n, nominal_k)?;
        Ok(SamplerParams {
            a_param,
            truncation_n,
            rho: (a_param * min_rii * min_rii).exp(),
            nominal_k,
        })
    }

    fn validate_common(truncation_n: usize, nominal_k: T) -> Result<()> {
        if truncation_n == 0 {
            return Err(Error::parameter("truncation_n must be at least 1"));
        }
        if !(nominal_k >= T::one()) || !nominal_k.is_finite() {
            return Err(Error::parameter("nominal_k must be at least 1"));
        }
        Ok(())
    }

    /// Gaussian exponent for a level with diagonal entry `r_ii`.
    pub fn level_scale(&self, r_ii: T) -> T {
        self.a_param * r_ii * r_ii
    }
}

/// Normalized probabilities over one level's candidate window.
#[derive(Debug, Clone)]
pub struct ProbTable<T> {
    /// The zero-forcing estimate the window is centered on.
    pub center: T,
    /// 2N consecutive integers.
    pub candidates: Vec<i64>,
    /// Probabilities aligned with `candidates`; they sum to 1.
    pub probs: Vec<T>,
}

impl<T: Real> ProbTable<T> {
    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    /// Index of `value` within the window, if present.
    pub fn index_of(&self, value: i64) -> Option<usize> {
        let first = self.candidates[0];
        if value < first {
            return None;
        }
        let off = (value - first) as usize;
        (off < self.candidates.len()).then_some(off)
    }

    /// Probability of `value`, zero if outside the window.
    pub fn prob_of(&self, value: i64) -> T {
        self.index_of(value).map_or(T::zero(), |i| self.probs[i])
    }

    /// Index of the most probable candidate.
    ///
    /// Ties are resolved toward the hard-decision rounding of the center,
    /// so a degenerate window (e.g. center exactly between two integers)
    /// picks the same integer successive cancellation would.
    pub fn argmax_idx(&self) -> usize {
        let sic = round_to_i64(self.center);
        let mut best = self
            .index_of(sic)
            .expect("hard-decision rounding always lies in the window");
        for i in 0..self.probs.len() {
            if self.probs[i] > self.probs[best] {
                best = i;
            }
        }
        best
    }
}

/// Evaluates the window probabilities for one level.
///
/// `x_tilde` is the zero-forcing estimate, `c_i > 0` the Gaussian exponent
/// and `n_trunc >= 1` the window half-width. Probabilities are computed in
/// the log domain with max subtraction, so widely spread exponents do not
/// overflow.
pub fn candidate_probabilities<T: Real>(
    x_tilde: T,
    c_i: T,
    n_trunc: usize,
) -> Result<ProbTable<T>> {
    if !x_tilde.is_finite() {
        return Err(Error::parameter("x_tilde must be finite"));
    }
    if !(c_i > T::zero()) || !c_i.is_finite() {
        return Err(Error::parameter(format!(
            "gaussian exponent must be positive and finite, got {}",
            c_i
        )));
    }
    if n_trunc == 0 {
        return Err(Error::parameter("truncation_n must be at least 1"));
    }
    let n = n_trunc as i64;
    let base = x_tilde
        .floor()
        .to_i64()
        .ok_or_else(|| Error::parameter("x_tilde out of integer range"))?;

    let count = 2 * n_trunc;
    let mut candidates = Vec::with_capacity(count);
    let mut logits = Vec::with_capacity(count);
    let mut max_logit = T::neg_infinity();
    for k in 0..count as i64 {
        let cand = base - n + 1 + k;
        let d = x_tilde - T::of(cand as f64);
        let l = -c_i * d * d;
        if l > max_logit {
            max_logit = l;
        }
        candidates.push(cand);
        logits.push(l);
    }
    let mut probs: Vec<T> = logits.iter().map(|&l| (l - max_logit).exp()).collect();
    let s: T = probs.iter().copied().sum();
    for p in &mut probs {
        *p = *p / s;
    }
    Ok(ProbTable {
        center: x_tilde,
        candidates,
        probs,
    })
}

/// Draws one integer from the table with inverse-CDF sampling.
pub fn random_round<T: Real, R: Rng + ?Sized>(table: &ProbTable<T>, rng: &mut R) -> i64 {
    let u = T::of(rng.gen::<f64>());
    let mut acc = T::zero();
    for (i, &p) in table.probs.iter().enumerate() {
        acc = acc + p;
        if u < acc {
            return table.candidates[i];
        }
    }
    *table.candidates.last().expect("table is never empty")
}
