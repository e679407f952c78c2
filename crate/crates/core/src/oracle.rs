//! Exact reference computations for small systems: maximum-likelihood
//! search, sphere enumeration, full-box LLR marginalization and the exact
//! chain probability of the randomized sampler.
//!
//! These exist to validate the fast decoders, so they favor obviousness
//! over speed and refuse problems whose exhaustive cost would explode.

use crate::decoder::zf_estimate;
use crate::error::{Error, Result};
use crate::gaussian::{candidate_probabilities, SamplerParams};
use crate::labeling::BitLabeling;
use crate::llr::{list_llr_with_clamp, LlrVector, DEFAULT_LLR_CLAMP};
use crate::matrix::{residual_norm2, Matrix};
use crate::qr::{qr_decompose, QrFactors};
use crate::scalar::{round_to_i64, Real};

/// Hard cap on exhaustively enumerated points.
pub const EXHAUSTIVE_GUARD: u128 = 1 << 20;

/// Per-coordinate integer bounds, inclusive on both ends.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConstellationBox {
    pub lo: i64,
    pub hi: i64,
}

impl ConstellationBox {
    pub fn new(lo: i64, hi: i64) -> Result<Self> {
        if lo > hi {
            return Err(Error::parameter(format!("empty box [{}, {}]", lo, hi)));
        }
        Ok(ConstellationBox { lo, hi })
    }

    /// The box `{0, .., q-1}` of a `q`-level constellation.
    pub fn from_levels(q: u64) -> Result<Self> {
        if q == 0 || q > i64::MAX as u64 {
            return Err(Error::parameter("level count out of range"));
        }
        ConstellationBox::new(0, q as i64 - 1)
    }

    pub fn side(&self) -> u128 {
        (self.hi - self.lo) as u128 + 1
    }

    pub fn point_count(&self, n: usize) -> Result<u128> {
        let n = u32::try_from(n).map_err(|_| Error::parameter("dimension out of range"))?;
        self.side()
            .checked_pow(n)
            .ok_or(Error::OutOfRange("box point count overflows".into()))
    }

    pub fn contains(&self, z: &[i64]) -> bool {
        z.iter().all(|&v| self.lo <= v && v <= self.hi)
    }

    pub fn clamp_point(&self, z: &[i64]) -> Vec<i64> {
        z.iter().map(|&v| v.clamp(self.lo, self.hi)).collect()
    }
}

/// Nearest-first walk over the box points of one level.
struct ZigZag {
    lo: i64,
    hi: i64,
    center: f64,
    left: i64,
    right: i64,
    fresh: Option<i64>,
}

impl ZigZag {
    fn new(center: f64, cbox: &ConstellationBox) -> Self {
        let start = round_to_i64(center).clamp(cbox.lo, cbox.hi);
        ZigZag {
            lo: cbox.lo,
            hi: cbox.hi,
            center,
            left: start - 1,
            right: start + 1,
            fresh: Some(start),
        }
    }

    fn next(&mut self) -> Option<i64> {
        if let Some(v) = self.fresh.take() {
            return Some(v);
        }
        let l_ok = self.left >= self.lo;
        let r_ok = self.right <= self.hi;
        let take_left = match (l_ok, r_ok) {
            (false, false) => return None,
            (true, false) => true,
            (false, true) => false,
            (true, true) => {
                (self.center - self.left as f64).abs() <= (self.right as f64 - self.center).abs()
            }
        };
        if take_left {
            self.left -= 1;
            Some(self.left + 1)
        } else {
            self.right += 1;
            Some(self.right - 1)
        }
    }
}

fn check_search_inputs<T: Real>(h: &Matrix<T>, y: &[T]) -> Result<QrFactors<T>> {
    if h.rows() != y.len() {
        return Err(Error::dimension("received vector length mismatch"));
    }
    qr_decompose(h)
}

/// `||y||^2 - ||Q^T y||^2`: the residual mass outside the column space,
/// constant in `z` (zero for square systems up to rounding).
fn projection_offset<T: Real>(y: &[T], y_prime: &[T]) -> T {
    let full: T = y.iter().map(|&v| v * v).sum();
    let proj: T = y_prime.iter().map(|&v| v * v).sum();
    (full - proj).max(T::zero())
}

struct SphereSearch<'a, T> {
    r: &'a Matrix<T>,
    y: &'a [T],
    cbox: ConstellationBox,
    z: Vec<i64>,
    best_z: Option<Vec<i64>>,
    best_d2: T,
}

impl<'a, T: Real> SphereSearch<'a, T> {
    fn descend(&mut self, idx: usize, d2: T) {
        let x = zf_estimate(self.r, self.y, &self.z, idx);
        let mut walk = ZigZag::new(x.to_f64().unwrap_or(0.0), &self.cbox);
        while let Some(v) = walk.next() {
            let e = self.r[(idx, idx)] * (x - T::of(v as f64));
            let d2v = d2 + e * e;
            if self.best_z.is_some() && d2v > self.best_d2 {
                // Later candidates at this level only move further out.
                break;
            }
            self.z[idx] = v;
            if idx == 0 {
                let better = match &self.best_z {
                    None => true,
                    Some(best) => {
                        d2v < self.best_d2
                            || (d2v == self.best_d2 && self.z.as_slice() < best.as_slice())
                    }
                };
                if better {
                    self.best_z = Some(self.z.clone());
                    self.best_d2 = d2v;
                }
            } else {
                self.descend(idx - 1, d2v);
            }
        }
    }

}

/// Exact maximum-likelihood point inside the box, with its distance.
/// Distance ties are broken toward the lexicographically smallest vector.
pub fn ml_sphere_decode<T: Real>(
    h: &Matrix<T>,
    y: &[T],
    cbox: &ConstellationBox,
) -> Result<(Vec<i64>, T)> {
    let qr = check_search_inputs(h, y)?;
    let y_prime = qr.project(y)?;
    let n = h.cols();
    let mut search = SphereSearch {
        r: &qr.r,
        y: &y_prime,
        cbox: *cbox,
        z: vec![0i64; n],
        best_z: None,
        best_d2: T::infinity(),
    };
    search.descend(n - 1, T::zero());
    let z = search.best_z.expect("box is never empty");
    let dist = residual_norm2(h, y, &z).sqrt();
    Ok((z, dist))
}

/// Every box point with `||y - H z|| <= radius`, sorted by distance and
/// then lexicographically.
pub fn enumerate_radius<T: Real>(
    h: &Matrix<T>,
    y: &[T],
    radius: T,
    cbox: &ConstellationBox,
) -> Result<Vec<(Vec<i64>, T)>> {
    if !(radius >= T::zero()) {
        return Err(Error::parameter("radius must be non-negative"));
    }
    let qr = check_search_inputs(h, y)?;
    let y_prime = qr.project(y)?;
    let offset = projection_offset(y, &y_prime);
    let budget = radius * radius - offset;
    let mut out: Vec<(Vec<i64>, T)> = Vec::new();
    if budget < T::zero() {
        return Ok(out);
    }
    let n = h.cols();
    let mut z = vec![0i64; n];
    collect_within(&qr.r, &y_prime, cbox, budget, offset, n - 1, T::zero(), &mut z, &mut out)?;
    out.sort_by(|a, b| {
        a.1.partial_cmp(&b.1)
            .unwrap_or(core::cmp::Ordering::Equal)
            .then_with(|| a.0.cmp(&b.0))
    });
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn collect_within<T: Real>(
    r: &Matrix<T>,
    y: &[T],
    cbox: &ConstellationBox,
    budget: T,
    offset: T,
    idx: usize,
    d2: T,
    z: &mut Vec<i64>,
    out: &mut Vec<(Vec<i64>, T)>,
) -> Result<()> {
    let x = zf_estimate(r, y, z, idx);
    let mut walk = ZigZag::new(x.to_f64().unwrap_or(0.0), cbox);
    while let Some(v) = walk.next() {
        let e = r[(idx, idx)] * (x - T::of(v as f64));
        let d2v = d2 + e * e;
        if d2v > budget {
            break;
        }
        z[idx] = v;
        if idx == 0 {
            if out.len() as u128 >= EXHAUSTIVE_GUARD {
                return Err(Error::GuardExceeded {
                    points: out.len() as u128 + 1,
                    max: EXHAUSTIVE_GUARD,
                });
            }
            out.push((z.clone(), (d2v + offset).sqrt()));
        } else {
            collect_within(r, y, cbox, budget, offset, idx - 1, d2v, z, out)?;
        }
    }
    Ok(())
}

fn enumerate_box(cbox: &ConstellationBox, n: usize) -> Result<Vec<Vec<i64>>> {
    let count = cbox.point_count(n)?;
    if count > EXHAUSTIVE_GUARD {
        return Err(Error::GuardExceeded {
            points: count,
            max: EXHAUSTIVE_GUARD,
        });
    }
    let mut out = Vec::with_capacity(count as usize);
    let mut z = vec![cbox.lo; n];
    loop {
        out.push(z.clone());
        let mut i = 0;
        loop {
            if i == n {
                return Ok(out);
            }
            if z[i] < cbox.hi {
                z[i] += 1;
                break;
            }
            z[i] = cbox.lo;
            i += 1;
        }
    }
}

/// Exact posterior LLRs by marginalizing over the full `{0,..,q-1}^n` box.
pub fn exact_map_llr<T: Real>(
    h: &Matrix<T>,
    y: &[T],
    sigma: T,
    lab: &BitLabeling,
) -> Result<LlrVector<T>> {
    let cbox = ConstellationBox::from_levels(lab.q())?;
    let all = enumerate_box(&cbox, h.cols())?;
    list_llr_with_clamp(h, y, sigma, &all, lab, T::of(DEFAULT_LLR_CLAMP))
}

/// Max-log approximation of [`exact_map_llr`]: per-bit difference of the
/// two best metrics instead of full sums.
pub fn maxlog_llr<T: Real>(
    h: &Matrix<T>,
    y: &[T],
    sigma: T,
    lab: &BitLabeling,
) -> Result<LlrVector<T>> {
    if h.rows() != y.len() {
        return Err(Error::dimension("received vector length mismatch"));
    }
    if !(sigma > T::zero()) || !sigma.is_finite() {
        return Err(Error::parameter("noise deviation must be positive"));
    }
    let n = h.cols();
    let cbox = ConstellationBox::from_levels(lab.q())?;
    let all = enumerate_box(&cbox, n)?;
    let n_bits = lab.total_bits(n);
    let mut min0 = vec![T::infinity(); n_bits];
    let mut min1 = vec![T::infinity(); n_bits];
    for z in &all {
        let d2 = residual_norm2(h, y, z);
        for k in 0..n_bits {
            let slot = if lab.vector_bit(z, k)? == 0 {
                &mut min0[k]
            } else {
                &mut min1[k]
            };
            if d2 < *slot {
                *slot = d2;
            }
        }
    }
    let clamp = T::of(DEFAULT_LLR_CLAMP);
    let two_var = T::of(2.0) * sigma * sigma;
    let values = min0
        .iter()
        .zip(&min1)
        .map(|(&m0, &m1)| ((m1 - m0) / two_var).max(-clamp).min(clamp))
        .collect::<Vec<_>>();
    let clamped = vec![false; n_bits];
    Ok(LlrVector { values, clamped })
}

/// Probability that one pass of the randomized sampler outputs exactly
/// `z`; zero whenever some coordinate falls outside its level's window.
pub fn exact_sampling_probability<T: Real>(
    qr: &QrFactors<T>,
    y_prime: &[T],
    z: &[i64],
    params: &SamplerParams<T>,
) -> Result<T> {
    let n = qr.r.cols();
    if qr.r.rows() != n || y_prime.len() != n || z.len() != n {
        return Err(Error::dimension("system and point sizes disagree"));
    }
    let mut prob = T::one();
    for idx in (0..n).rev() {
        let x = zf_estimate(&qr.r, y_prime, z, idx);
        let c = params.level_scale(qr.r[(idx, idx)]);
        let table = candidate_probabilities(x, c, params.truncation_n)?;
        prob = prob * table.prob_of(z[idx]);
        if prob == T::zero() {
            return Ok(T::zero());
        }
    }
    Ok(prob)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn brute_ml(h: &Matrix<f64>, y: &[f64], cbox: &ConstellationBox) -> (Vec<i64>, f64) {
        let all = enumerate_box(cbox, h.cols()).unwrap();
        let mut best = (all[0].clone(), f64::INFINITY);
        for z in all {
            let d2 = residual_norm2(h, y, &z);
            if d2 < best.1 || (d2 == best.1 && z < best.0) {
                best = (z, d2);
            }
        }
        (best.0, best.1.sqrt())
    }

    #[test]
    fn sphere_search_agrees_with_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let cbox = ConstellationBox::new(0, 3).unwrap();
        for trial in 0..60 {
            let n = 2 + trial % 2;
            let mut rows = Vec::new();
            for _ in 0..n {
                rows.push((0..n).map(|_| rng.gen_range(-1.0..1.0)).collect::<Vec<_>>());
            }
            let h = match Matrix::from_rows(&rows) {
                Ok(m) => m,
                Err(_) => continue,
            };
            if qr_decompose(&h).is_err() {
                continue;
            }
            let y: Vec<f64> = (0..n).map(|_| rng.gen_range(-4.0..7.0)).collect();
            let (z, d) = ml_sphere_decode(&h, &y, &cbox).unwrap();
            let (bz, bd) = brute_ml(&h, &y, &cbox);
            assert_eq!(z, bz, "trial {trial}");
            assert!((d - bd).abs() < 1e-9);
        }
    }

    #[test]
    fn equal_distances_pick_the_smaller_vector() {
        let h = Matrix::identity(2);
        let cbox = ConstellationBox::new(0, 1).unwrap();
        let (z, d) = ml_sphere_decode(&h, &[0.5, 0.5], &cbox).unwrap();
        assert_eq!(z, vec![0, 0]);
        assert!((d - 0.5f64 * 2.0f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn clean_input_is_recovered() {
        let h = Matrix::from_rows(&[vec![1.2, 0.4], vec![-0.3, 0.8]]).unwrap();
        let x = [3i64, 1];
        let y: Vec<f64> = (0..2)
            .map(|i| (0..2).map(|j| h[(i, j)] * x[j] as f64).sum())
            .collect();
        let cbox = ConstellationBox::new(0, 3).unwrap();
        let (z, d) = ml_sphere_decode(&h, &y, &cbox).unwrap();
        assert_eq!(z, x.to_vec());
        assert!(d < 1e-12);
    }

    #[test]
    fn radius_enumeration_matches_direct_filtering() {
        let h = Matrix::from_rows(&[vec![1.0, 0.2], vec![0.1, 0.9]]).unwrap();
        let y = [1.3f64, 0.4];
        let cbox = ConstellationBox::new(0, 3).unwrap();
        let radius = 1.4;
        let got = enumerate_radius(&h, &y, radius, &cbox).unwrap();
        let want: Vec<(Vec<i64>, f64)> = {
            let mut w: Vec<(Vec<i64>, f64)> = enumerate_box(&cbox, 2)
                .unwrap()
                .into_iter()
                .map(|z| {
                    let d = residual_norm2(&h, &y, &z).sqrt();
                    (z, d)
                })
                .filter(|(_, d)| *d <= radius)
                .collect();
            w.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then_with(|| a.0.cmp(&b.0)));
            w
        };
        assert_eq!(got.len(), want.len());
        for ((gz, gd), (wz, wd)) in got.iter().zip(&want) {
            assert_eq!(gz, wz);
            assert!((gd - wd).abs() < 1e-9);
        }
        assert!(enumerate_radius(&h, &y, -1.0, &cbox).is_err());
        assert!(enumerate_radius(&h, &y, 0.0, &cbox).unwrap().is_empty());
    }

    #[test]
    fn tall_systems_account_for_the_out_of_span_residual() {
        // Column space misses part of y; distances must still be measured
        // in the full space.
        let h = Matrix::from_rows(&[vec![1.0], vec![0.5], vec![0.0]]).unwrap();
        let y = [1.1f64, 0.55, 2.0];
        let cbox = ConstellationBox::new(-2, 2).unwrap();
        let (z, d) = ml_sphere_decode(&h, &y, &cbox).unwrap();
        assert_eq!(z, vec![1]);
        let exact = residual_norm2(&h, &y, &z).sqrt();
        assert!((d - exact).abs() < 1e-12);
        assert!(d > 1.9, "offset must appear in the distance");
        let hits = enumerate_radius(&h, &y, 2.1, &cbox).unwrap();
        assert_eq!(hits.first().map(|(z, _)| z.clone()), Some(vec![1]));
        assert!(enumerate_radius(&h, &y, 1.0, &cbox).unwrap().is_empty());
    }

    #[test]
    fn guards_refuse_exploding_enumerations() {
        assert!(matches!(
            enumerate_box(&ConstellationBox::new(0, 3).unwrap(), 11),
            Err(Error::GuardExceeded { .. })
        ));
        let box_big = ConstellationBox::new(0, 1i64 << 40).unwrap();
        assert!(box_big.point_count(4).is_err());
        assert_eq!(ConstellationBox::new(0, 3).unwrap().point_count(5).unwrap(), 1024);
        assert!(ConstellationBox::new(2, 1).is_err());
    }

    #[test]
    fn full_box_list_equals_the_exact_marginal() {
        let h = Matrix::from_rows(&[vec![1.0, 0.3], vec![-0.2, 0.9]]).unwrap();
        let y = [0.8f64, -0.6];
        let lab = BitLabeling::gray(4).unwrap();
        let exact = exact_map_llr(&h, &y, 0.7, &lab).unwrap();
        let all = enumerate_box(&ConstellationBox::from_levels(4).unwrap(), 2).unwrap();
        let listed = crate::llr::list_llr(&h, &y, 0.7, &all, &lab).unwrap();
        for (a, b) in exact.values.iter().zip(&listed.values) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(exact.clamped.iter().all(|&c| !c));
    }

    #[test]
    fn maxlog_tracks_the_exact_marginal_at_low_noise() {
        let h = Matrix::from_rows(&[vec![1.0, 0.25], vec![0.1, 0.8]]).unwrap();
        let y = [1.83f64, 0.41];
        let lab = BitLabeling::gray(4).unwrap();
        let exact = exact_map_llr(&h, &y, 0.05, &lab).unwrap();
        let approx = maxlog_llr(&h, &y, 0.05, &lab).unwrap();
        for (a, b) in exact.values.iter().zip(&approx.values) {
            // Both saturate at the clamp; compare there too.
            assert!((a - b).abs() < 1e-6, "{a} vs {b}");
        }
    }

    #[test]
    fn chain_probability_matches_the_per_level_tables() {
        let r = Matrix::from_rows(&[vec![1.0, 0.4], vec![0.0, 0.8]]).unwrap();
        let qr = QrFactors {
            q: Matrix::identity(2),
            r,
        };
        let y = [0.7, 0.52];
        let params = SamplerParams::from_rho(8.0_f64, 0.8, 2, 4.0).unwrap();
        let z = [1i64, 1];

        let x2 = 0.52 / 0.8;
        let t2 = candidate_probabilities(x2, params.level_scale(0.8), 2).unwrap();
        let x1 = 0.7 - 0.4 * 1.0;
        let t1 = candidate_probabilities(x1, params.level_scale(1.0), 2).unwrap();
        let want = t2.prob_of(1) * t1.prob_of(1);
        let got = exact_sampling_probability(&qr, &y, &z, &params).unwrap();
        assert!((got - want).abs() < 1e-14);
        assert!(got > 0.0);

        let far = exact_sampling_probability(&qr, &y, &[50, 1], &params).unwrap();
        assert_eq!(far, 0.0);
        assert!(exact_sampling_probability(&qr, &y, &[1], &params).is_err());
    }
}
