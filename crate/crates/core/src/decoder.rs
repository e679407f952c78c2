//! Hard-output lattice decoders on a triangular system `y' = R x + n'`.
//!
//! Four decoders share the same per-level machinery:
//!
//! * [`sic_decode`] - plain successive interference cancellation: round
//!   each level's zero-forcing estimate and move on.
//! * [`randomized_decode`] - draws `k` independent root-to-leaf paths,
//!   rounding each level randomly from its Gaussian window.
//! * [`derandomized_decode`] - replaces the random draws by a
//!   deterministic tree walk. Each level's window probabilities are
//!   converted to expected visit counts under the remaining budget; counts
//!   below one are pruned, a count of one finishes the path by hard
//!   decisions, larger counts split the budget and recurse. The output is
//!   a duplicate-free candidate list whose size never exceeds the nominal
//!   sample size.
//! * [`two_stage_decode`] - orders the columns so the worst-conditioned
//!   ones are detected first, branches only over the top `p` levels and
//!   finishes every path by hard decisions.
//!
//! Budget handling comes in two flavors ([`DerandMode`]):
//!
//! * `Literal` rounds the expected count per child (halves away from
//!   zero) and additionally keeps the most probable child alive at every
//!   level, so the hard-decision path always survives and the decoder
//!   degenerates to exactly [`sic_decode`] at `K = 1`.
//! * `Strict` keeps every child whose expected count is at least 1/2,
//!   without rounding and without the hard-decision shortcut. This
//!   realizes the guarantee that every vector whose sampling probability
//!   reaches `1/(2K)` appears in the list.

use std::collections::HashMap;

use rand::Rng;

use crate::error::{Error, Result};
use crate::gaussian::{candidate_probabilities, random_round, SamplerParams};
use crate::matrix::Matrix;
use crate::qr::{qr_decompose, QrFactors};
use crate::scalar::{round_ties_away, round_to_i64, Real};

/// Budget-handling flavor of the derandomized tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerandMode {
    Literal,
    Strict,
}

/// Configuration of the derandomized decoders.
#[derive(Debug, Clone, Copy)]
pub struct DerandConfig<T> {
    /// Nominal sample size `K >= 1`; need not be an integer.
    pub nominal_k: T,
    pub mode: DerandMode,
    pub sampler: SamplerParams<T>,
}

/// One decoded integer point.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate<T> {
    /// Integer coordinates, index `i` belonging to detection level `i+1`.
    pub z: Vec<i64>,
    /// Euclidean residual `||y' - R z||` in the decoded system.
    pub dist: T,
    /// Log of the chain sampling probability of the path; zero for
    /// decoders that make deterministic decisions.
    pub log_prob: T,
}

/// Duplicate-free list of decoded points.
#[derive(Debug, Clone)]
pub struct CandidateList<T> {
    pub items: Vec<Candidate<T>>,
    /// Sum of `exp(log_prob)` over the items; at most 1 for tree decoders.
    pub total_prob: T,
}

impl<T: Real> CandidateList<T> {
    pub fn from_items(items: Vec<Candidate<T>>) -> Self {
        let total_prob = items
            .iter()
            .map(|c| c.log_prob.exp())
            .fold(T::zero(), |a, b| a + b);
        CandidateList { items, total_prob }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// The minimum-distance candidate; ties go to the lexicographically
    /// smallest integer vector.
    pub fn best(&self) -> Option<&Candidate<T>> {
        self.items.iter().min_by(|a, b| {
            a.dist
                .partial_cmp(&b.dist)
                .unwrap_or(core::cmp::Ordering::Equal)
                .then_with(|| a.z.cmp(&b.z))
        })
    }

    pub fn contains(&self, z: &[i64]) -> bool {
        self.items.iter().any(|c| c.z == z)
    }
}

/// Coarse work counters for one decode call.
#[derive(Debug, Clone, Copy)]
pub struct DecodeStats<T> {
    /// Number of window-probability evaluations.
    pub tables_evaluated: u64,
    /// Number of tree nodes visited (branching levels only).
    pub nodes_visited: u64,
    /// Probability mass dropped at pruned branches.
    pub pruned_mass: T,
}

impl<T: Real> Default for DecodeStats<T> {
    fn default() -> Self {
        DecodeStats {
            tables_evaluated: 0,
            nodes_visited: 0,
            pruned_mass: T::zero(),
        }
    }
}

/// Output of [`randomized_decode`]: the collapsed list plus how many of
/// the `k` draws landed on each item.
#[derive(Debug, Clone)]
pub struct RandomizedOutcome<T> {
    pub list: CandidateList<T>,
    /// Draw multiplicities aligned with `list.items`; they sum to `k`.
    pub draws: Vec<u32>,
}

fn check_system<T: Real>(qr: &QrFactors<T>, y_prime: &[T]) -> Result<usize> {
    let n = qr.r.cols();
    if qr.r.rows() != n {
        return Err(Error::dimension("triangular factor must be square"));
    }
    if y_prime.len() != n {
        return Err(Error::dimension(format!(
            "y' has length {} but the system has {} levels",
            y_prime.len(),
            n
        )));
    }
    for i in 0..n {
        if !(qr.r[(i, i)] > T::zero()) {
            return Err(Error::parameter(
                "triangular factor must have positive diagonal entries",
            ));
        }
    }
    Ok(n)
}

pub(crate) fn zf_estimate<T: Real>(r: &Matrix<T>, y: &[T], z: &[i64], idx: usize) -> T {
    let n = r.cols();
    let mut acc = y[idx];
    for j in idx + 1..n {
        acc = acc - r[(idx, j)] * T::of(z[j] as f64);
    }
    acc / r[(idx, idx)]
}

/// Successive interference cancellation from the last level down.
pub fn sic_decode<T: Real>(qr: &QrFactors<T>, y_prime: &[T]) -> Result<Candidate<T>> {
    let n = check_system(qr, y_prime)?;
    let mut z = vec![0i64; n];
    let mut dist2 = T::zero();
    for idx in (0..n).rev() {
        let x = zf_estimate(&qr.r, y_prime, &z, idx);
        let v = round_to_i64(x);
        z[idx] = v;
        let e = qr.r[(idx, idx)] * (x - T::of(v as f64));
        dist2 = dist2 + e * e;
    }
    Ok(Candidate {
        z,
        dist: dist2.sqrt(),
        log_prob: T::zero(),
    })
}

/// Draws `k` independent sampler paths and collapses duplicates.
pub fn randomized_decode<T: Real, R: Rng + ?Sized>(
    qr: &QrFactors<T>,
    y_prime: &[T],
    k: u64,
    params: &SamplerParams<T>,
    rng: &mut R,
) -> Result<RandomizedOutcome<T>> {
    let n = check_system(qr, y_prime)?;
    if k == 0 {
        return Err(Error::parameter("draw count must be at least 1"));
    }
    let mut items: Vec<Candidate<T>> = Vec::new();
    let mut draws: Vec<u32> = Vec::new();
    let mut seen: HashMap<Vec<i64>, usize> = HashMap::new();

    let mut z = vec![0i64; n];
    for _ in 0..k {
        let mut dist2 = T::zero();
        let mut logp = T::zero();
        for idx in (0..n).rev() {
            let x = zf_estimate(&qr.r, y_prime, &z, idx);
            let c = params.level_scale(qr.r[(idx, idx)]);
            let table = candidate_probabilities(x, c, params.truncation_n)?;
            let v = random_round(&table, rng);
            z[idx] = v;
            logp = logp + table.prob_of(v).ln();
            let e = qr.r[(idx, idx)] * (x - T::of(v as f64));
            dist2 = dist2 + e * e;
        }
        if let Some(&pos) = seen.get(&z) {
            draws[pos] += 1;
        } else {
            seen.insert(z.clone(), items.len());
            items.push(Candidate {
                z: z.clone(),
                dist: dist2.sqrt(),
                log_prob: logp,
            });
            draws.push(1);
        }
    }
    Ok(RandomizedOutcome {
        list: CandidateList::from_items(items),
        draws,
    })
}

struct TreeWalker<'a, T> {
    r: &'a Matrix<T>,
    y: &'a [T],
    c: Vec<T>,
    n_trunc: usize,
    mode: DerandMode,
    /// Levels with index below this are finished by hard decisions.
    branch_floor: usize,
    z: Vec<i64>,
    items: Vec<Candidate<T>>,
    stats: DecodeStats<T>,
}

impl<'a, T: Real> TreeWalker<'a, T> {
    fn emit(&mut self, dist2: T, logp: T) {
        self.items.push(Candidate {
            z: self.z.clone(),
            dist: dist2.sqrt(),
            log_prob: logp,
        });
    }

    /// Finishes the path from `idx` down by hard decisions, accumulating
    /// the exact chain probability of the rounded choices.
    fn hard_finish(&mut self, idx: usize, mut dist2: T, mut logp: T) -> Result<()> {
        for i in (0..=idx).rev() {
            let x = zf_estimate(self.r, self.y, &self.z, i);
            let table = candidate_probabilities(x, self.c[i], self.n_trunc)?;
            self.stats.tables_evaluated += 1;
            let v = round_to_i64(x);
            self.z[i] = v;
            logp = logp + table.prob_of(v).ln();
            let e = self.r[(i, i)] * (x - T::of(v as f64));
            dist2 = dist2 + e * e;
        }
        self.emit(dist2, logp);
        Ok(())
    }

    fn child(&mut self, idx: usize, budget: T, dist2: T, logp: T) -> Result<()> {
        if idx == 0 {
            self.emit(dist2, logp);
        } else if idx - 1 < self.branch_floor {
            self.hard_finish(idx - 1, dist2, logp)?;
        } else {
            self.descend(idx - 1, budget, dist2, logp)?;
        }
        Ok(())
    }

    fn descend(&mut self, idx: usize, budget: T, dist2: T, logp: T) -> Result<()> {
        self.stats.nodes_visited += 1;
        let x = zf_estimate(self.r, self.y, &self.z, idx);
        let table = candidate_probabilities(x, self.c[idx], self.n_trunc)?;
        self.stats.tables_evaluated += 1;
        let one = T::one();
        let half = T::of(0.5);
        let argmax = match self.mode {
            DerandMode::Literal => table.argmax_idx(),
            DerandMode::Strict => usize::MAX,
        };

        for j in 0..table.len() {
            let p = table.probs[j];
            let cand = table.candidates[j];
            let e_lvl = self.r[(idx, idx)] * (x - T::of(cand as f64));
            let d2 = dist2 + e_lvl * e_lvl;
            let lp = logp + p.ln();
            match self.mode {
                DerandMode::Literal => {
                    let mut e = round_ties_away(budget * p);
                    if j == argmax && e < one {
                        // The most probable child always survives; this is
                        // what reduces the decoder to plain successive
                        // cancellation at K = 1.
                        e = one;
                    }
                    if e < one {
                        self.stats.pruned_mass = self.stats.pruned_mass + logp.exp() * p;
                        continue;
                    }
                    self.z[idx] = cand;
                    if e == one {
                        if idx == 0 {
                            self.emit(d2, lp);
                        } else {
                            self.hard_finish(idx - 1, d2, lp)?;
                        }
                    } else {
                        self.child(idx, budget * p, d2, lp)?;
                    }
                }
                DerandMode::Strict => {
                    let kp = budget * p;
                    if kp >= half {
                        self.z[idx] = cand;
                        self.child(idx, kp, d2, lp)?;
                    } else {
                        self.stats.pruned_mass = self.stats.pruned_mass + logp.exp() * p;
                    }
                }
            }
        }
        Ok(())
    }
}

fn derand_tree<T: Real>(
    qr: &QrFactors<T>,
    y_prime: &[T],
    cfg: &DerandConfig<T>,
    branch_depth: usize,
) -> Result<(CandidateList<T>, DecodeStats<T>)> {
    let n = check_system(qr, y_prime)?;
    if !(cfg.nominal_k >= T::one()) || !cfg.nominal_k.is_finite() {
        return Err(Error::parameter(format!(
            "nominal sample size must be at least 1, got {}",
            cfg.nominal_k
        )));
    }
    let c: Vec<T> = (0..n)
        .map(|i| cfg.sampler.level_scale(qr.r[(i, i)]))
        .collect();
    let mut walker = TreeWalker {
        r: &qr.r,
        y: y_prime,
        c,
        n_trunc: cfg.sampler.truncation_n,
        mode: cfg.mode,
        branch_floor: n - branch_depth.min(n),
        z: vec![0i64; n],
        items: Vec::new(),
        stats: DecodeStats::default(),
    };
    if branch_depth == 0 {
        walker.hard_finish(n - 1, T::zero(), T::zero())?;
    } else {
        walker.descend(n - 1, cfg.nominal_k, T::zero(), T::zero())?;
    }
    Ok((CandidateList::from_items(walker.items), walker.stats))
}

/// Deterministic tree expansion of the sampler over all levels.
pub fn derandomized_decode<T: Real>(
    qr: &QrFactors<T>,
    y_prime: &[T],
    cfg: &DerandConfig<T>,
) -> Result<CandidateList<T>> {
    Ok(derand_tree(qr, y_prime, cfg, qr.r.cols())?.0)
}

/// [`derandomized_decode`] with work counters.
pub fn derandomized_decode_with_stats<T: Real>(
    qr: &QrFactors<T>,
    y_prime: &[T],
    cfg: &DerandConfig<T>,
) -> Result<(CandidateList<T>, DecodeStats<T>)> {
    derand_tree(qr, y_prime, cfg, qr.r.cols())
}

/// Detection ordering for fixed-complexity decoding.
///
/// Positions are filled in detection order (last column first). The first
/// `p` picks take the remaining column with the largest post-processing
/// noise amplification, i.e. the largest diagonal entry of the residual
/// system's `(H^T H)^-1`; the remaining picks take the smallest, which is
/// the classic V-BLAST rule. Equal scores prefer the larger column index,
/// so fully symmetric inputs keep the identity order.
///
/// Returns `perm` with `perm[i]` = original column placed at position `i`.
pub fn fsd_order<T: Real>(h: &Matrix<T>, p: usize) -> Result<Vec<usize>> {
    let n = h.cols();
    if p > n {
        return Err(Error::parameter(format!(
            "expansion depth {} exceeds dimension {}",
            p, n
        )));
    }
    let mut remaining: Vec<usize> = (0..n).collect();
    let mut perm = vec![0usize; n];
    for step in 0..n {
        let pos = n - 1 - step;
        let pick = if remaining.len() == 1 {
            0
        } else {
            let sub = h.select_cols(&remaining);
            let gram = sub.transpose().matmul(&sub)?;
            let ginv = gram
                .inverse()
                .map_err(|_| Error::singular("residual system lost column rank"))?;
            let want_max = step < p;
            let mut best = 0usize;
            for t in 1..remaining.len() {
                let s = ginv[(t, t)];
                let b = ginv[(best, best)];
                let better = if want_max { s > b } else { s < b };
                if better || (s == b && remaining[t] > remaining[best]) {
                    best = t;
                }
            }
            best
        };
        perm[pos] = remaining.remove(pick);
    }
    Ok(perm)
}

/// Fixed-complexity two-stage decoding: order the columns, branch the
/// sampler tree over the top `p` levels only, finish by hard decisions.
///
/// The returned candidates are expressed in the original column order of
/// `h`; their distances are residuals of the ordered triangular system.
pub fn two_stage_decode<T: Real>(
    h: &Matrix<T>,
    y: &[T],
    p: usize,
    cfg: &DerandConfig<T>,
) -> Result<CandidateList<T>> {
    Ok(two_stage_decode_with_stats(h, y, p, cfg)?.0)
}

/// [`two_stage_decode`] with work counters.
pub fn two_stage_decode_with_stats<T: Real>(
    h: &Matrix<T>,
    y: &[T],
    p: usize,
    cfg: &DerandConfig<T>,
) -> Result<(CandidateList<T>, DecodeStats<T>)> {
    let perm = fsd_order(h, p)?;
    let h_perm = h.select_cols(&perm);
    let qr = qr_decompose(&h_perm)?;
    let y_prime = qr.project(y)?;
    let (list, stats) = derand_tree(&qr, &y_prime, cfg, p)?;
    let n = h.cols();
    let items = list
        .items
        .into_iter()
        .map(|c| {
            let mut z = vec![0i64; n];
            for (i, &col) in perm.iter().enumerate() {
                z[col] = c.z[i];
            }
            Candidate { z, ..c }
        })
        .collect();
    Ok((CandidateList::from_items(items), stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn tri(rows: &[Vec<f64>]) -> QrFactors<f64> {
        let r = Matrix::from_rows(rows).unwrap();
        QrFactors {
            q: Matrix::identity(r.rows()),
            r,
        }
    }

    fn params(rho: f64, min_rii: f64, k: f64) -> SamplerParams<f64> {
        SamplerParams::from_rho(rho, min_rii, 2, k).unwrap()
    }

    #[test]
    fn sic_matches_the_hand_recursion() {
        let qr = tri(&[vec![2.0, 1.0], vec![0.0, 1.0]]);
        let c = sic_decode(&qr, &[2.2, 1.6]).unwrap();
        // Level 2: 1.6 -> 2; level 1: (2.2 - 2)/2 = 0.1 -> 0.
        assert_eq!(c.z, vec![0, 2]);
        let expect = ((2.0 * 0.1f64).powi(2) + (1.0 * -0.4f64).powi(2)).sqrt();
        assert!((c.dist - expect).abs() < 1e-12);
        assert_eq!(c.log_prob, 0.0);

        let qr1 = tri(&[vec![1.0]]);
        assert_eq!(sic_decode(&qr1, &[2.4]).unwrap().z, vec![2]);
        assert_eq!(sic_decode(&qr1, &[2.5]).unwrap().z, vec![3]);
        assert_eq!(sic_decode(&qr1, &[-0.5]).unwrap().z, vec![-1]);
    }

    #[test]
    fn derandomized_with_unit_budget_is_sic() {
        let systems = [
            tri(&[
                vec![1.3, -0.4, 0.9],
                vec![0.0, 0.8, 0.2],
                vec![0.0, 0.0, 1.7],
            ]),
            tri(&[vec![0.6, 0.3], vec![0.0, 2.2]]),
        ];
        let ys: [&[f64]; 2] = [&[0.7, -1.9, 2.45], &[0.31, -0.55]];
        for (qr, y) in systems.iter().zip(ys) {
            let cfg = DerandConfig {
                nominal_k: 1.0,
                mode: DerandMode::Literal,
                sampler: params(130.0, qr.min_diag(), 1.0),
            };
            let list = derandomized_decode(qr, y, &cfg).unwrap();
            assert_eq!(list.len(), 1);
            assert_eq!(list.items[0].z, sic_decode(qr, y).unwrap().z);
        }
    }

    #[test]
    fn noiseless_input_is_always_in_the_list() {
        let qr = tri(&[
            vec![1.1, 0.5, -0.3],
            vec![0.0, 0.9, 0.4],
            vec![0.0, 0.0, 1.4],
        ]);
        let x = [2i64, -1, 3];
        let y: Vec<f64> = (0..3)
            .map(|i| (0..3).map(|j| qr.r[(i, j)] * x[j] as f64).sum())
            .collect();
        for mode in [DerandMode::Literal, DerandMode::Strict] {
            let cfg = DerandConfig {
                nominal_k: 4.0,
                mode,
                sampler: params(20.0, qr.min_diag(), 4.0),
            };
            let list = derandomized_decode(&qr, &y, &cfg).unwrap();
            assert!(list.contains(&x));
            let best = list.best().unwrap();
            assert_eq!(best.z, x.to_vec());
            assert!(best.dist < 1e-9);
        }
    }

    #[test]
    fn lists_are_duplicate_free_and_probability_bounded() {
        let qr = tri(&[
            vec![0.7, 0.2, -0.1, 0.4],
            vec![0.0, 0.65, 0.3, -0.2],
            vec![0.0, 0.0, 0.8, 0.1],
            vec![0.0, 0.0, 0.0, 0.75],
        ]);
        let y = [0.53, -0.48, 1.22, -0.91];
        for mode in [DerandMode::Literal, DerandMode::Strict] {
            let cfg = DerandConfig {
                nominal_k: 40.0,
                mode,
                sampler: params(3.0, qr.min_diag(), 40.0),
            };
            let (list, stats) = derandomized_decode_with_stats(&qr, &y, &cfg).unwrap();
            assert!(!list.is_empty());
            let mut seen: Vec<&[i64]> = list.items.iter().map(|c| c.z.as_slice()).collect();
            seen.sort();
            seen.dedup();
            assert_eq!(seen.len(), list.len(), "{mode:?} emitted duplicates");
            assert!(list.total_prob <= 1.0 + 1e-9);
            assert!(list.total_prob + stats.pruned_mass <= 1.0 + 1e-9);
            assert!(stats.tables_evaluated > 0);
            for c in &list.items {
                assert!(c.log_prob <= 0.0);
                let d2 = crate::matrix::residual_norm2(&qr.r, &y, &c.z);
                assert!((d2.sqrt() - c.dist).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn literal_list_always_contains_the_sic_path() {
        // Awkward centers (near half-integers) at several budgets.
        let qr = tri(&[
            vec![0.9, 0.33, -0.41],
            vec![0.0, 1.05, 0.27],
            vec![0.0, 0.0, 0.6],
        ]);
        let targets: [&[f64]; 3] = [
            &[0.45, -0.525, 0.3],
            &[1.35, 0.9, -0.3001],
            &[-0.45, 0.525, 0.8999],
        ];
        for y in targets {
            let sic = sic_decode(&qr, y).unwrap();
            for k in [1.0, 2.0, 7.0, 33.0] {
                let cfg = DerandConfig {
                    nominal_k: k,
                    mode: DerandMode::Literal,
                    sampler: params(8.0, qr.min_diag(), k),
                };
                let list = derandomized_decode(&qr, y, &cfg).unwrap();
                assert!(list.contains(&sic.z), "k={k} lost the SIC path");
                assert!(list.best().unwrap().dist <= sic.dist + 1e-12);
            }
        }
    }

    #[test]
    fn strict_lists_grow_with_the_budget() {
        let qr = tri(&[
            vec![0.8, -0.2, 0.5],
            vec![0.0, 0.7, 0.15],
            vec![0.0, 0.0, 0.9],
        ]);
        let y = [0.41, 0.77, -1.13];
        let mut prev: Option<CandidateList<f64>> = None;
        for k in [1.0, 4.0, 16.0, 64.0] {
            let cfg = DerandConfig {
                nominal_k: k,
                mode: DerandMode::Strict,
                sampler: params(5.0, qr.min_diag(), k),
            };
            let list = derandomized_decode(&qr, &y, &cfg).unwrap();
            if let Some(p) = prev {
                for c in &p.items {
                    assert!(list.contains(&c.z), "k={k} dropped a smaller-budget item");
                }
            }
            prev = Some(list);
        }
    }

    #[test]
    fn randomized_collapses_repetitions() {
        let qr = tri(&[vec![1.2, 0.4], vec![0.0, 0.9]]);
        let y = [0.6, 0.45];
        let p = params(6.0, 0.9, 32.0);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let out = randomized_decode(&qr, &y, 32, &p, &mut rng).unwrap();
        assert_eq!(out.draws.iter().map(|&d| d as u64).sum::<u64>(), 32);
        assert_eq!(out.draws.len(), out.list.len());
        let mut zs: Vec<&[i64]> = out.list.items.iter().map(|c| c.z.as_slice()).collect();
        zs.sort();
        zs.dedup();
        assert_eq!(zs.len(), out.list.len());
        assert!(out.list.total_prob <= 1.0 + 1e-9);

        // A huge concentration makes every draw the hard-decision point
        // (centers are kept well away from half-integers here).
        let tight = params(1e12, 0.9, 4.0);
        let yt = [0.96, 0.18];
        let out = randomized_decode(&qr, &yt, 16, &tight, &mut rng).unwrap();
        assert_eq!(out.list.len(), 1);
        assert_eq!(out.draws, vec![16]);
        assert_eq!(out.list.items[0].z, sic_decode(&qr, &yt).unwrap().z);
    }

    #[test]
    fn ordering_is_identity_on_symmetric_input() {
        let h = Matrix::<f64>::identity(4);
        for p in 0..=4 {
            assert_eq!(fsd_order(&h, p).unwrap(), vec![0, 1, 2, 3]);
        }
    }

    #[test]
    fn ordering_follows_the_noise_amplification_scores() {
        // Orthogonal columns with norms 3, 1, 2: the inverse-Gram diagonal
        // is (1/9, 1, 1/4), so the worst column is 1 and the best is 0.
        let h = Matrix::from_rows(&[
            vec![3.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 2.0],
        ])
        .unwrap();
        // Pure best-first: detect 0 first (position 2), then 2, then 1.
        assert_eq!(fsd_order(&h, 0).unwrap(), vec![1, 2, 0]);
        // One worst-first pick: 1 takes position 2, then best-first.
        assert_eq!(fsd_order(&h, 1).unwrap(), vec![2, 0, 1]);
        // All worst-first: 1, then 2, then 0.
        assert_eq!(fsd_order(&h, 3).unwrap(), vec![0, 2, 1]);
        assert!(fsd_order(&h, 4).is_err());
    }

    #[test]
    fn two_stage_with_no_branching_is_ordered_sic() {
        let h = Matrix::from_rows(&[
            vec![1.0, 0.4, -0.2],
            vec![0.3, 1.2, 0.5],
            vec![-0.1, 0.2, 0.9],
        ])
        .unwrap();
        let y = [0.83, -1.4, 0.52];
        let cfg = DerandConfig {
            nominal_k: 1.0,
            mode: DerandMode::Literal,
            sampler: params(50.0, 0.5, 1.0),
        };
        let list = two_stage_decode(&h, &y, 0, &cfg).unwrap();
        assert_eq!(list.len(), 1);

        let perm = fsd_order(&h, 0).unwrap();
        let hp = h.select_cols(&perm);
        let qr = qr_decompose(&hp).unwrap();
        let yp = qr.project(&y).unwrap();
        let sic = sic_decode(&qr, &yp).unwrap();
        let mut expect = vec![0i64; 3];
        for (i, &col) in perm.iter().enumerate() {
            expect[col] = sic.z[i];
        }
        assert_eq!(list.items[0].z, expect);
    }

    #[test]
    fn two_stage_full_depth_matches_the_plain_tree_on_the_ordered_system() {
        let h = Matrix::from_rows(&[
            vec![1.0, 0.4, -0.2],
            vec![0.3, 1.2, 0.5],
            vec![-0.1, 0.2, 0.9],
        ])
        .unwrap();
        let y = [0.83, -1.4, 0.52];
        let perm = fsd_order(&h, 3).unwrap();
        let hp = h.select_cols(&perm);
        let qr = qr_decompose(&hp).unwrap();
        let cfg = DerandConfig {
            nominal_k: 9.0,
            mode: DerandMode::Literal,
            sampler: params(4.0, qr.min_diag(), 9.0),
        };
        let direct = derandomized_decode(&qr, &qr.project(&y).unwrap(), &cfg).unwrap();
        let staged = two_stage_decode(&h, &y, 3, &cfg).unwrap();
        assert_eq!(staged.len(), direct.len());
        for (s, d) in staged.items.iter().zip(&direct.items) {
            for (i, &col) in perm.iter().enumerate() {
                assert_eq!(s.z[col], d.z[i]);
            }
            assert!((s.dist - d.dist).abs() < 1e-12);
            assert!((s.log_prob - d.log_prob).abs() < 1e-12);
        }
    }

    #[test]
    fn bad_arguments_are_rejected() {
        let qr = tri(&[vec![1.0, 0.2], vec![0.0, 1.0]]);
        let p = params(10.0, 1.0, 4.0);
        let cfg = DerandConfig {
            nominal_k: 0.5,
            mode: DerandMode::Literal,
            sampler: p,
        };
        assert!(derandomized_decode(&qr, &[0.1, 0.2], &cfg).is_err());
        assert!(sic_decode(&qr, &[0.1]).is_err());
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(randomized_decode(&qr, &[0.1, 0.2], 0, &p, &mut rng).is_err());

        let bad = tri(&[vec![1.0, 0.0], vec![0.0, -1.0]]);
        assert!(sic_decode(&bad, &[0.1, 0.2]).is_err());
    }
}
