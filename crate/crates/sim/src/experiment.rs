//! Monte-Carlo engines: error-rate benchmarking, paired decoder
//! comparisons and soft-output fidelity against the exact posterior.
//!
//! Reproducibility contract: every trial derives its own RNG streams from
//! the master seed, the SNR index and the trial index, so results are
//! bit-identical no matter how trials are scheduled across workers. Trials
//! run in parallel, are collected in trial order and reduced sequentially;
//! floating-point accumulators therefore see a fixed association order.

use std::time::Instant;

use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use sampdec_core::tuning::lsd_radius;
use sampdec_core::{exact_map_llr, list_llr, ml_sphere_decode, EXHAUSTIVE_GUARD};

use crate::channel::{ebn0_to_sigma, gen_channel, gen_noise};
use crate::config::{DecoderKind, DecoderSpec, ExperimentConfig};
use crate::error::{CliError, Result};
use crate::modulation::{random_bits, Modulation};
use crate::pipeline::{build_box_system, decode_once, prepare, BoxSystem, Prepared};

/// Stream tag for channel, data and noise generation.
pub const STREAM_SCENE: u64 = 0;
/// Stream tag for decoder-internal randomness.
pub const STREAM_DECODER: u64 = 1;

/// Independent RNG for one (SNR point, trial, purpose) triple. The master
/// seed picks the key; the stream index separates the draws.
pub fn trial_rng(seed: u64, snr_idx: usize, trial: u64, purpose: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((snr_idx as u64) << 40) | (trial << 2) | purpose);
    rng
}

/// Aggregated counts for one SNR point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnrRow {
    pub snr_db: f64,
    pub trials: u64,
    pub bit_errors: u64,
    pub sym_errors: u64,
    pub frame_errors: u64,
    /// Trials whose best candidate equals the exact ML point; absent when
    /// the oracle is off.
    pub ml_agree: Option<u64>,
    pub mean_list_size: f64,
    pub wall_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub rows: Vec<SnrRow>,
}

/// One transmitted frame and everything needed to judge decisions on it.
struct Scene {
    sys: BoxSystem,
    bits: Vec<u8>,
    coords: Vec<i64>,
}

/// Draw order within the scene stream (channel, then data bits, then
/// noise) is part of the reproducibility contract; golden files depend
/// on it.
fn gen_scene(
    n_c: usize,
    modu: &Modulation,
    sigma_r: f64,
    rng: &mut ChaCha8Rng,
) -> Result<Scene> {
    let h_c = gen_channel(n_c, rng);
    let bits = random_bits(modu.total_bits(n_c), rng);
    let coords = modu.coords_from_bits(&bits)?;
    let x = modu.symbols_from_coords(&coords);
    let mut y_c = h_c.matvec(&x).map_err(CliError::from)?;
    let noise = gen_noise(2 * n_c, sigma_r, rng);
    for i in 0..n_c {
        y_c[i] += Complex::new(noise[i], noise[n_c + i]);
    }
    let sys = build_box_system(&h_c, &y_c, modu, sigma_r)?;
    Ok(Scene { sys, bits, coords })
}

struct ErrorCounts {
    bits: u64,
    syms: u64,
    frame: bool,
}

fn count_errors(modu: &Modulation, scene: &Scene, decided: &[i64]) -> Result<ErrorCounts> {
    let n_c = scene.coords.len() / 2;
    let hat_bits = modu.bits_from_coords(decided)?;
    let bits = scene
        .bits
        .iter()
        .zip(&hat_bits)
        .filter(|(a, b)| a != b)
        .count() as u64;
    let syms = (0..n_c)
        .filter(|&i| {
            decided[i] != scene.coords[i] || decided[n_c + i] != scene.coords[n_c + i]
        })
        .count() as u64;
    Ok(ErrorCounts {
        bits,
        syms,
        frame: decided != scene.coords,
    })
}

/// Decodes a prepared scene and guarantees a decision: a strict-budget
/// list can come back empty (every child mass below one half), in which
/// case the engine falls back to the plain cancellation point on the same
/// prepared system.
fn decide(
    sys: &BoxSystem,
    prep: &Prepared,
    spec: &DecoderSpec,
    rng: &mut ChaCha8Rng,
) -> Result<crate::pipeline::PipelineOutput> {
    let out = decode_once(sys, prep, spec, rng)?;
    if !out.list.is_empty() {
        return Ok(out);
    }
    let fallback = DecoderSpec {
        kind: DecoderKind::Sic,
        ..*spec
    };
    decode_once(sys, prep, &fallback, rng)
}

struct SerTrial {
    errors: ErrorCounts,
    ml_agree: Option<bool>,
    list_size: u64,
}

fn ser_trial(
    cfg: &ExperimentConfig,
    modu: &Modulation,
    sigma_r: f64,
    snr_idx: usize,
    trial: u64,
) -> Result<SerTrial> {
    let mut scene_rng = trial_rng(cfg.seed, snr_idx, trial, STREAM_SCENE);
    let scene = gen_scene(cfg.n_c, modu, sigma_r, &mut scene_rng)?;
    let prep = prepare(&scene.sys, cfg.preproc)?;
    let mut dec_rng = trial_rng(cfg.seed, snr_idx, trial, STREAM_DECODER);
    let out = decide(&scene.sys, &prep, &cfg.decoder, &mut dec_rng)?;
    let best = out.list.best().expect("decide() never returns empty").z.clone();
    let errors = count_errors(modu, &scene, &best)?;
    let ml_agree = if cfg.oracle_ml {
        let (ml, _) =
            ml_sphere_decode(&scene.sys.h_box, &scene.sys.y_box, &scene.sys.cbox())?;
        Some(ml == best)
    } else {
        None
    };
    Ok(SerTrial {
        errors,
        ml_agree,
        list_size: out.list.len() as u64,
    })
}

fn check_oracle_guard(cfg: &ExperimentConfig) -> Result<()> {
    if !cfg.oracle_ml {
        return Ok(());
    }
    let modu = Modulation::new(cfg.modulation)?;
    let count = modu
        .cbox()
        .point_count(cfg.real_dim())
        .map_err(CliError::from)?;
    if count > EXHAUSTIVE_GUARD {
        return Err(CliError::runtime(format!(
            "ML oracle requested over a box of {} points (guard is {})",
            count, EXHAUSTIVE_GUARD
        )));
    }
    Ok(())
}

/// Error-rate benchmark over the configured SNR grid.
pub fn run_ser_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    check_oracle_guard(cfg)?;
    let modu = Modulation::new(cfg.modulation)?;
    let mut rows = Vec::with_capacity(cfg.snr_db.len());
    for (snr_idx, &snr_db) in cfg.snr_db.iter().enumerate() {
        let sigma_r = ebn0_to_sigma(snr_db, cfg.n_c, cfg.modulation);
        let start = Instant::now();
        let outcomes: Vec<Result<SerTrial>> = (0..cfg.trials)
            .into_par_iter()
            .map(|t| ser_trial(cfg, &modu, sigma_r, snr_idx, t))
            .collect();
        let mut row = SnrRow {
            snr_db,
            trials: cfg.trials,
            bit_errors: 0,
            sym_errors: 0,
            frame_errors: 0,
            ml_agree: cfg.oracle_ml.then_some(0),
            mean_list_size: 0.0,
            wall_ms: 0,
        };
        let mut size_sum = 0u64;
        for outcome in outcomes {
            let t = outcome?;
            row.bit_errors += t.errors.bits;
            row.sym_errors += t.errors.syms;
            row.frame_errors += t.errors.frame as u64;
            if let (Some(acc), Some(hit)) = (row.ml_agree.as_mut(), t.ml_agree) {
                *acc += hit as u64;
            }
            size_sum += t.list_size;
        }
        row.mean_list_size = size_sum as f64 / cfg.trials as f64;
        row.wall_ms = start.elapsed().as_millis() as u64;
        rows.push(row);
    }
    Ok(ExperimentResult { rows })
}

/// One SNR point of a paired decoder comparison on shared channel, data
/// and noise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairedRow {
    pub snr_db: f64,
    pub trials: u64,
    pub distinct_derand: u64,
    pub distinct_rand: u64,
    pub sym_errors_derand: u64,
    pub sym_errors_rand: u64,
    pub wall_ms: u64,
}

impl PairedRow {
    pub fn mean_distinct_derand(&self) -> f64 {
        self.distinct_derand as f64 / self.trials as f64
    }

    pub fn mean_distinct_rand(&self) -> f64 {
        self.distinct_rand as f64 / self.trials as f64
    }
}

struct PairedTrial {
    distinct_derand: u64,
    distinct_rand: u64,
    sym_err_derand: u64,
    sym_err_rand: u64,
}

fn paired_trial(
    cfg: &ExperimentConfig,
    modu: &Modulation,
    sigma_r: f64,
    snr_idx: usize,
    trial: u64,
) -> Result<PairedTrial> {
    let mut scene_rng = trial_rng(cfg.seed, snr_idx, trial, STREAM_SCENE);
    let scene = gen_scene(cfg.n_c, modu, sigma_r, &mut scene_rng)?;
    let prep = prepare(&scene.sys, cfg.preproc)?;
    let mut dec_rng = trial_rng(cfg.seed, snr_idx, trial, STREAM_DECODER);

    let spec_d = DecoderSpec {
        kind: DecoderKind::Derand,
        ..cfg.decoder
    };
    let spec_r = DecoderSpec {
        kind: DecoderKind::Rand,
        ..cfg.decoder
    };
    let out_d = decide(&scene.sys, &prep, &spec_d, &mut dec_rng)?;
    let out_r = decide(&scene.sys, &prep, &spec_r, &mut dec_rng)?;
    let err_d = count_errors(modu, &scene, &out_d.list.best().unwrap().z)?;
    let err_r = count_errors(modu, &scene, &out_r.list.best().unwrap().z)?;
    Ok(PairedTrial {
        distinct_derand: out_d.list.len() as u64,
        distinct_rand: out_r.list.len() as u64,
        sym_err_derand: err_d.syms,
        sym_err_rand: err_r.syms,
    })
}

/// Runs the derandomized and the randomized decoder on identical scenes
/// at equal sample size, each with its own auto-tuned concentration.
/// The decoder kind in `cfg` is ignored; K, mode, N and rho are taken
/// from it.
pub fn run_paired_dominance(cfg: &ExperimentConfig) -> Result<Vec<PairedRow>> {
    cfg.validate()?;
    let modu = Modulation::new(cfg.modulation)?;
    let mut rows = Vec::with_capacity(cfg.snr_db.len());
    for (snr_idx, &snr_db) in cfg.snr_db.iter().enumerate() {
        let sigma_r = ebn0_to_sigma(snr_db, cfg.n_c, cfg.modulation);
        let start = Instant::now();
        let outcomes: Vec<Result<PairedTrial>> = (0..cfg.trials)
            .into_par_iter()
            .map(|t| paired_trial(cfg, &modu, sigma_r, snr_idx, t))
            .collect();
        let mut row = PairedRow {
            snr_db,
            trials: cfg.trials,
            distinct_derand: 0,
            distinct_rand: 0,
            sym_errors_derand: 0,
            sym_errors_rand: 0,
            wall_ms: 0,
        };
        for outcome in outcomes {
            let t = outcome?;
            row.distinct_derand += t.distinct_derand;
            row.distinct_rand += t.distinct_rand;
            row.sym_errors_derand += t.sym_err_derand;
            row.sym_errors_rand += t.sym_err_rand;
        }
        row.wall_ms = start.elapsed().as_millis() as u64;
        rows.push(row);
    }
    Ok(rows)
}

/// Soft-output fidelity of one (K, SNR) cell against the exact posterior.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LlrRow {
    pub k: f64,
    pub snr_db: f64,
    pub trials: u64,
    /// Bits entering the |delta| statistics (unclamped in the list LLR).
    pub compared_bits: u64,
    /// None when every bit of every trial was clamped.
    pub mean_abs_dllr: Option<f64>,
    pub max_abs_dllr: Option<f64>,
    /// Sign agreement with the exact posterior over all bits.
    pub sign_agreement: f64,
    /// Fraction of bits pinned by one-sided hypothesis sets.
    pub clamp_rate: f64,
    /// Mean list-size split at the list-sphere radius sqrt(n) sigma:
    /// candidates inside vs outside.
    pub mean_near: f64,
    pub mean_far: f64,
    pub wall_ms: u64,
}

struct LlrTrial {
    sum_abs: f64,
    max_abs: f64,
    compared: u64,
    agree: u64,
    total_bits: u64,
    clamped_bits: u64,
    near: u64,
    far: u64,
}

fn llr_trial(
    cfg: &ExperimentConfig,
    spec: &DecoderSpec,
    modu: &Modulation,
    sigma_r: f64,
    snr_idx: usize,
    trial: u64,
) -> Result<LlrTrial> {
    let mut scene_rng = trial_rng(cfg.seed, snr_idx, trial, STREAM_SCENE);
    let scene = gen_scene(cfg.n_c, modu, sigma_r, &mut scene_rng)?;
    let prep = prepare(&scene.sys, cfg.preproc)?;
    let mut dec_rng = trial_rng(cfg.seed, snr_idx, trial, STREAM_DECODER);
    let out = decide(&scene.sys, &prep, spec, &mut dec_rng)?;

    let sys = &scene.sys;
    let candidates: Vec<Vec<i64>> = out.list.items.iter().map(|c| c.z.clone()).collect();
    let approx = list_llr(
        &sys.h_box,
        &sys.y_box,
        sigma_r,
        &candidates,
        modu.labeling(),
    )?;
    let exact = exact_map_llr(&sys.h_box, &sys.y_box, sigma_r, modu.labeling())?;

    let mut t = LlrTrial {
        sum_abs: 0.0,
        max_abs: 0.0,
        compared: 0,
        agree: 0,
        total_bits: approx.values.len() as u64,
        clamped_bits: 0,
        near: 0,
        far: 0,
    };
    for i in 0..approx.values.len() {
        if approx.clamped[i] {
            t.clamped_bits += 1;
        } else {
            let d = (approx.values[i] - exact.values[i]).abs();
            t.sum_abs += d;
            t.max_abs = t.max_abs.max(d);
            t.compared += 1;
        }
        if (approx.values[i] >= 0.0) == (exact.values[i] >= 0.0) {
            t.agree += 1;
        }
    }
    let radius = lsd_radius(sys.dim(), sigma_r).map_err(CliError::from)?;
    for c in &out.list.items {
        if c.dist <= radius {
            t.near += 1;
        } else {
            t.far += 1;
        }
    }
    Ok(t)
}

/// Sweeps the sample size K at fixed channel statistics; every cell reuses
/// the same per-trial scenes, so differences across K reflect the list
/// alone.
pub fn run_llr_sweep(cfg: &ExperimentConfig, ks: &[f64]) -> Result<Vec<LlrRow>> {
    cfg.validate()?;
    if ks.is_empty() {
        return Err(CliError::config("K sweep is empty"));
    }
    let modu = Modulation::new(cfg.modulation)?;
    let count = modu
        .cbox()
        .point_count(cfg.real_dim())
        .map_err(CliError::from)?;
    if count > EXHAUSTIVE_GUARD {
        return Err(CliError::runtime(format!(
            "exact posterior requested over a box of {} points (guard is {})",
            count, EXHAUSTIVE_GUARD
        )));
    }
    let mut rows = Vec::new();
    for &k in ks {
        let spec = DecoderSpec {
            k,
            ..cfg.decoder
        };
        spec.validate()?;
        for (snr_idx, &snr_db) in cfg.snr_db.iter().enumerate() {
            let sigma_r = ebn0_to_sigma(snr_db, cfg.n_c, cfg.modulation);
            let start = Instant::now();
            let outcomes: Vec<Result<LlrTrial>> = (0..cfg.trials)
                .into_par_iter()
                .map(|t| llr_trial(cfg, &spec, &modu, sigma_r, snr_idx, t))
                .collect();
            let mut sum_abs = 0.0f64;
            let mut max_abs = 0.0f64;
            let mut compared = 0u64;
            let mut agree = 0u64;
            let mut total_bits = 0u64;
            let mut clamped_bits = 0u64;
            let mut near = 0u64;
            let mut far = 0u64;
            for outcome in outcomes {
                let t = outcome?;
                sum_abs += t.sum_abs;
                max_abs = max_abs.max(t.max_abs);
                compared += t.compared;
                agree += t.agree;
                total_bits += t.total_bits;
                clamped_bits += t.clamped_bits;
                near += t.near;
                far += t.far;
            }
            rows.push(LlrRow {
                k,
                snr_db,
                trials: cfg.trials,
                compared_bits: compared,
                mean_abs_dllr: (compared > 0).then(|| sum_abs / compared as f64),
                max_abs_dllr: (compared > 0).then_some(max_abs),
                sign_agreement: agree as f64 / total_bits as f64,
                clamp_rate: clamped_bits as f64 / total_bits as f64,
                mean_near: near as f64 / cfg.trials as f64,
                mean_far: far as f64 / cfg.trials as f64,
                wall_ms: start.elapsed().as_millis() as u64,
            });
        }
    }
    Ok(rows)
}
