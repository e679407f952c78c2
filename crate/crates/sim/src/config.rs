//! Experiment configuration: what the CLI parses into and what the JSON
//! sidecar records.

use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecoderKind {
    Sic,
    Rand,
    Derand,
    TwoStage,
}

impl DecoderKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "sic" => Ok(DecoderKind::Sic),
            "rand" => Ok(DecoderKind::Rand),
            "derand" => Ok(DecoderKind::Derand),
            "two-stage" => Ok(DecoderKind::TwoStage),
            other => Err(CliError::config(format!(
                "unknown decoder '{}'; expected sic, rand, derand or two-stage",
                other
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BudgetMode {
    Literal,
    Strict,
}

impl BudgetMode {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "literal" => Ok(BudgetMode::Literal),
            "strict" => Ok(BudgetMode::Strict),
            other => Err(CliError::config(format!(
                "unknown mode '{}'; expected literal or strict",
                other
            ))),
        }
    }
}

impl From<BudgetMode> for sampdec_core::DerandMode {
    fn from(m: BudgetMode) -> Self {
        match m {
            BudgetMode::Literal => sampdec_core::DerandMode::Literal,
            BudgetMode::Strict => sampdec_core::DerandMode::Strict,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preprocessing {
    None,
    Lll,
    Mmse,
    LllMmse,
}

impl Preprocessing {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Preprocessing::None),
            "lll" => Ok(Preprocessing::Lll),
            "mmse" => Ok(Preprocessing::Mmse),
            "lll+mmse" => Ok(Preprocessing::LllMmse),
            other => Err(CliError::config(format!(
                "unknown preprocessing '{}'; expected none, lll, mmse or lll+mmse",
                other
            ))),
        }
    }
}

/// Concentration parameter choice: solved from the sample size or fixed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RhoChoice {
    Auto,
    Fixed(f64),
}

impl RhoChoice {
    pub fn parse(s: &str) -> Result<Self> {
        if s == "auto" {
            return Ok(RhoChoice::Auto);
        }
        s.parse::<f64>()
            .ok()
            .filter(|v| *v > 1.0 && v.is_finite())
            .map(RhoChoice::Fixed)
            .ok_or_else(|| {
                CliError::config(format!("--rho must be 'auto' or a number > 1, got '{}'", s))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecoderSpec {
    pub kind: DecoderKind,
    /// Nominal sample size K (ignored by plain SIC).
    pub k: f64,
    pub mode: BudgetMode,
    /// Window half-size N of the per-level rounding tables.
    pub truncation_n: usize,
    pub rho: RhoChoice,
    /// Branching depth for the two-stage decoder; None picks the smallest
    /// p with (p+1)^2 >= n.
    pub p: Option<usize>,
}

impl DecoderSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.k >= 1.0) || !self.k.is_finite() {
            return Err(CliError::config("K must be a finite number >= 1"));
        }
        if self.truncation_n == 0 {
            return Err(CliError::config("N must be at least 1"));
        }
        Ok(())
    }

    /// Draw count for the randomized decoder.
    pub fn draws(&self) -> u64 {
        self.k.round().max(1.0) as u64
    }

    /// Branching depth for the two-stage decoder over an `n_dec`-column
    /// system: the configured value, or the smallest p with (p+1)^2 >= n.
    pub fn branch_depth(&self, n_dec: usize) -> Result<usize> {
        let p = match self.p {
            Some(p) => p,
            None => sampdec_core::tuning::fsd_depth(n_dec)?,
        };
        if p > n_dec {
            return Err(CliError::config(format!(
                "ordering depth {} exceeds the system dimension {}",
                p, n_dec
            )));
        }
        Ok(p)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// Complex antenna count (square channel).
    pub n_c: usize,
    /// QAM order M (4, 16 or 64); Q = sqrt(M) levels per real dimension.
    pub modulation: u32,
    /// E_b/N_0 grid in dB.
    pub snr_db: Vec<f64>,
    pub decoder: DecoderSpec,
    pub preproc: Preprocessing,
    pub trials: u64,
    pub seed: u64,
    pub oracle_ml: bool,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_c == 0 {
            return Err(CliError::config("antenna count must be at least 1"));
        }
        if ![4, 16, 64].contains(&self.modulation) {
            return Err(CliError::config(format!(
                "modulation must be 4, 16 or 64 QAM, got {}",
                self.modulation
            )));
        }
        if self.trials == 0 {
            return Err(CliError::config("trials must be at least 1"));
        }
        if self.snr_db.is_empty() {
            return Err(CliError::config("SNR grid is empty"));
        }
        if self.snr_db.iter().any(|v| !v.is_finite()) {
            return Err(CliError::config("SNR values must be finite"));
        }
        self.decoder.validate()
    }

    /// Levels per real dimension.
    pub fn q_levels(&self) -> u64 {
        (self.modulation as f64).sqrt() as u64
    }

    /// Real-valued lattice dimension.
    pub fn real_dim(&self) -> usize {
        2 * self.n_c
    }
}

/// Parses `start:step:stop` (inclusive stop, forward steps) or a single
/// value into an SNR grid.
pub fn parse_snr_grid(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    let bad = || CliError::config(format!("bad --snr '{}'; use start:step:stop or a number", s));
    match parts.as_slice() {
        [one] => {
            let v: f64 = one.parse().map_err(|_| bad())?;
            if !v.is_finite() {
                return Err(bad());
            }
            Ok(vec![v])
        }
        [start, step, stop] => {
            let start: f64 = start.parse().map_err(|_| bad())?;
            let step: f64 = step.parse().map_err(|_| bad())?;
            let stop: f64 = stop.parse().map_err(|_| bad())?;
            if !(step > 0.0) || !start.is_finite() || !stop.is_finite() || stop < start {
                return Err(bad());
            }
            let mut grid = Vec::new();
            let mut i = 0u32;
            loop {
                let v = start + step * i as f64;
                if v > stop + 1e-9 {
                    break;
                }
                grid.push(v);
                i += 1;
                if i > 100_000 {
                    return Err(bad());
                }
            }
            Ok(grid)
        }
        _ => Err(bad()),
    }
}

/// Parses a comma-separated list of sample sizes for the K sweep.
pub fn parse_k_sweep(s: &str) -> Result<Vec<f64>> {
    let out: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| CliError::config(format!("bad --k-sweep '{}'", s)))?;
    if out.is_empty() || out.iter().any(|v| !(*v >= 1.0) || !v.is_finite()) {
        return Err(CliError::config("K sweep values must be finite and >= 1"));
    }
    Ok(out)
}
