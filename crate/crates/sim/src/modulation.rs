//! QAM mapping between bits, box coordinates and complex symbols.
//!
//! A square M-QAM symbol is two independent Q-PAM coordinates (Q = sqrt M),
//! each Gray-labeled. Internally every coordinate lives in the integer box
//! `{0, .., Q-1}`; on air it sits on the odd grid `{±1, ±3, ..}` scaled so
//! the average symbol energy is one.
//!
//! Bit order follows the real embedding `[Re(x); Im(x)]` coordinate-major:
//! the bits of real coordinate `i` occupy block `i` of the bit string.
//! This is exactly the convention the soft-output functions use, so a
//! decoded coordinate vector can be labeled directly.

use num_complex::Complex;
use rand::Rng;

use sampdec_core::{BitLabeling, ConstellationBox};

use crate::error::{CliError, Result};

/// Per-real-dimension amplitude scale putting mean complex-symbol energy
/// at one: alpha = sqrt(3 / (2 (Q^2 - 1))).
pub fn amplitude_scale(q: u64) -> f64 {
    (3.0 / (2.0 * ((q * q - 1) as f64))).sqrt()
}

#[derive(Debug, Clone, Copy)]
pub struct Modulation {
    q: u64,
    labeling: BitLabeling,
    alpha: f64,
}

impl Modulation {
    /// `m_level` is the QAM order M; Q = sqrt(M) must be a power of two.
    pub fn new(m_level: u32) -> Result<Self> {
        let q = (m_level as f64).sqrt().round() as u64;
        if q * q != m_level as u64 {
            return Err(CliError::config(format!(
                "modulation order {} is not a square",
                m_level
            )));
        }
        let labeling = BitLabeling::gray(q)
            .map_err(|e| CliError::config(format!("modulation order {}: {}", m_level, e)))?;
        Ok(Modulation {
            q,
            labeling,
            alpha: amplitude_scale(q),
        })
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn labeling(&self) -> &BitLabeling {
        &self.labeling
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn bits_per_coord(&self) -> usize {
        self.labeling.bits_per_coord()
    }

    /// Bits carried by `n_c` complex symbols.
    pub fn total_bits(&self, n_c: usize) -> usize {
        2 * n_c * self.bits_per_coord()
    }

    pub fn cbox(&self) -> ConstellationBox {
        ConstellationBox::from_levels(self.q).expect("q >= 2")
    }

    /// Box coordinates (length 2 n_c, `[Re; Im]` layout) from a
    /// coordinate-major bit string.
    pub fn coords_from_bits(&self, bits: &[u8]) -> Result<Vec<i64>> {
        let b = self.bits_per_coord();
        if bits.len() % (2 * b) != 0 {
            return Err(CliError::config(format!(
                "bit count {} is not a multiple of {} bits per symbol",
                bits.len(),
                2 * b
            )));
        }
        bits.chunks(b)
            .map(|chunk| self.labeling.level_of(chunk).map_err(CliError::from))
            .collect()
    }

    /// Coordinate-major bits of a box-coordinate vector.
    pub fn bits_from_coords(&self, coords: &[i64]) -> Result<Vec<u8>> {
        self.labeling.vector_bits(coords).map_err(CliError::from)
    }

    /// Odd-grid amplitude of one box coordinate.
    pub fn amplitude_of(&self, level: i64) -> f64 {
        self.alpha * (2 * level - (self.q as i64 - 1)) as f64
    }

    /// Complex symbols from `[Re; Im]` box coordinates.
    pub fn symbols_from_coords(&self, coords: &[i64]) -> Vec<Complex<f64>> {
        let n_c = coords.len() / 2;
        (0..n_c)
            .map(|i| {
                Complex::new(
                    self.amplitude_of(coords[i]),
                    self.amplitude_of(coords[n_c + i]),
                )
            })
            .collect()
    }

    /// Nearest box coordinates from complex symbols (hard per-dimension
    /// slicing).
    pub fn coords_from_symbols(&self, x: &[Complex<f64>]) -> Vec<i64> {
        let mut coords = vec![0i64; 2 * x.len()];
        let n_c = x.len();
        for (i, s) in x.iter().enumerate() {
            coords[i] = self.slice_one(s.re);
            coords[n_c + i] = self.slice_one(s.im);
        }
        coords
    }

    fn slice_one(&self, v: f64) -> i64 {
        let raw = ((v / self.alpha + (self.q as i64 - 1) as f64) / 2.0).round() as i64;
        raw.clamp(0, self.q as i64 - 1)
    }
}

/// Uniform random bits for data generation.
pub fn random_bits<R: Rng + ?Sized>(count: usize, rng: &mut R) -> Vec<u8> {
    (0..count).map(|_| rng.gen_range(0..2u8)).collect()
}
