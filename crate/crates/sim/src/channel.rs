//! Flat-fading channel and noise generation.

use num_complex::Complex;
use rand::Rng;
use rand_distr::StandardNormal;

use sampdec_core::complex::CMatrix;

/// Square channel matrix with i.i.d. circularly-symmetric unit-variance
/// complex Gaussian entries (real and imaginary parts carry 1/2 each).
pub fn gen_channel<R: Rng + ?Sized>(n_c: usize, rng: &mut R) -> CMatrix<f64> {
    let s = 0.5f64.sqrt();
    let mut h = CMatrix::zeros(n_c, n_c);
    for i in 0..n_c {
        for j in 0..n_c {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            h.set(i, j, Complex::new(re * s, im * s));
        }
    }
    h
}

/// Noise variance per complex dimension for a target E_b/N_0:
/// sigma^2 = n_c / (log2(M) * 10^(dB/10)).
pub fn ebn0_to_noise_var(ebn0_db: f64, n_c: usize, m_level: u32) -> f64 {
    let bits = (m_level as f64).log2();
    n_c as f64 / (bits * 10f64.powf(ebn0_db / 10.0))
}

/// Per-real-dimension noise standard deviation: the complex variance
/// splits evenly between the real and imaginary parts.
pub fn ebn0_to_sigma(ebn0_db: f64, n_c: usize, m_level: u32) -> f64 {
    (ebn0_to_noise_var(ebn0_db, n_c, m_level) / 2.0).sqrt()
}

/// Real-embedded noise vector of length `dim` with per-component
/// deviation `sigma_r`.
pub fn gen_noise<R: Rng + ?Sized>(dim: usize, sigma_r: f64, rng: &mut R) -> Vec<f64> {
    (0..dim)
        .map(|_| {
            let g: f64 = rng.sample(StandardNormal);
            g * sigma_r
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn fixed_seeds_reproduce_the_channel() {
        let a = gen_channel(3, &mut ChaCha8Rng::seed_from_u64(5));
        let b = gen_channel(3, &mut ChaCha8Rng::seed_from_u64(5));
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(a.get(i, j), b.get(i, j));
            }
        }
    }

    #[test]
    fn entry_statistics_match_the_model() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let n = 100_000usize;
        let mut sum_sq = 0.0;
        let mut cross = 0.0;
        let mut count = 0usize;
        while count < n {
            let h = gen_channel(10, &mut rng);
            for i in 0..10 {
                for j in 0..10 {
                    let v = h.get(i, j);
                    sum_sq += v.norm_sqr();
                    cross += v.re * v.im;
                    count += 1;
                }
            }
        }
        let var = sum_sq / count as f64;
        // Var of |h|^2 is 1 for CN(0,1), so the mean of n samples has
        // deviation 1/sqrt(n).
        let tol = 3.0 / (count as f64).sqrt();
        assert!((var - 1.0).abs() < tol, "variance {var}");
        let corr = cross / count as f64;
        assert!(corr.abs() < 3.0 * 0.5 / (count as f64).sqrt(), "corr {corr}");
    }

    #[test]
    fn snr_conversion_hand_values() {
        // 0 dB, 10 antennas, 64-QAM: 10 / 6.
        assert!((ebn0_to_noise_var(0.0, 10, 64) - 10.0 / 6.0).abs() < 1e-12);
        // 10 dB, 4 antennas, 16-QAM: 4 / (4 * 10) = 0.1.
        assert!((ebn0_to_noise_var(10.0, 4, 16) - 0.1).abs() < 1e-12);
        // +3.0103 dB halves the variance.
        let a = ebn0_to_noise_var(5.0, 4, 16);
        let b = ebn0_to_noise_var(5.0 + 10.0 * 2f64.log10(), 4, 16);
        assert!((a / b - 2.0).abs() < 1e-9);
        // The per-real-dimension deviation carries half the variance.
        let s = ebn0_to_sigma(10.0, 4, 16);
        assert!((s * s - 0.05).abs() < 1e-12);
    }

    #[test]
    fn noise_calibration_over_many_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(123);
        let sigma = ebn0_to_sigma(7.0, 4, 16);
        let n = 100_000;
        let w = gen_noise(n, sigma, &mut rng);
        let var: f64 = w.iter().map(|v| v * v).sum::<f64>() / n as f64;
        // Var of g^2 is 2 sigma^4; 3-sigma band around sigma^2.
        let tol = 3.0 * (2.0f64).sqrt() * sigma * sigma / (n as f64).sqrt();
        assert!(
            (var - sigma * sigma).abs() < tol,
            "sample variance {var} vs {}",
            sigma * sigma
        );
    }
}
