//! BPSK over AWGN: SNR bookkeeping, modulation, and channel LLRs.
//!
//! The Gaussian stream is pinned to Box-Muller over `ChaCha8` uniforms so a
//! seed reproduces the same noise everywhere: each pair of uniforms in (0,1]
//! yields the pair (r·cosθ, r·sinθ), consumed in order, the trailing sample
//! dropped for odd counts.

use crate::scalar::LlrScalar;
use crate::seeds::unit_open;
use crate::L_MAX;
use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ChannelError {
    #[error("code rate must lie in (0, 1], got {0}")]
    RateRange(f64),
    #[error("noise level must be positive to form LLRs (sigma = 0 is noiseless)")]
    ZeroNoise,
    #[error("noise level must be finite and non-negative, got {0}")]
    SigmaRange(f64),
}

/// One operating point: Eb/N0 and Es/N0 in dB, the noise level, and the
/// code rate tying them together.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SnrPoint {
    ebn0_db: f64,
    esn0_db: f64,
    sigma: f64,
    rate: f64,
}

fn check_rate(rate: f64) -> Result<(), ChannelError> {
    if rate.is_finite() && rate > 0.0 && rate <= 1.0 {
        Ok(())
    } else {
        Err(ChannelError::RateRange(rate))
    }
}

impl SnrPoint {
    /// Builds the point from an energy-per-bit SNR and the code rate.
    pub fn from_ebn0(ebn0_db: f64, rate: f64) -> Result<Self, ChannelError> {
        check_rate(rate)?;
        let esn0_db = ebn0_db + 10.0 * rate.log10();
        let sigma = (2.0 * 10f64.powf(esn0_db / 10.0)).recip().sqrt();
        Ok(Self { ebn0_db, esn0_db, sigma, rate })
    }

    /// Builds the point from an energy-per-symbol SNR and the code rate.
    pub fn from_esn0(esn0_db: f64, rate: f64) -> Result<Self, ChannelError> {
        check_rate(rate)?;
        let ebn0_db = esn0_db - 10.0 * rate.log10();
        let sigma = (2.0 * 10f64.powf(esn0_db / 10.0)).recip().sqrt();
        Ok(Self { ebn0_db, esn0_db, sigma, rate })
    }

    /// Builds the point from the noise level directly. `sigma = 0` denotes a
    /// noiseless channel (both SNR fields become +inf); useful in tests.
    pub fn from_sigma(sigma: f64, rate: f64) -> Result<Self, ChannelError> {
        check_rate(rate)?;
        if !sigma.is_finite() || sigma < 0.0 {
            return Err(ChannelError::SigmaRange(sigma));
        }
        let esn0_db = -10.0 * (2.0 * sigma * sigma).log10();
        let ebn0_db = esn0_db - 10.0 * rate.log10();
        Ok(Self { ebn0_db, esn0_db, sigma, rate })
    }

    pub fn ebn0_db(&self) -> f64 {
        self.ebn0_db
    }

    pub fn esn0_db(&self) -> f64 {
        self.esn0_db
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }
}

/// Standard normal samples via the pinned Box-Muller layout.
pub fn standard_gaussians(rng: &mut ChaCha8Rng, count: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(count + 1);
    while out.len() < count {
        let u1 = unit_open(rng);
        let u2 = unit_open(rng);
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = std::f64::consts::TAU * u2;
        out.push(r * theta.cos());
        out.push(r * theta.sin());
    }
    out.truncate(count);
    out
}

/// BPSK-modulates `bits` and adds seeded Gaussian noise.
///
/// The noise rides on the modulated symbol: y_v = (−1)^{x_v}·(1 + z_v) with
/// z_v i.i.d. N(0, σ²). Since (−1)^{x_v}·z_v has the same law, this is the
/// usual AWGN channel, but per seed the received word is exactly the
/// sign-flipped all-zero transmission, which makes codeword-vs-all-zero
/// pairings bit-reproducible rather than merely equal in distribution.
pub fn transmit(bits: &[u8], point: SnrPoint, seed: u64) -> Vec<f64> {
    debug_assert!(bits.iter().all(|&b| b <= 1));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = standard_gaussians(&mut rng, bits.len());
    bits.iter()
        .zip(noise)
        .map(|(&b, z)| bpsk(b) * (1.0 + point.sigma * z))
        .collect()
}

/// Maps a bit to its unit-energy BPSK symbol.
pub fn bpsk(bit: u8) -> f64 {
    1.0 - 2.0 * f64::from(bit)
}

/// Channel LLRs L_v = 2·y_v/σ², clamped to ±L_MAX.
pub fn channel_llr<T: LlrScalar>(received: &[f64], point: SnrPoint) -> Result<Vec<T>, ChannelError> {
    if point.sigma == 0.0 {
        return Err(ChannelError::ZeroNoise);
    }
    let var = point.sigma * point.sigma;
    Ok(received
        .iter()
        .map(|&y| T::from_f64_c((2.0 * y / var).clamp(-L_MAX, L_MAX)))
        .collect())
}

/// Saturated LLRs for a known word: ±L_MAX by bit value.
pub fn noiseless_llr<T: LlrScalar>(bits: &[u8]) -> Vec<T> {
    bits.iter()
        .map(|&b| T::from_f64_c(if b == 0 { L_MAX } else { -L_MAX }))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeds::{below, rng_for};

    // 1. Grid-to-axis conversion at the rate-1/7 operating points.
    #[test]
    fn esn0_conversion_matches_reported_axis() {
        let p = SnrPoint::from_ebn0(1.0, 0.143).unwrap();
        assert!((p.esn0_db() - -7.45).abs() < 0.01);
        let p = SnrPoint::from_ebn0(4.5, 0.143).unwrap();
        assert!((p.esn0_db() - -3.94).abs() < 0.01);
        let p = SnrPoint::from_ebn0(3.25, 1.0).unwrap();
        assert_eq!(p.esn0_db(), 3.25);
    }

    // 2. The two dB constructors agree and invert each other.
    #[test]
    fn constructors_are_consistent() {
        let a = SnrPoint::from_ebn0(2.0, 0.5).unwrap();
        let b = SnrPoint::from_esn0(a.esn0_db(), 0.5).unwrap();
        assert!((a.ebn0_db() - b.ebn0_db()).abs() < 1e-12);
        assert_eq!(a.sigma(), b.sigma());
        let c = SnrPoint::from_sigma(a.sigma(), 0.5).unwrap();
        assert!((c.esn0_db() - a.esn0_db()).abs() < 1e-9);
    }

    // 3. Higher Eb/N0 means less noise.
    #[test]
    fn snr_is_monotone_in_sigma() {
        let mut last = f64::INFINITY;
        for ebn0 in [1.0, 2.0, 3.0, 4.0, 4.5, 5.0] {
            let sigma = SnrPoint::from_ebn0(ebn0, 0.143).unwrap().sigma();
            assert!(sigma < last);
            last = sigma;
        }
    }

    // 4. Rates outside (0,1] are rejected.
    #[test]
    fn invalid_rates_are_rejected() {
        for rate in [0.0, -0.25, 1.01, f64::NAN] {
            assert!(matches!(
                SnrPoint::from_ebn0(1.0, rate),
                Err(ChannelError::RateRange(_))
            ));
        }
    }

    // 5. Noiseless transmission is exact BPSK.
    #[test]
    fn noiseless_transmit_is_pure_bpsk() {
        let point = SnrPoint::from_sigma(0.0, 1.0).unwrap();
        let y = transmit(&[0, 1, 1, 0], point, 9);
        assert_eq!(y, vec![1.0, -1.0, -1.0, 1.0]);
    }

    // 6. Empirical noise moments match sigma^2 within 2%.
    #[test]
    fn sample_variance_matches_sigma() {
        let point = SnrPoint::from_ebn0(2.0, 0.5).unwrap();
        let n = 100_000;
        let y = transmit(&vec![0u8; n], point, 12345);
        let mean = y.iter().sum::<f64>() / n as f64;
        let var = y.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
        assert!((mean - 1.0).abs() < 0.01, "mean {mean}");
        let sigma2 = point.sigma() * point.sigma();
        assert!((var - sigma2).abs() < 0.02 * sigma2, "var {var} vs {sigma2}");
    }

    // 7. LLR closed form against the density-ratio definition.
    #[test]
    fn llr_matches_density_ratio() {
        let log_ratio = |y: f64, sigma: f64| {
            let d0 = (-(y - 1.0) * (y - 1.0) / (2.0 * sigma * sigma)).exp();
            let d1 = (-(y + 1.0) * (y + 1.0) / (2.0 * sigma * sigma)).exp();
            (d0 / d1).ln()
        };
        let p1 = SnrPoint::from_sigma(1.0, 1.0).unwrap();
        let l: Vec<f64> = channel_llr(&[1.0, 0.0], p1).unwrap();
        assert!((l[0] - 2.0).abs() < 1e-12);
        assert!((l[0] - log_ratio(1.0, 1.0)).abs() < 1e-9);
        assert_eq!(l[1], 0.0);
        let p2 = SnrPoint::from_sigma(0.8, 1.0).unwrap();
        let l: Vec<f64> = channel_llr(&[-0.5], p2).unwrap();
        assert!((l[0] - -1.5625).abs() < 1e-9);
        assert!((l[0] - log_ratio(-0.5, 0.8)).abs() < 1e-9);
    }

    // 8. Channel LLRs saturate at the global clamp.
    #[test]
    fn llr_is_clamped() {
        let point = SnrPoint::from_sigma(0.1, 1.0).unwrap();
        let l: Vec<f64> = channel_llr(&[1.0, -1.0], point).unwrap();
        assert_eq!(l, vec![L_MAX, -L_MAX]);
        assert!(matches!(
            channel_llr::<f64>(&[1.0], SnrPoint::from_sigma(0.0, 1.0).unwrap()),
            Err(ChannelError::ZeroNoise)
        ));
    }

    // 9. Saturated LLRs for known words.
    #[test]
    fn noiseless_llr_saturates_by_bit() {
        let l: Vec<f64> = noiseless_llr(&[0, 1, 0]);
        assert_eq!(l, vec![L_MAX, -L_MAX, L_MAX]);
    }

    // 10. Per-seed sign symmetry is exact, not just distributional.
    #[test]
    fn sign_symmetry_is_bitwise() {
        let point = SnrPoint::from_ebn0(2.0, 1.0 / 7.0).unwrap();
        let mut rng = rng_for(42, 0x5853, 0);
        let bits: Vec<u8> = (0..49).map(|_| below(&mut rng, 2) as u8).collect();
        let zeros = vec![0u8; 49];
        let l_x: Vec<f64> = channel_llr(&transmit(&bits, point, 777), point).unwrap();
        let l_0: Vec<f64> = channel_llr(&transmit(&zeros, point, 777), point).unwrap();
        for v in 0..49 {
            assert_eq!(l_x[v], bpsk(bits[v]) * l_0[v]);
        }
    }

    // 11. Transmission is deterministic per seed.
    #[test]
    fn transmit_is_deterministic() {
        let point = SnrPoint::from_ebn0(3.0, 0.5).unwrap();
        let a = transmit(&[0; 32], point, 5);
        let b = transmit(&[0; 32], point, 5);
        assert_eq!(a, b);
        let c = transmit(&[0; 32], point, 6);
        assert_ne!(a, c);
    }
}
