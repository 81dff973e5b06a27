//! Binary-input AWGN channel with unit-energy antipodal signalling.
//!
//! Bit 0 is sent as +1 and bit 1 as −1; the noise variance is `1/γ`.

use crate::error::{invalid, Result};
use crate::rng::GaussianStream;

/// Linear SNR from decibels.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(gamma: f64) -> f64 {
    10.0 * gamma.log10()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    gamma: f64,
    seed: u64,
}

impl ChannelParams {
    pub fn new(gamma: f64, seed: u64) -> Result<Self> {
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(invalid(format!("SNR must be positive and finite, got {gamma}")));
        }
        Ok(Self { gamma, seed })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn noise_variance(&self) -> f64 {
        1.0 / self.gamma
    }

    /// LLR `ln P(0|y)/P(1|y) = 2γy`.
    pub fn llr(&self, y: f64) -> f64 {
        2.0 * self.gamma * y
    }
}

pub fn bpsk(bit: u8) -> f64 {
    1.0 - 2.0 * bit as f64
}

/// Sends `bits` using noise stream `stream_id` of the channel seed.
pub fn transmit_stream(bits: &[u8], params: &ChannelParams, stream_id: u64) -> Vec<f64> {
    let mut g = GaussianStream::new(params.seed, stream_id);
    let sd = params.noise_variance().sqrt();
    bits.iter().map(|&b| bpsk(b) + sd * g.standard()).collect()
}

/// Sends `bits` over the channel; deterministic in `params.seed`.
pub fn transmit(bits: &[u8], params: &ChannelParams) -> Vec<f64> {
    transmit_stream(bits, params, 0)
}

pub fn llr(y: f64, params: &ChannelParams) -> f64 {
    params.llr(y)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn db_conversions() {
        assert!((db_to_linear(-20.0) - 0.01).abs() < 1e-15);
        assert_eq!(db_to_linear(0.0), 1.0);
        assert!((db_to_linear(-30.0) - 0.001).abs() < 1e-16);
        assert!((linear_to_db(0.01) + 20.0).abs() < 1e-12);
    }

    #[test]
    fn high_snr_keeps_signs() {
        let p = ChannelParams::new(1e9, 3).unwrap();
        let bits = [0, 1, 1, 0, 1];
        for (y, b) in transmit(&bits, &p).iter().zip(bits) {
            assert!((y - bpsk(b)).abs() < 1e-3);
        }
    }

    #[test]
    fn llr_basics() {
        let p = ChannelParams::new(0.3, 0).unwrap();
        assert_eq!(p.llr(0.0), 0.0);
        assert_eq!(p.llr(-1.7), -p.llr(1.7));
        assert!(ChannelParams::new(0.0, 0).is_err());
        assert!(ChannelParams::new(f64::INFINITY, 0).is_err());
    }

    #[test]
    fn transmit_is_deterministic() {
        let p = ChannelParams::new(0.5, 42).unwrap();
        let bits = vec![0u8; 100];
        assert_eq!(transmit(&bits, &p), transmit(&bits, &p));
        assert_ne!(transmit_stream(&bits, &p, 1), transmit(&bits, &p));
    }
}
