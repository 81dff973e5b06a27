//! Reproducible random streams.
//!
//! Every random quantity in the crate is drawn from a ChaCha8 stream that is
//! addressed by `(seed, stream)`. Two streams with different ids never
//! overlap, so per-trial and per-symbol generators can be created in any
//! order (or concurrently) without changing results.

use rand::{Rng, RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finaliser.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Derives an independent child seed, e.g. one per Monte-Carlo trial.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    splitmix64(seed ^ splitmix64(index ^ 0xD1B5_4A32_D192_ED03))
}

/// Generator for stream `stream` of `seed`.
pub fn stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Standard normal sampler using the Box–Muller transform.
///
/// Values come in pairs; the second one of each pair is cached.
#[derive(Debug, Clone, Default)]
pub struct BoxMuller {
    spare: Option<f64>,
}

impl BoxMuller {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn sample<R: Rng + ?Sized>(&mut self, rng: &mut R) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        // u1 in (0, 1] keeps the logarithm finite.
        let u1 = 1.0 - rng.random::<f64>();
        let u2 = rng.random::<f64>();
        let r = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (std::f64::consts::TAU * u2).sin_cos();
        self.spare = Some(r * s);
        r * c
    }
}

/// A ChaCha stream bundled with a Box–Muller sampler.
#[derive(Debug, Clone)]
pub struct GaussianStream {
    rng: ChaCha8Rng,
    normal: BoxMuller,
}

impl GaussianStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        Self {
            rng: stream(seed, stream_id),
            normal: BoxMuller::new(),
        }
    }

    /// Draws from N(0, 1).
    pub fn standard(&mut self) -> f64 {
        self.normal.sample(&mut self.rng)
    }

    /// Draws from N(mean, variance).
    pub fn normal(&mut self, mean: f64, variance: f64) -> f64 {
        mean + variance.sqrt() * self.standard()
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }
}

/// `count` uniformly random bits from stream `stream_id` of `seed`.
pub fn random_bits(seed: u64, stream_id: u64, count: usize) -> Vec<u8> {
    let mut rng = stream(seed, stream_id);
    let mut bits = Vec::with_capacity(count);
    while bits.len() < count {
        let word = rng.next_u64();
        let take = (count - bits.len()).min(64);
        bits.extend((0..take).map(|i| ((word >> i) & 1) as u8));
    }
    bits
}
