//! Rateless reverse reconciliation for CV-QKD and key-rate bookkeeping.
//!
//! Bob draws fresh quantum-channel bits `X1` for every block, Alice observes
//! them through the equivalent BI-AWGN channel, and Bob publishes the mask
//! `X3 = X1 ⊕ C` where `C` is the next block of Raptor output bits for his key.
//! Alice turns her channel LLRs for `X1` into LLRs for `C` by flipping signs
//! where the mask is one, then decodes. Blocks follow the [`BlockSchedule`]
//! until Alice acknowledges or the block cap is reached.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::bpsk;
use crate::codec::{build_precoder, BlockSchedule, DecodeSession, DecoderConfig, PrecodeSpec, RaptorCode, Restart};
use crate::degree::DegreeDistribution;
use crate::error::{invalid, Result};
use crate::exit::{capacity, CapacityModel};
use crate::rng::{derive_seed, random_bits, stream, GaussianStream};

/// Physical parameters of a Gaussian-modulated CV-QKD link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CvqkdParams {
    /// Modulation variance V_A in shot-noise units.
    pub va: f64,
    /// Excess noise ε_n.
    pub excess_noise: f64,
    /// Homodyne efficiency η_h.
    pub homodyne_efficiency: f64,
    /// Electronic noise v_el.
    pub electronic_noise: f64,
    /// Fibre loss in dB/km.
    pub attenuation_db_per_km: f64,
    pub distance_km: f64,
}

impl CvqkdParams {
    /// Loss 0.2 dB/km, η_h = 0.6, ε_n = v_el = 0.01.
    pub fn fiber(va: f64, distance_km: f64) -> Self {
        Self {
            va,
            excess_noise: 0.01,
            homodyne_efficiency: 0.6,
            electronic_noise: 0.01,
            attenuation_db_per_km: 0.2,
            distance_km,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("va", self.va),
            ("excess_noise", self.excess_noise),
            ("homodyne_efficiency", self.homodyne_efficiency),
            ("electronic_noise", self.electronic_noise),
            ("attenuation_db_per_km", self.attenuation_db_per_km),
            ("distance_km", self.distance_km),
        ];
        for (name, v) in fields {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(invalid(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        if self.homodyne_efficiency > 1.0 {
            return Err(invalid("homodyne efficiency must not exceed 1"));
        }
        Ok(())
    }

    /// T = 10^(−loss · distance / 10).
    pub fn transmittance(&self) -> f64 {
        10f64.powf(-self.attenuation_db_per_km * self.distance_km / 10.0)
    }

    pub fn with_distance(mut self, distance_km: f64) -> Self {
        self.distance_km = distance_km;
        self
    }

    pub fn with_va(mut self, va: f64) -> Self {
        self.va = va;
        self
    }
}

/// γ = V_A T η_h / (2 + ε_n T η_h + 2 v_el).
pub fn equivalent_snr(p: &CvqkdParams) -> Result<f64> {
    p.validate()?;
    let t_eta = p.transmittance() * p.homodyne_efficiency;
    let den = 2.0 + p.excess_noise * t_eta + 2.0 * p.electronic_noise;
    if !(den > 0.0) {
        return Err(invalid("nonpositive SNR denominator"));
    }
    Ok(p.va * t_eta / den)
}

/// `(1 − p_w)(η I_AB − I_E)`, clamped at zero.
pub fn key_rate(eta: f64, i_ab: f64, i_e: f64, p_w: f64) -> Result<f64> {
    for (name, v) in [("eta", eta), ("I_AB", i_ab), ("I_E", i_e)] {
        if !(v >= 0.0) || !v.is_finite() {
            return Err(invalid(format!("{name} must be finite and >= 0, got {v}")));
        }
    }
    if !(0.0..=1.0).contains(&p_w) {
        return Err(invalid(format!("p_w must lie in [0, 1], got {p_w}")));
    }
    Ok(((1.0 - p_w) * (eta * i_ab - i_e)).max(0.0))
}

/// Code and decoder settings for a reconciliation session.
#[derive(Debug, Clone)]
pub struct ReconciliationConfig {
    pub precode: PrecodeSpec,
    pub distribution: DegreeDistribution,
    pub decoder: DecoderConfig,
    pub max_blocks: usize,
}

impl ReconciliationConfig {
    /// Decoder limits for `gamma` with a 20-iteration stall window and the
    /// 40-block cap.
    pub fn new(precode: PrecodeSpec, distribution: DegreeDistribution, gamma: f64) -> Self {
        let mut decoder = DecoderConfig::for_snr(gamma);
        decoder.stall_window = Some(20);
        Self {
            precode,
            distribution,
            decoder,
            max_blocks: crate::codec::DEFAULT_MAX_BLOCKS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Transcript {
    pub gamma: f64,
    pub capacity: f64,
    pub k: usize,
    /// Blocks sent before the acknowledgment (or the cap).
    pub blocks: usize,
    /// Sizes n_i of the blocks actually sent.
    pub block_sizes: Vec<usize>,
    /// Total disclosed mask bits, Σ n_i.
    pub n_total: usize,
    /// Decoder iterations summed over all attempts.
    pub decoder_iterations: usize,
    pub success: bool,
    /// Bob's key (the encoded message).
    pub bob_key: Vec<u8>,
    /// Alice's decoded key; meaningful only on success.
    pub alice_key: Vec<u8>,
}

impl Transcript {
    pub fn keys_match(&self) -> bool {
        self.success && self.alice_key == self.bob_key
    }

    /// (k / n_total) / C.
    pub fn efficiency(&self) -> f64 {
        self.k as f64 / self.n_total as f64 / self.capacity
    }
}

/// One session at the equivalent SNR of `params`.
pub fn run_reconciliation(params: &CvqkdParams, config: &ReconciliationConfig, seed: u64) -> Result<Transcript> {
    run_reconciliation_at_snr(equivalent_snr(params)?, config, seed)
}

/// One session over a BI-AWGN channel at linear SNR `gamma`.
///
/// Seed layout: precoder `derive_seed(seed, 0)`, LT generator 1, Bob's key 2,
/// quantum bits 3 and channel noise 4 (stream = block index).
pub fn run_reconciliation_at_snr(gamma: f64, config: &ReconciliationConfig, seed: u64) -> Result<Transcript> {
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(invalid(format!("SNR must be positive, got {gamma}")));
    }
    let cap = capacity(gamma, CapacityModel::BiAwgnExact)?;
    let schedule = BlockSchedule::with_max_blocks(config.precode.k, cap, config.max_blocks)?;
    let precoder = Arc::new(build_precoder(&config.precode, derive_seed(seed, 0))?);
    let code = RaptorCode::new(precoder, config.distribution.clone(), derive_seed(seed, 1))?;

    let bob_key = random_bits(seed, 2, code.k());
    let word = code.encode(&bob_key)?;
    let sd = (1.0 / gamma).sqrt();
    let mut session = DecodeSession::new(&code, config.decoder, Restart::Cold)?;
    let mut block_sizes = Vec::new();
    let mut decoder_iterations = 0;
    let mut result = None;

    for (block, n_i) in schedule.block_sizes().into_iter().enumerate() {
        let mut quantum = stream(derive_seed(seed, 3), block as u64);
        let mut noise = GaussianStream::new(derive_seed(seed, 4), block as u64);
        session.receive_with(n_i, |_, neighbours| {
            // Bob's side: fresh X1, public mask X3 = X1 ⊕ C.
            let x1 = rand::RngExt::random::<bool>(&mut quantum) as u8;
            let c = crate::codec::xor_at(&word, neighbours);
            let x3 = x1 ^ c;
            // Alice's side: LLR of X1 from her observation, sign-adjusted by X3.
            let y = bpsk(x1) + sd * noise.standard();
            let llr_x1 = 2.0 * gamma * y;
            llr_x1 * bpsk(x3)
        })?;
        block_sizes.push(n_i);
        let r = session.decode()?;
        decoder_iterations += r.iterations;
        let done = r.success;
        result = Some(r);
        if done {
            break;
        }
    }
    let r = result.expect("schedule has at least one block");
    Ok(Transcript {
        gamma,
        capacity: cap,
        k: code.k(),
        blocks: block_sizes.len(),
        n_total: block_sizes.iter().sum(),
        block_sizes,
        decoder_iterations,
        success: r.success,
        bob_key,
        alice_key: r.message,
    })
}

/// Eve's information I_E for a parameter point.
pub trait EveInformation: Sync {
    fn holevo(&self, params: &CvqkdParams) -> Result<f64>;
}

impl<F: Fn(&CvqkdParams) -> f64 + Sync> EveInformation for F {
    fn holevo(&self, params: &CvqkdParams) -> Result<f64> {
        Ok(self(params))
    }
}

/// I_E per distance, linearly interpolated between `(distance_km, i_e)`
/// points. Distances outside the table are an error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IeTable {
    pub points: Vec<(f64, f64)>,
}

impl IeTable {
    pub fn new(mut points: Vec<(f64, f64)>) -> Result<Self> {
        if points.is_empty() {
            return Err(invalid("I_E table is empty"));
        }
        if points.iter().any(|&(d, v)| !d.is_finite() || !(v >= 0.0) || !v.is_finite()) {
            return Err(invalid("I_E table entries must be finite with I_E >= 0"));
        }
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        if points.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(invalid("I_E table has duplicate distances"));
        }
        Ok(Self { points })
    }

    /// I_E = 0 at every distance.
    pub fn zero() -> Self {
        Self {
            points: vec![(0.0, 0.0), (f64::MAX, 0.0)],
        }
    }

    pub fn at(&self, distance_km: f64) -> Result<f64> {
        let p = &self.points;
        let (first, last) = (p[0], p[p.len() - 1]);
        if p.len() == 1 {
            return if distance_km == first.0 {
                Ok(first.1)
            } else {
                Err(invalid(format!("I_E table has no entry for {distance_km} km")))
            };
        }
        if !(distance_km >= first.0 && distance_km <= last.0) {
            return Err(invalid(format!(
                "{distance_km} km lies outside the I_E table [{}, {}]",
                first.0, last.0
            )));
        }
        let i = p.partition_point(|&(d, _)| d <= distance_km).clamp(1, p.len() - 1);
        let (d0, v0) = p[i - 1];
        let (d1, v1) = p[i];
        let t = (distance_km - d0) / (d1 - d0);
        Ok(v0 * (1.0 - t) + v1 * t)
    }
}

impl EveInformation for IeTable {
    fn holevo(&self, params: &CvqkdParams) -> Result<f64> {
        self.at(params.distance_km)
    }
}

/// Reconciliation efficiency as a function of the operating SNR.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EfficiencyModel {
    Constant(f64),
    /// `(snr_db, eta)` points, linearly interpolated and held constant
    /// beyond the ends.
    Table(Vec<(f64, f64)>),
}

impl EfficiencyModel {
    pub fn at(&self, gamma: f64) -> Result<f64> {
        let eta = match self {
            Self::Constant(e) => *e,
            Self::Table(points) => {
                if points.is_empty() {
                    return Err(invalid("efficiency table is empty"));
                }
                let mut p = points.clone();
                p.sort_by(|a, b| a.0.total_cmp(&b.0));
                let x = crate::channel::linear_to_db(gamma);
                if x <= p[0].0 {
                    p[0].1
                } else if x >= p[p.len() - 1].0 {
                    p[p.len() - 1].1
                } else {
                    let i = p.partition_point(|&(d, _)| d <= x);
                    let (x0, y0) = p[i - 1];
                    let (x1, y1) = p[i];
                    let t = (x - x0) / (x1 - x0);
                    y0 * (1.0 - t) + y1 * t
                }
            }
        };
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(invalid(format!("efficiency must lie in (0, 1], got {eta}")));
        }
        Ok(eta)
    }
}

/// A key-rate sweep over distance with V_A optimized per point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    /// Link parameters; `va` and `distance_km` are overridden by the grids.
    pub params: CvqkdParams,
    pub distances_km: Vec<f64>,
    pub va_grid: Vec<f64>,
    pub efficiency: EfficiencyModel,
    /// Frame-error probability; zero for rateless reconciliation.
    #[serde(default)]
    pub p_w: f64,
    #[serde(default)]
    pub capacity_model: CapacityModel,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KeyRateRecord {
    pub distance_km: f64,
    pub va: f64,
    pub gamma: f64,
    pub eta: f64,
    pub i_ab: f64,
    pub i_e: f64,
    pub key_rate: f64,
}

/// Best key rate over the V_A grid at every distance. Ties keep the smaller
/// V_A.
pub fn key_rate_vs_distance(config: &SweepConfig, eve: &dyn EveInformation) -> Result<Vec<KeyRateRecord>> {
    if config.distances_km.is_empty() || config.va_grid.is_empty() {
        return Err(invalid("sweep needs at least one distance and one V_A"));
    }
    config
        .distances_km
        .par_iter()
        .map(|&d| {
            let mut best: Option<KeyRateRecord> = None;
            for &va in &config.va_grid {
                let p = config.params.with_distance(d).with_va(va);
                let r = operating_point(&p, config, eve)?;
                if best.is_none_or(|b| r.key_rate > b.key_rate) {
                    best = Some(r);
                }
            }
            Ok(best.expect("V_A grid is nonempty"))
        })
        .collect()
}

fn operating_point(p: &CvqkdParams, config: &SweepConfig, eve: &dyn EveInformation) -> Result<KeyRateRecord> {
    let gamma = equivalent_snr(p)?;
    let i_ab = if gamma > 0.0 { capacity(gamma, config.capacity_model)? } else { 0.0 };
    let eta = config.efficiency.at(gamma.max(f64::MIN_POSITIVE))?;
    let i_e = eve.holevo(p)?;
    Ok(KeyRateRecord {
        distance_km: p.distance_km,
        va: p.va,
        gamma,
        eta,
        i_ab,
        i_e,
        key_rate: key_rate(eta, i_ab, i_e, config.p_w)?,
    })
}
