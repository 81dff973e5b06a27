//! Monte-Carlo measurement of rate efficiency over the BI-AWGN channel.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use super::decoder::DecoderConfig;
use super::lt::xor_at;
use super::precoder::{build_precoder, PrecodeSpec};
use super::schedule::BlockSchedule;
use super::session::{DecodeSession, RaptorCode, Restart};
use crate::channel::bpsk;
use crate::degree::DegreeDistribution;
use crate::error::{invalid, Result};
use crate::exit::{capacity, CapacityModel};
use crate::rng::{derive_seed, random_bits, GaussianStream};

#[derive(Debug, Clone)]
pub struct EfficiencyConfig {
    pub precode: PrecodeSpec,
    pub distribution: DegreeDistribution,
    /// Linear SNR γ.
    pub gamma: f64,
    pub trials: usize,
    pub seed: u64,
    pub max_blocks: usize,
    pub decoder: DecoderConfig,
    pub restart: Restart,
}

impl EfficiencyConfig {
    /// Decoder limits for `gamma`, a 20-iteration stall window and cold
    /// restarts between blocks.
    pub fn new(precode: PrecodeSpec, distribution: DegreeDistribution, gamma: f64, trials: usize, seed: u64) -> Self {
        let mut decoder = DecoderConfig::for_snr(gamma);
        decoder.stall_window = Some(20);
        Self {
            precode,
            distribution,
            gamma,
            trials,
            seed,
            max_blocks: super::schedule::DEFAULT_MAX_BLOCKS,
            decoder,
            restart: Restart::Cold,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub trial: usize,
    /// Symbols consumed when decoding stopped.
    pub n: usize,
    pub blocks: usize,
    pub iterations: usize,
    pub success: bool,
    /// Decoded message equals the transmitted one.
    pub correct: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EfficiencyReport {
    pub gamma: f64,
    pub k: usize,
    pub trials: usize,
    pub capacity: f64,
    pub mean_n: f64,
    pub realized_rate: f64,
    pub efficiency: f64,
    /// Fraction of trials that failed or decoded to a wrong message.
    pub wer: f64,
    pub records: Vec<TrialRecord>,
}

/// Runs `config.trials` independent transfers. Trial `t` uses seed
/// `derive_seed(config.seed, t)`; the precoder is shared.
pub fn measure_efficiency(config: &EfficiencyConfig) -> Result<EfficiencyReport> {
    if config.trials == 0 {
        return Err(invalid("trials must be at least 1"));
    }
    if !(config.gamma > 0.0) || !config.gamma.is_finite() {
        return Err(invalid("SNR must be positive"));
    }
    let cap = capacity(config.gamma, CapacityModel::BiAwgnExact)?;
    let schedule = BlockSchedule::with_max_blocks(config.precode.k, cap, config.max_blocks)?;
    let precoder = Arc::new(build_precoder(&config.precode, config.seed)?);
    // Fail fast on a distribution the LT generator cannot use.
    RaptorCode::new(precoder.clone(), config.distribution.clone(), 0)?;

    let records: Vec<TrialRecord> = (0..config.trials)
        .into_par_iter()
        .map(|t| run_trial(config, &precoder, &schedule, t))
        .collect::<Result<_>>()?;

    let k = config.precode.k;
    let mean_n = records.iter().map(|r| r.n as f64).sum::<f64>() / records.len() as f64;
    let realized_rate = k as f64 / mean_n;
    let failures = records.iter().filter(|r| !(r.success && r.correct)).count();
    Ok(EfficiencyReport {
        gamma: config.gamma,
        k,
        trials: config.trials,
        capacity: cap,
        mean_n,
        realized_rate,
        efficiency: realized_rate / cap,
        wer: failures as f64 / records.len() as f64,
        records,
    })
}

fn run_trial(
    config: &EfficiencyConfig,
    precoder: &Arc<crate::codec::Precoder>,
    schedule: &BlockSchedule,
    trial: usize,
) -> Result<TrialRecord> {
    let seed = derive_seed(config.seed, trial as u64);
    let code = RaptorCode::new(precoder.clone(), config.distribution.clone(), derive_seed(seed, 1))?;
    let message = random_bits(seed, 2, code.k());
    let word = code.encode(&message)?;
    let noise_seed = derive_seed(seed, 3);
    let sd = (1.0 / config.gamma).sqrt();
    let two_gamma = 2.0 * config.gamma;

    let mut session = DecodeSession::new(&code, config.decoder, config.restart)?;
    let mut iterations = 0;
    let mut last = None;
    for (block, n_i) in schedule.block_sizes().into_iter().enumerate() {
        let mut noise = GaussianStream::new(noise_seed, block as u64);
        session.receive_with(n_i, |_, nb| two_gamma * (bpsk(xor_at(&word, nb)) + sd * noise.standard()))?;
        let r = session.decode()?;
        iterations += r.iterations;
        let done = r.success;
        last = Some((block + 1, r));
        if done {
            break;
        }
    }
    let (blocks, r) = last.expect("schedule has at least one block");
    Ok(TrialRecord {
        trial,
        n: r.symbols,
        blocks,
        iterations,
        success: r.success,
        correct: r.success && r.message == message,
    })
}
