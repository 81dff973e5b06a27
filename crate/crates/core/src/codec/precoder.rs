//! High-rate LDPC precoder.
//!
//! The parity-check matrix has a fixed column weight and is grown one column
//! at a time: each edge goes to the lightest check that does not close a
//! 4-cycle, with ties broken from a seeded random starting point. The matrix
//! is then brought to reduced row-echelon form over GF(2) to obtain a
//! systematic encoder; the non-pivot columns carry the message.

use rand::RngExt;

use crate::error::{invalid, Error, Result};
use crate::rng;

pub const DEFAULT_RATE: f64 = 0.95;
pub const DEFAULT_COLUMN_WEIGHT: usize = 3;
const MAX_ATTEMPTS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrecodeSpec {
    pub k: usize,
    pub rate: f64,
    pub column_weight: usize,
}

impl PrecodeSpec {
    pub fn new(k: usize, rate: f64) -> Result<Self> {
        let spec = Self {
            k,
            rate,
            column_weight: DEFAULT_COLUMN_WEIGHT,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(invalid("message length must be positive"));
        }
        if !(self.rate > 0.0 && self.rate < 1.0) {
            return Err(invalid(format!("precoder rate must lie in (0, 1), got {}", self.rate)));
        }
        if self.column_weight == 0 {
            return Err(invalid("column weight must be positive"));
        }
        if self.intermediate_len() <= self.k {
            return Err(invalid(format!(
                "rate {} leaves no parity bits for k = {}",
                self.rate, self.k
            )));
        }
        Ok(())
    }

    /// k' = round(k / rate).
    pub fn intermediate_len(&self) -> usize {
        (self.k as f64 / self.rate).round() as usize
    }

    pub fn parity_count(&self) -> usize {
        self.intermediate_len() - self.k
    }
}

/// Row of a GF(2) matrix packed into 64-bit words.
#[derive(Debug, Clone, PartialEq, Eq)]
struct BitRow(Vec<u64>);

impl BitRow {
    fn zeros(len: usize) -> Self {
        Self(vec![0; len.div_ceil(64)])
    }

    fn get(&self, i: usize) -> bool {
        (self.0[i / 64] >> (i % 64)) & 1 == 1
    }

    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    fn xor_assign(&mut self, other: &BitRow) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a ^= b;
        }
    }

    fn parity_and(&self, other: &[u64]) -> u8 {
        let ones: u32 = self.0.iter().zip(other).map(|(a, b)| (a & b).count_ones()).sum();
        (ones & 1) as u8
    }
}

fn pack(bits: &[u8]) -> Vec<u64> {
    let mut words = vec![0u64; bits.len().div_ceil(64)];
    for (i, &b) in bits.iter().enumerate() {
        words[i / 64] |= ((b & 1) as u64) << (i % 64);
    }
    words
}

#[derive(Debug, Clone, PartialEq)]
pub struct Precoder {
    spec: PrecodeSpec,
    /// Variable indices of each parity check, ascending.
    checks: Vec<Vec<u32>>,
    /// Intermediate positions carrying message bits, ascending.
    info_positions: Vec<u32>,
    /// Each parity position with the message bits it sums.
    parity_rules: Vec<(u32, BitRow)>,
    attempts: usize,
}

/// Builds a full-rank precoder deterministically from `seed`, retrying with
/// derived seeds when the random matrix is rank deficient.
pub fn build_precoder(spec: &PrecodeSpec, seed: u64) -> Result<Precoder> {
    spec.validate()?;
    let mut last_rank = 0;
    for attempt in 0..MAX_ATTEMPTS {
        let checks = grow_checks(spec, rng::derive_seed(seed, attempt as u64));
        match systematic_form(spec, &checks) {
            Ok((info_positions, parity_rules)) => {
                return Ok(Precoder {
                    spec: *spec,
                    checks,
                    info_positions,
                    parity_rules,
                    attempts: attempt + 1,
                })
            }
            Err(rank) => last_rank = rank,
        }
    }
    Err(Error::Construction {
        attempts: MAX_ATTEMPTS,
        reason: format!(
            "parity-check matrix rank {last_rank} < {} rows",
            spec.parity_count()
        ),
    })
}

fn grow_checks(spec: &PrecodeSpec, seed: u64) -> Vec<Vec<u32>> {
    let n = spec.intermediate_len();
    let m = spec.parity_count();
    // With no more checks than the column weight every column would be the
    // same, so tiny codes fall back to single-check columns.
    let weight = if m > spec.column_weight { spec.column_weight } else { 1 };
    let mut rng = rng::stream(seed, 0);
    let mut check_vars: Vec<Vec<u32>> = vec![Vec::new(); m];
    let mut var_checks: Vec<Vec<u32>> = vec![Vec::new(); n];
    let mut stamp = vec![usize::MAX; m];
    let mut stamp_id = 0;
    for v in 0..n {
        let mut chosen: Vec<u32> = Vec::with_capacity(weight);
        for _ in 0..weight {
            stamp_id += 1;
            for &c in &chosen {
                stamp[c as usize] = stamp_id;
                for &u in &check_vars[c as usize] {
                    for &c2 in &var_checks[u as usize] {
                        stamp[c2 as usize] = stamp_id;
                    }
                }
            }
            let start = rng.random_range(0..m);
            let pick = |allowed: &dyn Fn(usize) -> bool| {
                let mut best: Option<usize> = None;
                for off in 0..m {
                    let c = (start + off) % m;
                    if allowed(c) && best.is_none_or(|b| check_vars[c].len() < check_vars[b].len()) {
                        best = Some(c);
                    }
                }
                best
            };
            let c = pick(&|c| stamp[c] != stamp_id)
                .or_else(|| pick(&|c| !chosen.contains(&(c as u32))))
                .expect("column weight never exceeds the number of checks");
            chosen.push(c as u32);
        }
        for &c in &chosen {
            check_vars[c as usize].push(v as u32);
        }
        chosen.sort_unstable();
        var_checks[v] = chosen;
    }
    check_vars
}

type SystematicForm = (Vec<u32>, Vec<(u32, BitRow)>);

/// Reduced row-echelon form with pivots taken from the last columns first.
/// Returns the rank on failure.
fn systematic_form(spec: &PrecodeSpec, checks: &[Vec<u32>]) -> std::result::Result<SystematicForm, usize> {
    let n = spec.intermediate_len();
    let m = checks.len();
    let mut rows: Vec<BitRow> = checks
        .iter()
        .map(|vars| {
            let mut r = BitRow::zeros(n);
            vars.iter().for_each(|&v| r.set(v as usize));
            r
        })
        .collect();
    let mut pivots = Vec::with_capacity(m);
    let mut rank = 0;
    for col in (0..n).rev() {
        if rank == m {
            break;
        }
        let Some(p) = (rank..m).find(|&r| rows[r].get(col)) else {
            continue;
        };
        rows.swap(rank, p);
        let pivot = rows[rank].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != rank && row.get(col) {
                row.xor_assign(&pivot);
            }
        }
        pivots.push(col);
        rank += 1;
    }
    if rank < m {
        return Err(rank);
    }
    let mut is_pivot = vec![false; n];
    pivots.iter().for_each(|&c| is_pivot[c] = true);
    let info_positions: Vec<u32> = (0..n).filter(|&c| !is_pivot[c]).map(|c| c as u32).collect();
    let parity_rules = rows
        .iter()
        .zip(&pivots)
        .map(|(row, &p)| {
            let mut mask = BitRow::zeros(spec.k);
            for (i, &c) in info_positions.iter().enumerate() {
                if row.get(c as usize) {
                    mask.set(i);
                }
            }
            (p as u32, mask)
        })
        .collect();
    Ok((info_positions, parity_rules))
}

impl Precoder {
    pub fn spec(&self) -> &PrecodeSpec {
        &self.spec
    }

    pub fn k(&self) -> usize {
        self.spec.k
    }

    pub fn intermediate_len(&self) -> usize {
        self.spec.intermediate_len()
    }

    pub fn checks(&self) -> &[Vec<u32>] {
        &self.checks
    }

    pub fn info_positions(&self) -> &[u32] {
        &self.info_positions
    }

    /// Construction attempts used (1 when the first matrix had full rank).
    pub fn attempts(&self) -> usize {
        self.attempts
    }

    /// Message to intermediate word.
    pub fn encode(&self, message: &[u8]) -> Result<Vec<u8>> {
        if message.len() != self.spec.k {
            return Err(Error::DimensionMismatch(format!(
                "message has {} bits, precoder expects {}",
                message.len(),
                self.spec.k
            )));
        }
        let mut word = vec![0u8; self.intermediate_len()];
        for (&pos, &b) in self.info_positions.iter().zip(message) {
            word[pos as usize] = b & 1;
        }
        let packed = pack(message);
        for (pos, mask) in &self.parity_rules {
            word[*pos as usize] = mask.parity_and(&packed);
        }
        Ok(word)
    }

    pub fn extract_message(&self, word: &[u8]) -> Vec<u8> {
        self.info_positions.iter().map(|&p| word[p as usize]).collect()
    }

    /// Number of parity checks `word` violates.
    pub fn unsatisfied(&self, word: &[u8]) -> usize {
        self.checks
            .iter()
            .filter(|vars| vars.iter().fold(0u8, |acc, &v| acc ^ word[v as usize]) == 1)
            .count()
    }

    pub fn is_codeword(&self, word: &[u8]) -> bool {
        word.len() == self.intermediate_len() && self.unsatisfied(word) == 0
    }
}
