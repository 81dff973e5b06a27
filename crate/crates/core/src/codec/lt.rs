//! LT output symbols.
//!
//! Symbol `i` is generated from stream `i` of the LT seed alone: a degree is
//! drawn from Ω and that many distinct intermediate positions are chosen
//! uniformly. Any symbol can therefore be regenerated, in any order, by a
//! receiver that knows the seed.

use rand::RngExt;

use crate::degree::{DegreeDistribution, DegreeSampler};
use crate::error::{invalid, Error, Result};
use crate::rng;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LtSymbol {
    /// Sorted, distinct intermediate positions.
    pub neighbors: Vec<u32>,
    pub value: u8,
}

/// Regenerates the connections of LT symbols.
#[derive(Debug, Clone)]
pub struct LtGenerator {
    sampler: DegreeSampler,
    intermediate_len: u32,
    seed: u64,
}

impl LtGenerator {
    pub fn new(dist: &DegreeDistribution, intermediate_len: usize, seed: u64) -> Result<Self> {
        if intermediate_len == 0 || intermediate_len > u32::MAX as usize {
            return Err(invalid(format!("unsupported intermediate length {intermediate_len}")));
        }
        if dist.max_degree() as usize > intermediate_len {
            return Err(Error::DegreeOutOfRange {
                degree: dist.max_degree() as u64,
                max_degree: intermediate_len as u32,
            });
        }
        Ok(Self {
            sampler: dist.sampler(),
            intermediate_len: intermediate_len as u32,
            seed,
        })
    }

    pub fn intermediate_len(&self) -> usize {
        self.intermediate_len as usize
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Writes the sorted neighbours of symbol `index` into `out`.
    pub fn neighbors_into(&self, index: u64, out: &mut Vec<u32>) {
        let mut r = rng::stream(self.seed, index);
        let d = self.sampler.sample(&mut r) as usize;
        out.clear();
        while out.len() < d {
            let v = r.random_range(0..self.intermediate_len);
            if let Err(pos) = out.binary_search(&v) {
                out.insert(pos, v);
            }
        }
    }

    pub fn neighbors(&self, index: u64) -> Vec<u32> {
        let mut out = Vec::new();
        self.neighbors_into(index, &mut out);
        out
    }

    pub fn symbol(&self, intermediate: &[u8], index: u64) -> LtSymbol {
        let neighbors = self.neighbors(index);
        let value = xor_at(intermediate, &neighbors);
        LtSymbol { neighbors, value }
    }
}

pub fn xor_at(bits: &[u8], positions: &[u32]) -> u8 {
    positions.iter().fold(0, |acc, &p| acc ^ bits[p as usize])
}

/// Symbols `0..count` of the LT code over `intermediate`.
pub fn lt_encode(intermediate: &[u8], count: usize, dist: &DegreeDistribution, seed: u64) -> Result<Vec<LtSymbol>> {
    lt_encode_range(intermediate, 0, count, dist, seed)
}

/// Symbols `start..start + count`.
pub fn lt_encode_range(
    intermediate: &[u8],
    start: u64,
    count: usize,
    dist: &DegreeDistribution,
    seed: u64,
) -> Result<Vec<LtSymbol>> {
    let generator = LtGenerator::new(dist, intermediate.len(), seed)?;
    Ok((start..start + count as u64)
        .map(|i| generator.symbol(intermediate, i))
        .collect())
}
