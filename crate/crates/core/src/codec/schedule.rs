//! Incremental block schedule for rateless transmission.
//!
//! Block `i` (1-based) brings the cumulative length to
//! `ceil(k / (e_i C))` with target efficiencies `e_i = 1 − 0.01 (i − 1)`,
//! down to 0.80. After that each block grows the cumulative length by 2 %.

use crate::error::{invalid, Result};

pub const EFFICIENCY_STEP: f64 = 0.01;
pub const EFFICIENCY_FLOOR: f64 = 0.80;
pub const GROWTH_AFTER_FLOOR: f64 = 0.02;
pub const DEFAULT_MAX_BLOCKS: usize = 40;

#[derive(Debug, Clone, PartialEq)]
pub struct BlockSchedule {
    k: usize,
    capacity: f64,
    cumulative: Vec<usize>,
}

impl BlockSchedule {
    pub fn new(k: usize, capacity: f64) -> Result<Self> {
        Self::with_max_blocks(k, capacity, DEFAULT_MAX_BLOCKS)
    }

    pub fn with_max_blocks(k: usize, capacity: f64, max_blocks: usize) -> Result<Self> {
        if k == 0 || max_blocks == 0 {
            return Err(invalid("schedule needs k >= 1 and at least one block"));
        }
        if !(capacity > 0.0 && capacity <= 1.0) {
            return Err(invalid(format!("capacity must lie in (0, 1], got {capacity}")));
        }
        let floor_block = ((1.0 - EFFICIENCY_FLOOR) / EFFICIENCY_STEP).round() as usize + 1;
        let mut cumulative: Vec<usize> = Vec::with_capacity(max_blocks);
        for i in 1..=max_blocks {
            let target = if i <= floor_block {
                (k as f64 / (target_efficiency(i) * capacity)).ceil() as usize
            } else {
                (cumulative[i - 2] as f64 * (1.0 + GROWTH_AFTER_FLOOR)).ceil() as usize
            };
            let min = cumulative.last().map_or(1, |&c| c + 1);
            cumulative.push(target.max(min));
        }
        Ok(Self { k, capacity, cumulative })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn capacity(&self) -> f64 {
        self.capacity
    }

    pub fn max_blocks(&self) -> usize {
        self.cumulative.len()
    }

    /// Cumulative lengths `Σ_{j≤i} n_j`.
    pub fn cumulative(&self) -> &[usize] {
        &self.cumulative
    }

    /// Individual block sizes `n_i`.
    pub fn block_sizes(&self) -> Vec<usize> {
        let mut prev = 0;
        self.cumulative
            .iter()
            .map(|&c| {
                let n = c - prev;
                prev = c;
                n
            })
            .collect()
    }
}

/// `e_i` for block `i` (1-based), floored.
pub fn target_efficiency(i: usize) -> f64 {
    let steps = (i.max(1) - 1) as f64;
    ((100.0 - steps) / 100.0).max(EFFICIENCY_FLOOR)
}
