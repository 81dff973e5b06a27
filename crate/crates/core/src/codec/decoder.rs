//! Sum-product decoding on the joint precoder + LT Tanner graph.
//!
//! Variable nodes are the intermediate bits and carry no channel
//! information of their own; every LT check carries the channel LLR of its
//! output symbol, and precoder checks are hard parity constraints. Messages
//! are updated with a flooding schedule in a fixed order, so results are
//! bit-for-bit reproducible.
//!
//! LT checks use the tanh rule and keep their messages in the tanh domain.
//! Extrinsic inputs are derived from the per-variable totals with the identity
//! `tanh((a − b)/2) = (tanh(a/2) − tanh(b/2)) / (1 − tanh(a/2) tanh(b/2))`,
//! so an edge costs a division and a few multiplications. Precoder checks
//! work on log-magnitudes and signs.

use crate::error::{invalid, Result};

/// Precoder messages and LLR conversions are clipped to this magnitude. LT
/// messages saturate earlier, at the f32 resolution of their tanh.
pub const MAX_MESSAGE: f64 = 50.0;

#[derive(Debug, Clone, PartialEq)]
pub struct TannerGraph {
    intermediate_len: usize,
    parity_offsets: Vec<u32>,
    parity_vars: Vec<u32>,
    lt_offsets: Vec<u32>,
    lt_vars: Vec<u32>,
    /// tanh(L/2) of each LT check's channel LLR.
    lt_tanh: Vec<f32>,
}

impl TannerGraph {
    pub fn new(intermediate_len: usize, parity_checks: &[Vec<u32>]) -> Result<Self> {
        if intermediate_len == 0 {
            return Err(invalid("graph needs at least one variable"));
        }
        let mut parity_offsets = vec![0u32];
        let mut parity_vars = Vec::new();
        for vars in parity_checks {
            check_neighbors(vars, intermediate_len)?;
            parity_vars.extend_from_slice(vars);
            parity_offsets.push(parity_vars.len() as u32);
        }
        Ok(Self {
            intermediate_len,
            parity_offsets,
            parity_vars,
            lt_offsets: vec![0],
            lt_vars: Vec::new(),
            lt_tanh: Vec::new(),
        })
    }

    /// Appends an LT check on `neighbors` with channel LLR `llr`.
    pub fn push_lt_check(&mut self, neighbors: &[u32], llr: f64) -> Result<()> {
        check_neighbors(neighbors, self.intermediate_len)?;
        if neighbors.is_empty() {
            return Err(invalid("an LT check needs at least one neighbour"));
        }
        if llr.is_nan() {
            return Err(invalid("channel LLR is NaN"));
        }
        let end = self.lt_vars.len() + neighbors.len();
        if end > u32::MAX as usize {
            return Err(invalid("graph exceeds 2^32 LT edges"));
        }
        self.lt_vars.extend_from_slice(neighbors);
        self.lt_offsets.push(end as u32);
        self.lt_tanh.push((0.5 * llr).tanh() as f32);
        Ok(())
    }

    pub fn intermediate_len(&self) -> usize {
        self.intermediate_len
    }

    pub fn parity_count(&self) -> usize {
        self.parity_offsets.len() - 1
    }

    pub fn lt_count(&self) -> usize {
        self.lt_offsets.len() - 1
    }

    pub fn max_lt_degree(&self) -> usize {
        self.lt_offsets.windows(2).map(|w| (w[1] - w[0]) as usize).max().unwrap_or(0)
    }

    pub fn lt_edge_count(&self) -> usize {
        self.lt_vars.len()
    }

    pub fn lt_neighbors(&self, check: usize) -> &[u32] {
        &self.lt_vars[self.lt_offsets[check] as usize..self.lt_offsets[check + 1] as usize]
    }

    pub fn parity_neighbors(&self, check: usize) -> &[u32] {
        &self.parity_vars[self.parity_offsets[check] as usize..self.parity_offsets[check + 1] as usize]
    }

    /// Number of precoder checks violated by `bits`.
    pub fn unsatisfied(&self, bits: &[u8]) -> usize {
        (0..self.parity_count())
            .filter(|&c| self.parity_neighbors(c).iter().fold(0, |a, &v| a ^ bits[v as usize]) == 1)
            .count()
    }
}

fn check_neighbors(vars: &[u32], len: usize) -> Result<()> {
    if vars.iter().any(|&v| v as usize >= len) {
        return Err(invalid("check neighbour outside the intermediate word"));
    }
    if vars.windows(2).any(|w| w[0] >= w[1]) {
        return Err(invalid("check neighbours must be sorted and distinct"));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecoderConfig {
    pub max_iters: usize,
    /// Give up after this many iterations without progress (no new minimum of
    /// unsatisfied parities and no growth of the mean |LLR|).
    pub stall_window: Option<usize>,
    pub record_trajectory: bool,
}

impl DecoderConfig {
    /// 200 iterations down to −20 dB, 500 below.
    pub fn for_snr(gamma: f64) -> Self {
        Self {
            max_iters: if gamma >= 0.01 * (1.0 - 1e-9) { 200 } else { 500 },
            stall_window: None,
            record_trajectory: false,
        }
    }
}

impl Default for DecoderConfig {
    fn default() -> Self {
        Self {
            max_iters: 200,
            stall_window: None,
            record_trajectory: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecodeResult {
    pub success: bool,
    /// Iterations run by this call.
    pub iterations: usize,
    /// LT symbols in the graph.
    pub symbols: usize,
    /// Hard decisions on the intermediate word.
    pub bits: Vec<u8>,
    /// Message bits, when the decoder knows the precoder layout.
    pub message: Vec<u8>,
    pub unsatisfied: usize,
    /// Mean variable LLR after each iteration, if recorded.
    pub trajectory: Vec<f64>,
}

/// Messages and totals carried between iterations (and between decode calls
/// when restarting warm).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DecoderState {
    /// LT check-to-variable messages as `tanh(m/2)`.
    lt_msgs: Vec<f32>,
    parity_msgs: Vec<f64>,
    totals: Vec<f64>,
}

impl DecoderState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn reset(&mut self) {
        self.lt_msgs.clear();
        self.parity_msgs.clear();
        self.totals.clear();
    }

    /// Sizes the state for `graph`; new edges start with zero messages.
    fn sync(&mut self, graph: &TannerGraph) {
        self.lt_msgs.resize(graph.lt_edge_count(), 0.0);
        self.parity_msgs.resize(graph.parity_vars.len(), 0.0);
        self.totals.resize(graph.intermediate_len, 0.0);
    }

    /// Per-variable sum of incoming check messages.
    pub fn totals(&self) -> &[f64] {
        &self.totals
    }
}

/// Decodes from a fresh state.
pub fn decode(graph: &TannerGraph, config: &DecoderConfig) -> DecodeResult {
    decode_with_state(graph, config, &mut DecoderState::new())
}

pub fn decode_with_state(graph: &TannerGraph, config: &DecoderConfig, state: &mut DecoderState) -> DecodeResult {
    state.sync(graph);
    let n = graph.intermediate_len;
    // (tanh(total/2), total) per variable.
    let mut vars = vec![(0.0, 0.0); n];
    let mut next = vec![0.0; n];
    let mut bits = decisions(&state.totals);
    let mut prev_bits = bits.clone();
    let mut buf = vec![(0.0, 0.0); graph.max_lt_degree()];
    let mut trajectory = Vec::new();
    let mut unsatisfied = graph.unsatisfied(&bits);
    let (mut best_unsat, mut best_mean) = (usize::MAX, 0.0f64);
    let mut since_progress = 0;
    let mut iterations = 0;
    let mut success = false;

    while iterations < config.max_iters {
        iterations += 1;
        for (p, &l) in vars.iter_mut().zip(&state.totals) {
            *p = ((0.5 * l).tanh(), l);
        }
        next.iter_mut().for_each(|v| *v = 0.0);
        update_lt(graph, &mut state.lt_msgs, &vars, &mut next, &mut buf);
        update_parity(graph, state, &mut next);
        std::mem::swap(&mut state.totals, &mut next);

        std::mem::swap(&mut prev_bits, &mut bits);
        bits = decisions(&state.totals);
        unsatisfied = graph.unsatisfied(&bits);
        let mean_abs = state.totals.iter().map(|v| v.abs()).sum::<f64>() / n as f64;
        if config.record_trajectory {
            trajectory.push(state.totals.iter().sum::<f64>() / n as f64);
        }
        let determined = state.totals.iter().all(|&v| v != 0.0);
        if unsatisfied == 0 && determined && bits == prev_bits {
            success = true;
            break;
        }
        if let Some(window) = config.stall_window {
            let mut progressed = false;
            if unsatisfied < best_unsat {
                best_unsat = unsatisfied;
                progressed = true;
            }
            if mean_abs > best_mean * (1.0 + 1e-4) {
                best_mean = mean_abs;
                progressed = true;
            }
            since_progress = if progressed { 0 } else { since_progress + 1 };
            if since_progress >= window {
                break;
            }
        }
    }
    DecodeResult {
        success,
        iterations,
        symbols: graph.lt_count(),
        bits,
        message: Vec::new(),
        unsatisfied,
        trajectory,
    }
}

fn decisions(totals: &[f64]) -> Vec<u8> {
    totals.iter().map(|&l| (l < 0.0) as u8).collect()
}

/// Largest stored LT message in the tanh domain (|LLR| ≈ 16.6).
const LT_TANH_MAX: f64 = 1.0 - 1.0 / (1u32 << 23) as f64;

/// tanh of the extrinsic LLR `total − own`, given `var_tanh = tanh(total/2)`
/// and `own_tanh = tanh(own/2)`.
#[inline]
fn extrinsic_tanh(var_tanh: f64, total: f64, own_tanh: f64) -> f64 {
    let den = 1.0 - var_tanh * own_tanh;
    if den > 1e-3 {
        (var_tanh - own_tanh) / den
    } else {
        // Both close to ±1 with the same sign: the identity loses precision.
        (0.5 * (total - 2.0 * own_tanh.atanh())).tanh()
    }
}

/// 2 atanh(s), clipped to ±MAX_MESSAGE.
#[inline]
fn llr_from_tanh(s: f64) -> f64 {
    let a = s.abs();
    if a < 0.15 {
        let s2 = s * s;
        let tail = 1.0 / 9.0 + s2 * (1.0 / 11.0 + s2 / 13.0);
        2.0 * s * (1.0 + s2 * (1.0 / 3.0 + s2 * (1.0 / 5.0 + s2 * (1.0 / 7.0 + s2 * tail))))
    } else if a >= 1.0 {
        MAX_MESSAGE.copysign(s)
    } else {
        (2.0 * s.atanh()).clamp(-MAX_MESSAGE, MAX_MESSAGE)
    }
}

/// Values below this are flushed to zero. Products of many small factors
/// would otherwise reach the subnormal range (of f32 once stored), which is
/// slow and contributes nothing to an LLR.
const TINY: f64 = 1e-30;

#[inline]
fn flush_tiny(x: f64) -> f64 {
    if x.abs() < TINY {
        0.0
    } else {
        x
    }
}

/// LT check update. Messages are stored as `tanh(m/2)`; the product over the
/// other edges is formed from prefix and suffix products.
fn update_lt(graph: &TannerGraph, msgs: &mut [f32], vars: &[(f64, f64)], next: &mut [f64], buf: &mut [(f64, f64)]) {
    for (c, w) in graph.lt_offsets.windows(2).enumerate() {
        let (s, e) = (w[0] as usize, w[1] as usize);
        let nbrs = &graph.lt_vars[s..e];
        let edge_msgs = &mut msgs[s..e];
        let buf = &mut buf[..e - s];
        let mut prefix = graph.lt_tanh[c] as f64;
        for ((&v, &m), slot) in nbrs.iter().zip(edge_msgs.iter()).zip(buf.iter_mut()) {
            let (tv, lv) = vars[v as usize];
            let t = extrinsic_tanh(tv, lv, m as f64);
            *slot = (prefix, t);
            prefix = flush_tiny(prefix * t);
        }
        let mut suffix = 1.0;
        for ((&v, m), &(pre, t)) in nbrs.iter().zip(edge_msgs.iter_mut()).zip(buf.iter()).rev() {
            let out = flush_tiny(pre * suffix).clamp(-LT_TANH_MAX, LT_TANH_MAX) as f32;
            suffix = flush_tiny(suffix * t);
            *m = out;
            next[v as usize] += llr_from_tanh(out as f64);
        }
    }
}

/// φ(x) = −ln tanh(x/2), an involution on (0, ∞).
#[inline]
fn phi_llr(x: f64) -> f64 {
    let x = x.max(1e-15);
    (2.0 / x.exp_m1()).ln_1p()
}

fn update_parity(graph: &TannerGraph, state: &mut DecoderState, next: &mut [f64]) {
    let totals = &state.totals;
    let msgs = &mut state.parity_msgs;
    // (φ(|x|), sign, erased) per edge. A zero input carries no information,
    // so φ would be infinite; erasures are counted instead.
    let mut mags = Vec::new();
    for c in 0..graph.parity_count() {
        let (s, e) = (graph.parity_offsets[c] as usize, graph.parity_offsets[c + 1] as usize);
        let vars = &graph.parity_vars[s..e];
        mags.clear();
        let mut sum = 0.0;
        let mut erased = 0;
        let mut negative = false;
        for (&v, &m) in vars.iter().zip(&msgs[s..e]) {
            let x = totals[v as usize] - m;
            if x == 0.0 {
                erased += 1;
                mags.push((0.0, false, true));
                continue;
            }
            negative ^= x < 0.0;
            let p = phi_llr(x.abs());
            sum += p;
            mags.push((p, x < 0.0, false));
        }
        for ((&v, m), &(p, neg, is_erased)) in vars.iter().zip(&mut msgs[s..e]).zip(&mags) {
            let mag = match (erased, is_erased) {
                (0, _) => phi_llr((sum - p).max(0.0)).min(MAX_MESSAGE),
                (1, true) => phi_llr(sum).min(MAX_MESSAGE),
                _ => 0.0,
            };
            let out = if negative ^ neg { -mag } else { mag };
            *m = out;
            next[v as usize] += out;
        }
    }
}
