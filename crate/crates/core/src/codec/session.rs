use std::sync::Arc;

use super::decoder::{decode_with_state, DecodeResult, DecoderConfig, DecoderState, TannerGraph};
use super::lt::{LtGenerator, LtSymbol};
use super::precoder::{build_precoder, PrecodeSpec, Precoder};
use crate::degree::DegreeDistribution;
use crate::error::{Error, Result};

/// A Raptor code: precoder plus LT generator.
#[derive(Debug, Clone)]
pub struct RaptorCode {
    precoder: Arc<Precoder>,
    dist: DegreeDistribution,
    lt: LtGenerator,
}

impl RaptorCode {
    pub fn new(precoder: Arc<Precoder>, dist: DegreeDistribution, lt_seed: u64) -> Result<Self> {
        let lt = LtGenerator::new(&dist, precoder.intermediate_len(), lt_seed)?;
        Ok(Self { precoder, dist, lt })
    }

    /// Builds the precoder from `seed` and uses a derived LT seed.
    pub fn build(spec: &PrecodeSpec, dist: DegreeDistribution, seed: u64) -> Result<Self> {
        let precoder = Arc::new(build_precoder(spec, seed)?);
        Self::new(precoder, dist, crate::rng::derive_seed(seed, u64::MAX))
    }

    pub fn precoder(&self) -> &Arc<Precoder> {
        &self.precoder
    }

    pub fn distribution(&self) -> &DegreeDistribution {
        &self.dist
    }

    pub fn generator(&self) -> &LtGenerator {
        &self.lt
    }

    pub fn k(&self) -> usize {
        self.precoder.k()
    }

    pub fn intermediate_len(&self) -> usize {
        self.precoder.intermediate_len()
    }

    pub fn encode(&self, message: &[u8]) -> Result<Vec<u8>> {
        self.precoder.encode(message)
    }

    pub fn symbol(&self, intermediate: &[u8], index: u64) -> LtSymbol {
        self.lt.symbol(intermediate, index)
    }

    /// Output symbols `start..start + count` for `message`.
    pub fn encode_symbols(&self, message: &[u8], start: u64, count: usize) -> Result<Vec<LtSymbol>> {
        let word = self.encode(message)?;
        Ok((start..start + count as u64).map(|i| self.symbol(&word, i)).collect())
    }

    pub fn empty_graph(&self) -> Result<TannerGraph> {
        TannerGraph::new(self.intermediate_len(), self.precoder.checks())
    }
}

/// What happens to decoder messages when new symbols arrive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Restart {
    /// Start from zero messages: the result equals decoding the union of
    /// all blocks at once.
    #[default]
    Cold,
    /// Keep previous messages; new checks start at zero.
    Warm,
}

/// Receiver side of a rateless transfer: accumulates symbols and decodes.
#[derive(Debug)]
pub struct DecodeSession<'a> {
    code: &'a RaptorCode,
    graph: TannerGraph,
    state: DecoderState,
    config: DecoderConfig,
    restart: Restart,
    last: Option<DecodeResult>,
    scratch: Vec<u32>,
}

impl<'a> DecodeSession<'a> {
    pub fn new(code: &'a RaptorCode, config: DecoderConfig, restart: Restart) -> Result<Self> {
        Ok(Self {
            graph: code.empty_graph()?,
            code,
            state: DecoderState::new(),
            config,
            restart,
            last: None,
            scratch: Vec::new(),
        })
    }

    pub fn graph(&self) -> &TannerGraph {
        &self.graph
    }

    /// Symbols received so far; the next symbol has this index.
    pub fn received(&self) -> u64 {
        self.graph.lt_count() as u64
    }

    pub fn last_result(&self) -> Option<&DecodeResult> {
        self.last.as_ref()
    }

    /// Appends the next `count` symbols. `llr_of(index, neighbours)` supplies
    /// each symbol's channel LLR.
    pub fn receive_with(&mut self, count: usize, mut llr_of: impl FnMut(u64, &[u32]) -> f64) -> Result<()> {
        let start = self.received();
        for index in start..start + count as u64 {
            self.code.generator().neighbors_into(index, &mut self.scratch);
            let llr = llr_of(index, &self.scratch);
            self.graph.push_lt_check(&self.scratch, llr)?;
        }
        Ok(())
    }

    /// Appends the next `llrs.len()` symbols.
    pub fn receive(&mut self, llrs: &[f64]) -> Result<()> {
        let start = self.received();
        self.receive_with(llrs.len(), |i, _| llrs[(i - start) as usize])
    }

    /// Decodes everything received so far.
    pub fn decode(&mut self) -> Result<DecodeResult> {
        if self.graph.lt_count() == 0 {
            return Err(Error::InvalidParameter("no symbols received".into()));
        }
        if self.restart == Restart::Cold {
            self.state.reset();
        }
        let mut r = decode_with_state(&self.graph, &self.config, &mut self.state);
        r.message = self.code.precoder().extract_message(&r.bits);
        self.last = Some(r.clone());
        Ok(r)
    }

    /// Appends a block and decodes. An empty block returns the previous
    /// result unchanged.
    pub fn decode_incremental(&mut self, llrs: &[f64]) -> Result<DecodeResult> {
        if llrs.is_empty() {
            if let Some(r) = &self.last {
                return Ok(r.clone());
            }
        }
        self.receive(llrs)?;
        self.decode()
    }
}
