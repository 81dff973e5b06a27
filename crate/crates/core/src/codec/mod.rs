//! Raptor codec: LDPC precoder, LT encoder and joint belief-propagation
//! decoder, plus the rateless transfer loop used to measure efficiency.

mod decoder;
mod efficiency;
mod lt;
mod precoder;
mod schedule;
mod session;

pub use decoder::{decode, decode_with_state, DecodeResult, DecoderConfig, DecoderState, TannerGraph, MAX_MESSAGE};
pub use efficiency::{measure_efficiency, EfficiencyConfig, EfficiencyReport, TrialRecord};
pub use lt::{lt_encode, lt_encode_range, xor_at, LtGenerator, LtSymbol};
pub use precoder::{build_precoder, PrecodeSpec, Precoder, DEFAULT_COLUMN_WEIGHT, DEFAULT_RATE};
pub use schedule::{target_efficiency, BlockSchedule, DEFAULT_MAX_BLOCKS};
pub use session::{DecodeSession, RaptorCode, Restart};
