//! Rateless (Raptor) coding toolkit for the very-low-SNR regime.
//!
//! The crate covers the whole chain from code design to application:
//!
//! * [`degree`]: output-degree distributions Ω(x) and their edge perspective.
//! * [`exit`]: mean-LLR EXIT machinery (φ(μ), f_d(μ), Gaussian odd moments, capacity).
//! * [`lp`]: a dense two-phase simplex solver.
//! * [`design`]: the general and low-SNR degree-design linear programs.
//! * [`channel`]: BI-AWGN transmission and channel LLRs.
//! * [`codec`]: LDPC precoder, LT encoder and the joint sum-product decoder.
//! * [`qkd`]: rateless reverse reconciliation and secret-key-rate bookkeeping.
//!
//! Bits are represented as `u8` values `0`/`1` throughout. LLRs are
//! `ln P(bit = 0) / P(bit = 1)`, so positive values favour `0`, and bit `0`
//! is transmitted as `+1`.

pub mod channel;
pub mod codec;
pub mod degree;
pub mod design;
mod error;
pub mod exit;
pub mod lp;
pub mod qkd;
pub mod rng;

pub use error::{Error, Result};
