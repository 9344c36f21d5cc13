//! Reed-Muller codes RM(r, m) with a recursive Plotkin-decomposition decoder.
//!
//! The crate is split along the decoding pipeline:
//!
//! - [`rm_code`]: code parameters, the end-node information layout, the
//!   recursive `(u, u+v)` encoder and an independent polynomial-evaluation
//!   encoder used as an oracle.
//! - [`channel`]: BPSK over AWGN and BSC, conversions between received
//!   values, likelihoods and spreads, and seeded per-trial sampling.
//! - [`decoder`]: the recursive soft/hard-decision decoder with ML decoding
//!   at first-order and single-parity-check end nodes, plus frozen nodes.
//! - [`analysis`]: closed-form error-rate bounds and decoding thresholds.
//! - [`harness`]: deterministic Monte-Carlo simulation and reporting.

pub mod analysis;
pub mod channel;
pub mod decoder;
mod error;
pub mod harness;
pub mod rm_code;

pub use error::{Error, Result};
