//! Forward error correction for the WiMAX code families: convolutional codes with
//! Viterbi decoding, double-binary turbo codes, block turbo (product) codes and LDPC
//! codes, plus the receive-chain address generators, architecture throughput models
//! and a Monte-Carlo BER harness.

pub mod archmodel;
pub mod btc;
pub mod conv;
pub mod ctc;
pub mod error;
pub mod interleave;
pub mod ldpc;
pub mod params;
pub mod sim;
pub mod types;

pub use error::{FecError, Result};
pub use types::{Bit, Couple};
