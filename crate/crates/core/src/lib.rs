//! Simulator for federated learning over width-slimmable networks with
//! superposition-coded uplinks and successive decoding.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod channel;
pub mod data;
pub mod error;
pub mod experiment;
pub mod federation;
pub mod matrix;
pub mod rng;
pub mod slim;
pub mod train;

pub use error::{Error, Result};
pub use matrix::Matrix;
