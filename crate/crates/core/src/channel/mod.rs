//! Uplink model: superposition coding, successive decoding and fading.

mod fading;
mod link;

pub use fading::{sample_fading, Fading};
pub use link::{
    calibrate, dbm_to_watts, decode, decode_probabilities, decode_with, noise_power_from_psd,
    rate_to_u_prime, thresholds_from, Calibration, ChannelConfig, DecodeThresholds,
    DecodingOutcome,
};
