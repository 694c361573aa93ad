use rand::Rng;
use serde::{Deserialize, Serialize};

use super::fading::{sample_fading, Fading};
use crate::error::{Error, Result};

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0) * 1e-3
}

/// Noise power over `bandwidth_hz` for a density given in dBm/Hz.
pub fn noise_power_from_psd(dbm_per_hz: f64, bandwidth_hz: f64) -> f64 {
    dbm_to_watts(dbm_per_hz) * bandwidth_hz
}

/// Uplink of one device: two superposed messages (0.5x segment first, then
/// the remaining segment) sent with powers `λP` and `(1 − λ)P`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelConfig {
    pub distance_m: f64,
    pub pathloss_exponent: f64,
    pub bandwidth_hz: f64,
    pub total_power_w: f64,
    pub noise_power_w: f64,
    pub rate_bps: f64,
    pub power_split: f64,
    pub fading: Fading,
}

impl ChannelConfig {
    /// 100 m, exponent 2.5, 75 MHz, 23 dBm, −169 dBm/Hz, `u′ = 0.667`,
    /// `λ = 0.662`, Rayleigh fading.
    pub fn reference() -> Self {
        let w = 75e6;
        Self {
            distance_m: 100.0,
            pathloss_exponent: 2.5,
            bandwidth_hz: w,
            total_power_w: dbm_to_watts(23.0),
            noise_power_w: noise_power_from_psd(-169.0, w),
            rate_bps: w * (1.0f64 + 0.667).log2(),
            power_split: 0.662,
            fading: Fading::Rayleigh,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("channel.distance_m", self.distance_m),
            ("channel.pathloss_exponent", self.pathloss_exponent),
            ("channel.bandwidth_hz", self.bandwidth_hz),
            ("channel.total_power", self.total_power_w),
            ("channel.noise_power", self.noise_power_w),
        ];
        for (field, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::config(field, format!("must be positive and finite, got {v}")));
            }
        }
        if !(self.rate_bps >= 0.0 && self.rate_bps.is_finite()) {
            return Err(Error::config("channel.rate_bps", "must be non-negative"));
        }
        if !(self.power_split > 0.5 && self.power_split <= 1.0) {
            return Err(Error::config(
                "channel.power_split",
                format!("must lie in (0.5, 1], got {}", self.power_split),
            ));
        }
        Ok(())
    }

    /// `c = σ²·d^β`.
    pub fn c(&self) -> f64 {
        self.noise_power_w * self.distance_m.powf(self.pathloss_exponent)
    }

    /// `u′ = 2^(u/W) − 1`.
    pub fn u_prime(&self) -> f64 {
        rate_to_u_prime(self.rate_bps, self.bandwidth_hz)
    }

    pub fn powers(&self) -> [f64; 2] {
        let p = self.total_power_w;
        [self.power_split * p, (1.0 - self.power_split) * p]
    }

    pub fn thresholds(&self) -> DecodeThresholds {
        thresholds_from(self.c(), self.u_prime(), &self.powers())
    }

    /// SINR of message `i` (0-based) when every earlier message has been
    /// cancelled and every later one is still interference.
    pub fn sinr(&self, chi: f64, i: usize) -> f64 {
        let gain = chi * self.distance_m.powf(-self.pathloss_exponent);
        let p = self.powers();
        let interference: f64 = p[i + 1..].iter().sum();
        gain * p[i] / (self.noise_power_w + gain * interference)
    }
}

pub fn rate_to_u_prime(rate_bps: f64, bandwidth_hz: f64) -> f64 {
    (rate_bps / bandwidth_hz).exp2() - 1.0
}

/// Fading thresholds `τ` such that messages `1..=i` decode iff `χ ≥ τᵢ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecodeThresholds {
    pub tau: Vec<f64>,
}

/// `τᵢ = max_{j≤i} c/(P_j/u′ − Σ_{j′>j} P_{j′})`, infinite where a
/// denominator is not positive and zero when `u′ = 0`.
pub fn thresholds_from(c: f64, u_prime: f64, powers: &[f64]) -> DecodeThresholds {
    let mut tau = Vec::with_capacity(powers.len());
    let mut running: f64 = 0.0;
    for j in 0..powers.len() {
        let t = if u_prime <= 0.0 {
            0.0
        } else {
            let later: f64 = powers[j + 1..].iter().sum();
            let denom = powers[j] / u_prime - later;
            if denom > 0.0 {
                c / denom
            } else {
                f64::INFINITY
            }
        };
        running = running.max(t);
        tau.push(running);
    }
    DecodeThresholds { tau }
}

impl DecodeThresholds {
    pub fn len(&self) -> usize {
        self.tau.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tau.is_empty()
    }

    pub fn decoded_upto(&self, chi: f64) -> usize {
        self.tau.iter().take_while(|&&t| chi >= t).count()
    }

    /// `pᵢ = exp(−τᵢ)`, valid for `χ ~ Exp(1)`.
    pub fn rayleigh_probabilities(&self) -> Vec<f64> {
        self.tau.iter().map(|&t| (-t).exp()).collect()
    }

    /// Fraction of `draws` fading samples clearing each threshold.
    pub fn monte_carlo_probabilities<R: Rng + ?Sized>(
        &self,
        fading: &Fading,
        draws: usize,
        rng: &mut R,
    ) -> Vec<f64> {
        let mut hits = vec![0usize; self.tau.len()];
        for _ in 0..draws {
            let k = self.decoded_upto(sample_fading(fading, rng));
            hits[..k].iter_mut().for_each(|h| *h += 1);
        }
        hits.into_iter().map(|h| h as f64 / draws as f64).collect()
    }
}

pub fn decode_probabilities(cfg: &ChannelConfig) -> Result<Vec<f64>> {
    match cfg.fading {
        Fading::Rayleigh => Ok(cfg.thresholds().rayleigh_probabilities()),
        other => Err(Error::UnsupportedClosedForm(other.name())),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecodingOutcome {
    pub decoded_upto: usize,
    pub chi: f64,
}

/// Draws one fading gain and decodes every message it can.
pub fn decode_with<R: Rng + ?Sized>(
    thresholds: &DecodeThresholds,
    fading: &Fading,
    rng: &mut R,
) -> DecodingOutcome {
    let chi = sample_fading(fading, rng);
    DecodingOutcome {
        decoded_upto: thresholds.decoded_upto(chi),
        chi,
    }
}

pub fn decode<R: Rng + ?Sized>(cfg: &ChannelConfig, rng: &mut R) -> DecodingOutcome {
    decode_with(&cfg.thresholds(), &cfg.fading, rng)
}

/// Power split and normalized path cost giving Rayleigh decoding
/// probabilities `p1 ≥ p2` at a given `u′`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Calibration {
    pub power_split: f64,
    /// `c/P`.
    pub c_over_p: f64,
}

pub fn calibrate(p1: f64, p2: f64, u_prime: f64) -> Result<Calibration> {
    if !(0.0 < p2 && p2 <= p1 && p1 < 1.0) {
        return Err(Error::Infeasible(format!(
            "need 0 < p2 <= p1 < 1, got p1 = {p1}, p2 = {p2}"
        )));
    }
    if !(u_prime > 0.0) {
        return Err(Error::Infeasible("u' must be positive".into()));
    }
    let t1 = -p1.ln();
    let t2 = -p2.ln();
    let rho = t2 / t1;
    let lambda = (rho + u_prime) / (1.0 + u_prime + rho);
    Ok(Calibration {
        power_split: lambda,
        c_over_p: t2 * (1.0 - lambda) / u_prime,
    })
}

impl ChannelConfig {
    /// Copy with the power split and noise power chosen so that the
    /// Rayleigh decoding probabilities become `(p1, p2)`.
    pub fn calibrated(&self, p1: f64, p2: f64) -> Result<Self> {
        let cal = calibrate(p1, p2, self.u_prime())?;
        let path = self.distance_m.powf(self.pathloss_exponent);
        Ok(Self {
            power_split: cal.power_split,
            noise_power_w: cal.c_over_p * self.total_power_w / path,
            ..*self
        })
    }
}
