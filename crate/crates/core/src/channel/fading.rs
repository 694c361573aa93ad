use std::f64::consts::TAU;

use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

/// Small-scale fading law of the power gain `χ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum Fading {
    /// `χ ~ Exp(1)`.
    Rayleigh,
    /// Amplitude `A ~ Rice(ν, σ)` and `χ = A²`. With `normalize`, `χ` is
    /// divided by `ν² + 2σ²` so that `E[χ] = 1`.
    Rician {
        nu: f64,
        sigma: f64,
        #[serde(default)]
        normalize: bool,
    },
    /// Two specular waves plus diffuse scatter, at unit mean power.
    /// `k = (V₁² + V₂²)/(2σ²)` and `delta = 2V₁V₂/(V₁² + V₂²)`.
    Twdp { k: f64, delta: f64 },
}

impl Fading {
    pub const fn rician_reference() -> Self {
        Fading::Rician {
            nu: 0.5577,
            sigma: 0.2106,
            normalize: false,
        }
    }

    pub const fn twdp_reference() -> Self {
        Fading::Twdp { k: 3.5, delta: 0.1 }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Fading::Rayleigh => "rayleigh",
            Fading::Rician { .. } => "rician",
            Fading::Twdp { .. } => "twdp",
        }
    }

    /// `E[χ]`.
    pub fn mean_power(&self) -> f64 {
        match *self {
            Fading::Rayleigh | Fading::Twdp { .. } => 1.0,
            Fading::Rician { normalize: true, .. } => 1.0,
            Fading::Rician { nu, sigma, .. } => nu * nu + 2.0 * sigma * sigma,
        }
    }

    /// Specular amplitudes `(V₁, V₂)` and diffuse per-dimension deviation `σ`.
    pub fn twdp_components(k: f64, delta: f64) -> (f64, f64, f64) {
        let sigma = (0.5 / (k + 1.0)).sqrt();
        let s = k / (k + 1.0);
        let root = (1.0 - delta * delta).max(0.0).sqrt();
        let v1 = (s * (1.0 + root) / 2.0).sqrt();
        let v2 = (s * (1.0 - root) / 2.0).sqrt();
        (v1, v2, sigma)
    }
}

pub fn sample_fading<R: Rng + ?Sized>(model: &Fading, rng: &mut R) -> f64 {
    match *model {
        Fading::Rayleigh => Exp1.sample(rng),
        Fading::Rician { nu, sigma, normalize } => {
            let x: f64 = StandardNormal.sample(rng);
            let y: f64 = StandardNormal.sample(rng);
            let re = nu + sigma * x;
            let im = sigma * y;
            let chi = re * re + im * im;
            if normalize {
                chi / (nu * nu + 2.0 * sigma * sigma)
            } else {
                chi
            }
        }
        Fading::Twdp { k, delta } => {
            let (v1, v2, sigma) = Fading::twdp_components(k, delta);
            let p1 = rng.random::<f64>() * TAU;
            let p2 = rng.random::<f64>() * TAU;
            let x: f64 = StandardNormal.sample(rng);
            let y: f64 = StandardNormal.sample(rng);
            let re = v1 * p1.cos() + v2 * p2.cos() + sigma * x;
            let im = v1 * p1.sin() + v2 * p2.sin() + sigma * y;
            re * re + im * im
        }
    }
}
