use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::federation::{aggregate_segments, Weighting};

/// Constants of the convergence bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceParams {
    pub mu: f64,
    pub l: f64,
    /// Mean per-device stochastic-gradient variance.
    pub delta: f64,
    /// `E‖θ₁ − θ*‖²`.
    pub delta1: f64,
    pub p1: f64,
    pub p2: f64,
    pub weights: Vec<f64>,
}

/// `B = 4δ(1/p₁ + 1/p₂)·Σwᵢ²`.
pub fn lemma1_b(p: &ConvergenceParams) -> Result<f64> {
    if !(p.p1 > 0.0) {
        return Err(Error::Diverges("p1"));
    }
    if !(p.p2 > 0.0) {
        return Err(Error::Diverges("p2"));
    }
    let sq: f64 = p.weights.iter().map(|w| w * w).sum();
    Ok(4.0 * p.delta * (1.0 / p.p1 + 1.0 / p.p2) * sq)
}

/// `(L/μ)·(μLΔ₁ + 2B)/(μt + 2L − μ)` for `t ≥ 1`.
pub fn theorem1_bound(p: &ConvergenceParams, t: usize) -> Result<f64> {
    let b = lemma1_b(p)?;
    let (mu, l) = (p.mu, p.l);
    Ok((l / mu) * (mu * l * p.delta1 + 2.0 * b) / (mu * t as f64 + 2.0 * l - mu))
}

/// Separable quadratic trained by K devices with the superposition
/// update. The full-width loss is `½Σ aⱼ(θⱼ − cⱼ)²`; the narrow width sees
/// only the coordinates in `lh`. With weights `(w₁, w₂)` the combined loss
/// has curvature `aⱼ` on `lh` and `w₂aⱼ` elsewhere.
///
/// Device `k` observes both widths' gradients through one shared noise
/// vector `ξ` with `E‖ξ‖² = σ_k²`, spread evenly over coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct FederatedQuadratic {
    pub curvature: Vec<f64>,
    pub optimum: Vec<f64>,
    pub lh: Vec<bool>,
    pub noise_std: Vec<f64>,
    pub weights: (f64, f64),
}

impl FederatedQuadratic {
    pub fn dim(&self) -> usize {
        self.curvature.len()
    }

    pub fn devices(&self) -> usize {
        self.noise_std.len()
    }

    pub fn effective_curvature(&self) -> Vec<f64> {
        self.curvature
            .iter()
            .zip(&self.lh)
            .map(|(&a, &in_lh)| if in_lh { a } else { self.weights.1 * a })
            .collect()
    }

    /// `(μ, L)` of the combined loss.
    pub fn moduli(&self) -> (f64, f64) {
        let c = self.effective_curvature();
        let mu = c.iter().cloned().fold(f64::INFINITY, f64::min);
        let l = c.iter().cloned().fold(0.0, f64::max);
        (mu, l)
    }

    /// `δ = (1/K)Σσ_k²`.
    pub fn delta(&self) -> f64 {
        self.noise_std.iter().map(|s| s * s).sum::<f64>() / self.devices() as f64
    }

    /// Combined loss minus its minimum.
    pub fn gap(&self, theta: &[f64]) -> f64 {
        self.effective_curvature()
            .iter()
            .zip(theta.iter().zip(&self.optimum))
            .map(|(a, (t, c))| 0.5 * a * (t - c) * (t - c))
            .sum()
    }

    fn device_gradient<R: Rng + ?Sized>(&self, theta: &[f64], k: usize, rng: &mut R) -> Vec<f64> {
        let (w1, w2) = self.weights;
        let s = self.noise_std[k] / (self.dim() as f64).sqrt();
        (0..self.dim())
            .map(|j| {
                let z: f64 = StandardNormal.sample(rng);
                let g = self.curvature[j] * (theta[j] - self.optimum[j]) + s * z;
                if self.lh[j] {
                    (w1 + w2) * g
                } else {
                    w2 * g
                }
            })
            .collect()
    }

    /// Optimality gap at `θ₁, …, θ_T` for `T = rounds`, with one SGD step
    /// per round at `η_t = 2/(μt + 2L − μ)`, decoding drawn independently
    /// per device (`both` w.p. `p₂`, `LH only` w.p. `p₁ − p₂`) and
    /// empirical segment-wise aggregation.
    pub fn simulate<R: Rng + ?Sized>(
        &self,
        theta1: &[f64],
        p1: f64,
        p2: f64,
        rounds: usize,
        rng: &mut R,
    ) -> Result<Vec<f64>> {
        let (mu, l) = self.moduli();
        let segments = vec![self.lh.clone(), self.lh.iter().map(|b| !b).collect()];
        let mut theta = theta1.to_vec();
        let mut gaps = Vec::with_capacity(rounds);
        for t in 1..=rounds {
            gaps.push(self.gap(&theta));
            if t == rounds {
                break;
            }
            let eta = 2.0 / (mu * t as f64 + 2.0 * l - mu);
            let mut locals = Vec::with_capacity(self.devices());
            let mut decoded = Vec::with_capacity(self.devices());
            for k in 0..self.devices() {
                let g = self.device_gradient(&theta, k, rng);
                locals.push(theta.iter().zip(&g).map(|(x, g)| x - eta * g).collect());
                let rho: f64 = rng.random();
                decoded.push(if rho < p2 {
                    2
                } else if rho < p1 {
                    1
                } else {
                    0
                });
            }
            theta = aggregate_segments(&theta, &locals, &decoded, &segments, &Weighting::Empirical)?;
        }
        Ok(gaps)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> ConvergenceParams {
        ConvergenceParams {
            mu: 1.0,
            l: 1.0,
            delta: 1.0,
            delta1: 1.0,
            p1: 1.0,
            p2: 1.0,
            weights: vec![0.5, 0.5],
        }
    }

    #[test]
    fn lemma1_values() {
        assert_eq!(lemma1_b(&params()).unwrap(), 4.0);
        let iid = ConvergenceParams { delta: 0.0, ..params() };
        assert_eq!(lemma1_b(&iid).unwrap(), 0.0);
        let dead = ConvergenceParams { p2: 0.0, ..params() };
        assert!(matches!(lemma1_b(&dead), Err(Error::Diverges("p2"))));
    }

    #[test]
    fn lemma1_symmetric_in_probabilities() {
        let a = ConvergenceParams { p1: 0.9, p2: 0.4, ..params() };
        let b = ConvergenceParams { p1: 0.4, p2: 0.9, ..params() };
        assert_eq!(lemma1_b(&a).unwrap(), lemma1_b(&b).unwrap());
    }

    #[test]
    fn theorem1_substitution() {
        let p = ConvergenceParams { delta: 0.0, ..params() };
        assert!((theorem1_bound(&p, 1).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn bound_decreases_to_zero() {
        let p = ConvergenceParams { mu: 0.3, l: 2.0, p1: 0.8, p2: 0.6, ..params() };
        let mut prev = f64::INFINITY;
        for t in 1..1000 {
            let b = theorem1_bound(&p, t).unwrap();
            assert!(b < prev);
            prev = b;
        }
        assert!(theorem1_bound(&p, 100_000_000).unwrap() < 1e-5);
    }

    #[test]
    fn quadratic_moduli() {
        let q = FederatedQuadratic {
            curvature: vec![1.0, 2.0, 4.0],
            optimum: vec![0.0; 3],
            lh: vec![true, false, false],
            noise_std: vec![1.0, 3.0],
            weights: (0.5, 0.5),
        };
        assert_eq!(q.effective_curvature(), vec![1.0, 1.0, 2.0]);
        assert_eq!(q.moduli(), (1.0, 2.0));
        assert_eq!(q.delta(), 5.0);
    }
}
