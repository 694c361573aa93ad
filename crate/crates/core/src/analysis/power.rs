use serde::Serialize;

use crate::channel::ChannelConfig;
use crate::error::{Error, Result};

/// `D(λ) = 1/p₁(λ) + 1/p₂(λ)` for a two-message Rayleigh uplink.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerObjective {
    pub c: f64,
    pub u_prime: f64,
    pub p: f64,
}

impl PowerObjective {
    pub fn from_channel(cfg: &ChannelConfig) -> Self {
        Self {
            c: cfg.c(),
            u_prime: cfg.u_prime(),
            p: cfg.total_power_w,
        }
    }

    /// `(τ₁, τ₂)` at split `λ`.
    pub fn thresholds(&self, lambda: f64) -> (f64, f64) {
        let t = crate::channel::thresholds_from(
            self.c,
            self.u_prime,
            &[lambda * self.p, (1.0 - lambda) * self.p],
        );
        (t.tau[0], t.tau[1])
    }

    pub fn exact(&self, lambda: f64) -> f64 {
        let (t1, t2) = self.thresholds(lambda);
        t1.exp() + t2.exp()
    }

    /// `D − 2`, accurate when both thresholds are tiny.
    pub fn excess(&self, lambda: f64) -> f64 {
        let (t1, t2) = self.thresholds(lambda);
        t1.exp_m1() + t2.exp_m1()
    }

    /// First-order expansion `2 + c/(λP/u′ − (1−λ)P) + c·u′/((1−λ)P)`.
    pub fn taylor(&self, lambda: f64) -> f64 {
        let (c, u, p) = (self.c, self.u_prime, self.p);
        let denom = lambda * p / u - (1.0 - lambda) * p;
        if !(denom > 0.0) || lambda >= 1.0 {
            return f64::INFINITY;
        }
        2.0 + c / denom + c * u / ((1.0 - lambda) * p)
    }

    /// Lower end of the open interval of useful splits.
    pub fn lower_bound(&self) -> f64 {
        (self.u_prime / (1.0 + self.u_prime)).max(0.5)
    }
}

/// Minimizer of a unimodal `f` on `[a, b]` to within `tol`.
pub fn golden_section(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while b - a > tol {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        }
    }
    0.5 * (a + b)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LambdaOptimum {
    /// Minimizer of the exact objective.
    pub numeric: f64,
    /// Stationary point of the first-order objective.
    pub closed: f64,
    /// `(u′ + √(1+u′) − 1)/u′`, reported for comparison.
    pub printed: f64,
    pub printed_exceeds_one: bool,
    /// `D` at the numeric optimum.
    pub d_min: f64,
}

/// `(u′ + √(1+u′))/(1 + u′ + √(1+u′))`.
pub fn lambda_closed(u_prime: f64) -> f64 {
    let s = (1.0 + u_prime).sqrt();
    (u_prime + s) / (1.0 + u_prime + s)
}

pub fn lambda_printed(u_prime: f64) -> f64 {
    (u_prime + (1.0 + u_prime).sqrt() - 1.0) / u_prime
}

pub fn optimize_lambda(obj: &PowerObjective) -> Result<LambdaOptimum> {
    if !(obj.u_prime.is_finite() && obj.u_prime >= 0.0 && obj.c >= 0.0 && obj.p > 0.0) {
        return Err(Error::Infeasible(format!(
            "no split decodes both messages (u' = {}, c = {}, P = {})",
            obj.u_prime, obj.c, obj.p
        )));
    }
    let lo = obj.lower_bound();
    if lo >= 1.0 {
        return Err(Error::Infeasible("feasible interval is empty".into()));
    }
    let numeric = golden_section(|l| obj.excess(l), lo, 1.0, 1e-6);
    let printed = lambda_printed(obj.u_prime);
    Ok(LambdaOptimum {
        numeric,
        closed: lambda_closed(obj.u_prime),
        printed,
        printed_exceeds_one: printed > 1.0,
        d_min: obj.exact(numeric),
    })
}
