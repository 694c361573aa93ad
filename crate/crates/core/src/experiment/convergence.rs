use serde::{Deserialize, Serialize};

use crate::federation::RoundMetrics;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceCriterion {
    pub window: usize,
    pub mean: f64,
    pub std: f64,
}

impl Default for ConvergenceCriterion {
    /// 100 rounds with mean accuracy above 80% and std below 7.25%.
    fn default() -> Self {
        Self {
            window: 100,
            mean: 0.8,
            std: 0.0725,
        }
    }
}

/// First 1-based round whose trailing window has mean above `crit.mean` and
/// population standard deviation below `crit.std`.
pub fn detect_convergence_with(trace: &[f64], crit: ConvergenceCriterion) -> Option<usize> {
    let w = crit.window;
    if w == 0 || trace.len() < w {
        return None;
    }
    let (mut sum, mut sq) = (0.0, 0.0);
    for (i, &x) in trace.iter().enumerate() {
        sum += x;
        sq += x * x;
        if i >= w {
            let old = trace[i - w];
            sum -= old;
            sq -= old * old;
        }
        if i + 1 >= w {
            let mean = sum / w as f64;
            let var = (sq / w as f64 - mean * mean).max(0.0);
            if mean > crit.mean && var.sqrt() < crit.std {
                return Some(i + 1);
            }
        }
    }
    None
}

pub fn detect_convergence(trace: &[f64]) -> Option<usize> {
    detect_convergence_with(trace, ConvergenceCriterion::default())
}

/// Accuracy trace a scheme is judged on: 1.0x where present, else 0.5x.
pub fn judged_trace(metrics: &[RoundMetrics]) -> Vec<f64> {
    let full = metrics.iter().any(|m| !m.acc_1_0x.is_nan());
    metrics
        .iter()
        .map(|m| if full { m.acc_1_0x } else { m.acc_0_5x })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    /// Rounds counted: up to convergence, or all rounds when incomplete.
    pub rounds: usize,
    /// Sum of per-round transmit power, in W.
    pub comm_power_w: f64,
    pub comp_mflops: f64,
    pub complete: bool,
}

pub fn energy_report(metrics: &[RoundMetrics], convergence_round: Option<usize>) -> EnergyReport {
    let n = convergence_round.unwrap_or(metrics.len()).min(metrics.len());
    let upto = &metrics[..n];
    EnergyReport {
        rounds: n,
        comm_power_w: upto.iter().map(|m| m.comm_power_mw).sum::<f64>() / 1e3,
        comp_mflops: upto.iter().map(|m| m.comp_mflops).sum(),
        complete: convergence_round.is_some(),
    }
}

/// `(comm, comp)` ratios of `a` to `b`.
pub fn energy_ratio(a: &EnergyReport, b: &EnergyReport) -> (f64, f64) {
    (a.comm_power_w / b.comm_power_w, a.comp_mflops / b.comp_mflops)
}
