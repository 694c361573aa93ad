use serde::{Deserialize, Serialize};

/// Step size as a function of the 1-based iteration `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum LrSchedule {
    Constant { eta0: f64 },
    /// `2 / (μt + 2L − μ)`, which starts at `1/L` and decays as `1/t`.
    Theorem1 { mu: f64, l: f64 },
}

impl LrSchedule {
    pub fn eta(&self, t: usize) -> f64 {
        match *self {
            LrSchedule::Constant { eta0 } => eta0,
            LrSchedule::Theorem1 { mu, l } => 2.0 / (mu * t as f64 + 2.0 * l - mu),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Optimizer {
    Sgd,
    Adam { beta1: f64, beta2: f64, eps: f64 },
}

impl Optimizer {
    pub fn adam() -> Self {
        Optimizer::Adam {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub step: u64,
}

impl AdamState {
    pub fn new(len: usize, beta1: f64, beta2: f64, eps: f64) -> Self {
        Self {
            beta1,
            beta2,
            eps,
            m: vec![0.0; len],
            v: vec![0.0; len],
            step: 0,
        }
    }
}

/// One bias-corrected Adam update of `params` in place.
pub fn adam_update(state: &mut AdamState, params: &mut [f64], grad: &[f64], eta: f64) {
    state.step += 1;
    let (b1, b2) = (state.beta1, state.beta2);
    let c1 = 1.0 - b1.powi(state.step as i32);
    let c2 = 1.0 - b2.powi(state.step as i32);
    for i in 0..params.len() {
        let g = grad[i];
        state.m[i] = b1 * state.m[i] + (1.0 - b1) * g;
        state.v[i] = b2 * state.v[i] + (1.0 - b2) * g * g;
        let m_hat = state.m[i] / c1;
        let v_hat = state.v[i] / c2;
        params[i] -= eta * m_hat / (v_hat.sqrt() + state.eps);
    }
}

/// Per-device optimizer with its own state and step counter.
#[derive(Debug, Clone, PartialEq)]
pub enum OptimizerState {
    Sgd { step: u64 },
    Adam(AdamState),
}

impl OptimizerState {
    pub fn new(opt: Optimizer, len: usize) -> Self {
        match opt {
            Optimizer::Sgd => OptimizerState::Sgd { step: 0 },
            Optimizer::Adam { beta1, beta2, eps } => {
                OptimizerState::Adam(AdamState::new(len, beta1, beta2, eps))
            }
        }
    }

    /// Number of steps taken so far.
    pub fn steps(&self) -> u64 {
        match self {
            OptimizerState::Sgd { step } => *step,
            OptimizerState::Adam(s) => s.step,
        }
    }

    pub fn step(&mut self, params: &mut [f64], grad: &[f64], eta: f64) {
        match self {
            OptimizerState::Sgd { step } => {
                *step += 1;
                params.iter_mut().zip(grad).for_each(|(p, g)| *p -= eta * g);
            }
            OptimizerState::Adam(s) => adam_update(s, params, grad, eta),
        }
    }
}
