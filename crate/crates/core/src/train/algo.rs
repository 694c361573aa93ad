//! Local training algorithms for slimmable networks.
//!
//! Each algorithm turns one batch into one accumulated gradient and takes a
//! single optimizer step. They differ in which widths contribute and what
//! each width is trained against:
//!
//! * SUSTrain: `w_S·∇CE(1.0x) + Σ_{i<S} w_i·∇IPKD(r_i)`, teacher logits from
//!   the same full-width forward pass.
//! * SlimTrain: every width against ground truth, widest first, unweighted.
//! * USTrain: full-width CE, then unweighted IPKD at the smallest width and
//!   `n − 2` intermediate widths drawn without replacement.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::loss::{cross_entropy_grad, ipkd_grad};
use super::optim::{LrSchedule, Optimizer, OptimizerState};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::slim::{backward_trace, forward_trace, build_mask, Layout, SlimmableParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    /// One weight per entry of `width_ratios`; the last belongs to 1.0x.
    pub st_weights: Vec<f64>,
    /// Ascending, ending at 1.0.
    pub width_ratios: Vec<f64>,
    pub lr: LrSchedule,
    pub optimizer: Optimizer,
    pub batch_size: usize,
}

impl TrainConfig {
    /// Two widths (0.5x, 1.0x), equal weights, Adam at `1e-3`, batch 64.
    pub fn slimfl_default() -> Self {
        Self {
            st_weights: vec![0.5, 0.5],
            width_ratios: vec![0.5, 1.0],
            lr: LrSchedule::Constant { eta0: 1e-3 },
            optimizer: Optimizer::adam(),
            batch_size: 64,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let s = self.width_ratios.len();
        if s == 0 {
            return Err(Error::config("train.width_ratios", "must not be empty"));
        }
        if self.st_weights.len() != s {
            return Err(Error::config(
                "train.st_weights",
                format!("expected {s} weights, one per width, got {}", self.st_weights.len()),
            ));
        }
        if self.st_weights.iter().any(|&w| !(w > 0.0)) {
            return Err(Error::config("train.st_weights", "every weight must be positive"));
        }
        let sum: f64 = self.st_weights.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::config("train.st_weights", format!("must sum to 1, got {sum}")));
        }
        if self.width_ratios.iter().any(|&r| !(r > 0.0 && r <= 1.0)) {
            return Err(Error::config("train.width_ratios", "ratios must lie in (0, 1]"));
        }
        if self.width_ratios.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::config("train.width_ratios", "must be strictly ascending"));
        }
        if self.width_ratios[s - 1] != 1.0 {
            return Err(Error::config("train.width_ratios", "must end with 1.0"));
        }
        if self.batch_size == 0 {
            return Err(Error::config("train.batch_size", "must be at least 1"));
        }
        match self.lr {
            LrSchedule::Constant { eta0 } if !(eta0 > 0.0) => {
                Err(Error::config("train.eta0", "must be positive"))
            }
            LrSchedule::Theorem1 { mu, l } if !(mu > 0.0 && mu <= l) => {
                Err(Error::config("train.lr", "theorem1 schedule needs 0 < mu <= L"))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LocalAlgorithm {
    SusTrain,
    SlimTrain,
    /// `widths_per_iter` counts the full and smallest widths.
    UsTrain { widths_per_iter: usize },
    /// Plain training of one fixed width, used by the vanilla baselines.
    FixedWidth { ratio: f64 },
}

/// Loss values seen while forming one accumulated gradient.
///
/// `kd_losses` holds one entry per sub-width that contributed, ascending by
/// width. For SlimTrain those entries are ground-truth losses.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LossReport {
    pub ce_full: f64,
    pub kd_losses: Vec<f64>,
    pub combined: f64,
}

/// A differentiable loss over a parameter vector that can be evaluated at
/// any width. Implementations add `scale · ∇loss` into `grad`.
pub trait LocalObjective {
    /// Whatever a distilling width needs from the full-width pass.
    type Teacher;

    fn supervised(
        &self,
        params: &[f64],
        ratio: f64,
        scale: f64,
        grad: &mut [f64],
    ) -> Result<(f64, Self::Teacher)>;

    fn distill(
        &self,
        params: &[f64],
        ratio: f64,
        teacher: &Self::Teacher,
        scale: f64,
        grad: &mut [f64],
    ) -> Result<f64>;
}

/// Batch of labelled samples evaluated through a slimmable MLP.
#[derive(Debug, Clone, Copy)]
pub struct NetBatch<'a> {
    pub layout: &'a Layout,
    pub inputs: &'a Matrix,
    pub labels: &'a [usize],
}

impl LocalObjective for NetBatch<'_> {
    type Teacher = Matrix;

    fn supervised(
        &self,
        params: &[f64],
        ratio: f64,
        scale: f64,
        grad: &mut [f64],
    ) -> Result<(f64, Matrix)> {
        let mask = build_mask(self.layout, ratio)?;
        let trace = forward_trace(self.layout, params, &mask, self.inputs)?;
        let (loss, g) = cross_entropy_grad(trace.logits(), self.labels)?;
        backward_trace(self.layout, params, &trace, &g, scale, grad)?;
        let logits = trace.logits().clone();
        Ok((loss, logits))
    }

    fn distill(
        &self,
        params: &[f64],
        ratio: f64,
        teacher: &Matrix,
        scale: f64,
        grad: &mut [f64],
    ) -> Result<f64> {
        let mask = build_mask(self.layout, ratio)?;
        let trace = forward_trace(self.layout, params, &mask, self.inputs)?;
        let (loss, g) = ipkd_grad(trace.logits(), teacher)?;
        backward_trace(self.layout, params, &trace, &g, scale, grad)?;
        Ok(loss)
    }
}

pub fn sustrain_gradient<O: LocalObjective>(
    obj: &O,
    params: &[f64],
    cfg: &TrainConfig,
) -> Result<(Vec<f64>, LossReport)> {
    let s = cfg.width_ratios.len();
    let mut grad = vec![0.0; params.len()];
    let w_full = cfg.st_weights[s - 1];
    let (ce_full, teacher) = obj.supervised(params, 1.0, w_full, &mut grad)?;
    let mut combined = w_full * ce_full;
    let mut kd_losses = Vec::with_capacity(s - 1);
    for i in 0..s - 1 {
        let w = cfg.st_weights[i];
        let kd = obj.distill(params, cfg.width_ratios[i], &teacher, w, &mut grad)?;
        combined += w * kd;
        kd_losses.push(kd);
    }
    Ok((grad, LossReport { ce_full, kd_losses, combined }))
}

pub fn slimtrain_gradient<O: LocalObjective>(
    obj: &O,
    params: &[f64],
    cfg: &TrainConfig,
) -> Result<(Vec<f64>, LossReport)> {
    let s = cfg.width_ratios.len();
    let mut grad = vec![0.0; params.len()];
    let (ce_full, _) = obj.supervised(params, 1.0, 1.0, &mut grad)?;
    let mut kd_losses = vec![0.0; s - 1];
    for i in (0..s - 1).rev() {
        kd_losses[i] = obj.supervised(params, cfg.width_ratios[i], 1.0, &mut grad)?.0;
    }
    let combined = ce_full + kd_losses.iter().sum::<f64>();
    Ok((grad, LossReport { ce_full, kd_losses, combined }))
}

/// Indices into `width_ratios` of the sub-widths USTrain distills this
/// iteration: the smallest always, plus `n − 2` distinct intermediates.
pub fn sandwich_widths<R: Rng + ?Sized>(s: usize, n: usize, rng: &mut R) -> Vec<usize> {
    if s < 2 || n < 2 {
        return Vec::new();
    }
    let inner = s - 2;
    let k = (n - 2).min(inner);
    let mut picked: Vec<usize> = rand::seq::index::sample(rng, inner, k)
        .into_iter()
        .map(|i| i + 1)
        .collect();
    picked.push(0);
    picked.sort_unstable();
    picked
}

pub fn ustrain_gradient<O: LocalObjective, R: Rng + ?Sized>(
    obj: &O,
    params: &[f64],
    cfg: &TrainConfig,
    widths_per_iter: usize,
    rng: &mut R,
) -> Result<(Vec<f64>, LossReport)> {
    let mut grad = vec![0.0; params.len()];
    let (ce_full, teacher) = obj.supervised(params, 1.0, 1.0, &mut grad)?;
    let picked = sandwich_widths(cfg.width_ratios.len(), widths_per_iter, rng);
    let mut kd_losses = Vec::with_capacity(picked.len());
    for i in picked {
        kd_losses.push(obj.distill(params, cfg.width_ratios[i], &teacher, 1.0, &mut grad)?);
    }
    let combined = ce_full + kd_losses.iter().sum::<f64>();
    Ok((grad, LossReport { ce_full, kd_losses, combined }))
}

pub fn fixed_width_gradient<O: LocalObjective>(
    obj: &O,
    params: &[f64],
    ratio: f64,
) -> Result<(Vec<f64>, LossReport)> {
    let mut grad = vec![0.0; params.len()];
    let (loss, _) = obj.supervised(params, ratio, 1.0, &mut grad)?;
    Ok((grad, LossReport { ce_full: loss, kd_losses: Vec::new(), combined: loss }))
}

/// Accumulated gradient of `algo` on one batch.
pub fn local_gradient<O: LocalObjective, R: Rng + ?Sized>(
    obj: &O,
    params: &[f64],
    cfg: &TrainConfig,
    algo: LocalAlgorithm,
    rng: &mut R,
) -> Result<(Vec<f64>, LossReport)> {
    match algo {
        LocalAlgorithm::SusTrain => sustrain_gradient(obj, params, cfg),
        LocalAlgorithm::SlimTrain => slimtrain_gradient(obj, params, cfg),
        LocalAlgorithm::UsTrain { widths_per_iter } => {
            ustrain_gradient(obj, params, cfg, widths_per_iter, rng)
        }
        LocalAlgorithm::FixedWidth { ratio } => fixed_width_gradient(obj, params, ratio),
    }
}

/// Forms the gradient and applies one optimizer step with the schedule's
/// step size for the optimizer's next iteration.
pub fn local_step<O: LocalObjective, R: Rng + ?Sized>(
    obj: &O,
    params: &mut [f64],
    cfg: &TrainConfig,
    algo: LocalAlgorithm,
    opt: &mut OptimizerState,
    rng: &mut R,
) -> Result<LossReport> {
    let (grad, report) = local_gradient(obj, params, cfg, algo, rng)?;
    let eta = cfg.lr.eta(opt.steps() as usize + 1);
    opt.step(params, &grad, eta);
    Ok(report)
}

pub fn sustrain_step(
    params: &mut SlimmableParams,
    inputs: &Matrix,
    labels: &[usize],
    cfg: &TrainConfig,
    opt: &mut OptimizerState,
) -> Result<LossReport> {
    let layout = params.layout().clone();
    let obj = NetBatch { layout: &layout, inputs, labels };
    let (grad, report) = sustrain_gradient(&obj, params.values(), cfg)?;
    let eta = cfg.lr.eta(opt.steps() as usize + 1);
    opt.step(params.values_mut(), &grad, eta);
    Ok(report)
}

pub fn slimtrain_step(
    params: &mut SlimmableParams,
    inputs: &Matrix,
    labels: &[usize],
    cfg: &TrainConfig,
    opt: &mut OptimizerState,
) -> Result<LossReport> {
    let layout = params.layout().clone();
    let obj = NetBatch { layout: &layout, inputs, labels };
    let (grad, report) = slimtrain_gradient(&obj, params.values(), cfg)?;
    let eta = cfg.lr.eta(opt.steps() as usize + 1);
    opt.step(params.values_mut(), &grad, eta);
    Ok(report)
}

pub fn ustrain_step<R: Rng + ?Sized>(
    params: &mut SlimmableParams,
    inputs: &Matrix,
    labels: &[usize],
    cfg: &TrainConfig,
    widths_per_iter: usize,
    opt: &mut OptimizerState,
    rng: &mut R,
) -> Result<LossReport> {
    let layout = params.layout().clone();
    let obj = NetBatch { layout: &layout, inputs, labels };
    let (grad, report) = ustrain_gradient(&obj, params.values(), cfg, widths_per_iter, rng)?;
    let eta = cfg.lr.eta(opt.steps() as usize + 1);
    opt.step(params.values_mut(), &grad, eta);
    Ok(report)
}
