//! Losses, optimizers and the local slimmable training algorithms.

mod algo;
mod loss;
mod optim;

pub use algo::{
    fixed_width_gradient, local_gradient, local_step, sandwich_widths, slimtrain_gradient,
    slimtrain_step, sustrain_gradient, sustrain_step, ustrain_gradient, ustrain_step,
    LocalAlgorithm, LocalObjective, LossReport, NetBatch, TrainConfig,
};
pub use loss::{cross_entropy, cross_entropy_grad, ipkd_grad, ipkd_loss, softmax_rows};
pub use optim::{adam_update, AdamState, LrSchedule, Optimizer, OptimizerState};
