//! Per-image compute and per-round payload accounting.

use serde::{Deserialize, Serialize};

use super::layout::Layout;
use super::mask::WidthMask;

/// Bits per parameter for IEEE single precision.
pub const BITS_PER_PARAM_F32: f64 = 32.0;

/// Bits per parameter implied by the UL-MobileNet reference payloads
/// (172,688 bits for 4,586 parameters), framing overhead included.
pub const BITS_PER_PARAM_REFERENCE: f64 = 172_688.0 / 4_586.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelCost {
    pub flops_per_image: u64,
    pub param_count: usize,
    pub bits_per_round: u64,
}

impl ModelCost {
    pub fn mflops(&self) -> f64 {
        self.flops_per_image as f64 / 1e6
    }

    pub fn megabits(&self) -> f64 {
        self.bits_per_round as f64 / 1e6
    }
}

/// Reference costs of one width of the UL-MobileNet used for energy
/// accounting. These are carried as constants, not recomputed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceWidth {
    pub ratio: f64,
    pub mflops: f64,
    pub params: usize,
    pub bits_per_round: u64,
    pub tx_power_mw: f64,
}

pub const UL_MOBILENET_1_0X: ReferenceWidth = ReferenceWidth {
    ratio: 1.0,
    mflops: 2.76,
    params: 4_586,
    bits_per_round: 172_688,
    tx_power_mw: 132.1,
};

pub const UL_MOBILENET_0_5X: ReferenceWidth = ReferenceWidth {
    ratio: 0.5,
    mflops: 0.79,
    params: 2_293,
    bits_per_round: 86_344,
    tx_power_mw: 67.4,
};

/// Per-image cost of the six UL-MobileNet widths `k/6x`, `k = 1..=6`, in MFLOPS.
pub const UL_MOBILENET_SIXTHS_MFLOPS: [f64; 6] = [0.23, 0.45, 0.97, 1.73, 2.71, 3.82];

/// Counts `2·rows·cols` FLOPs per layer for the active block plus one FLOP
/// per active hidden unit for the activation. Parameters are the mask's ones.
pub fn model_cost(layout: &Layout, mask: &WidthMask, bits_per_param: f64) -> ModelCost {
    let ratio = mask.ratio();
    let n = layout.layers().len();
    let flops = (0..n)
        .map(|i| {
            let (rows, cols) = layout.active_shape(i, ratio);
            let act = if i + 1 < n { rows } else { 0 };
            (2 * rows * cols + act) as u64
        })
        .sum();
    let param_count = mask.count_ones();
    ModelCost {
        flops_per_image: flops,
        param_count,
        bits_per_round: (param_count as f64 * bits_per_param).round() as u64,
    }
}
