//! Slimmable networks stored as flat parameter vectors with width masks.

pub mod checkpoint;
mod cost;
mod layout;
mod mask;
mod network;

pub use cost::{
    model_cost, ModelCost, ReferenceWidth, BITS_PER_PARAM_F32, BITS_PER_PARAM_REFERENCE,
    UL_MOBILENET_0_5X, UL_MOBILENET_1_0X, UL_MOBILENET_SIXTHS_MFLOPS,
};
pub use layout::{active_units, LayerKind, LayerSpec, Layout, SlimmableParams};
pub use mask::{build_mask, WidthMask};
pub use network::{backward, forward, relu6};
pub(crate) use network::{backward_trace, forward_trace};
