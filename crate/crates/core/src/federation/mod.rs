//! Federated rounds: local training, superposed uplink, segment-wise
//! aggregation and downlink.

mod aggregate;
mod eval;
mod sim;

pub use aggregate::{aggregate, aggregate_segments, Weighting, WeightingMode};
pub use eval::{accuracy, evaluate};
pub use sim::{
    CostProfile, Federation, FederationConfig, Lane, RoundMetrics, Scheme, VanillaRate,
};
