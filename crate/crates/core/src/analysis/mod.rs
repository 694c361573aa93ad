//! Convergence bound, power split optimization, non-IIDness estimation and
//! width selection.

mod bound;
mod delta;
mod power;
mod width;

pub use bound::{lemma1_b, theorem1_bound, ConvergenceParams, FederatedQuadratic};
pub use delta::{estimate_delta, estimate_delta_with, DeltaEstimate};
pub use power::{
    golden_section, lambda_closed, lambda_printed, optimize_lambda, LambdaOptimum,
    PowerObjective,
};
pub use width::{ips, ips_width_selection, optimal_st_weights};
