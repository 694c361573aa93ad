use rand::Rng;
use serde::Serialize;

use crate::data::{Dataset, Shard};
use crate::error::{Error, Result};
use crate::slim::SlimmableParams;
use crate::train::{LocalObjective, NetBatch};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeltaEstimate {
    /// `σ̂_k²` per device.
    pub per_device: Vec<f64>,
    /// Part of `σ̂_k²` due to minibatch sampling inside the shard.
    pub local_variance: Vec<f64>,
    /// `‖∇F_k − ∇F‖²`, the shard's drift from the global gradient.
    pub heterogeneity: Vec<f64>,
    /// Mean of `per_device`.
    pub delta: f64,
    /// Population variance of `σ̂_k` across devices.
    pub sigma_bar: f64,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Estimates `σ̂_k² = E‖g_k − ∇F‖²`, where `g_k` is the mean gradient of
/// `batch` samples drawn with replacement from shard `k` and `∇F` is the
/// full-data gradient over all shards. `grad(indices)` returns the mean
/// gradient over the given samples.
pub fn estimate_delta_with<G, R>(
    grad: G,
    shards: &[Vec<usize>],
    batch: usize,
    draws: usize,
    rng: &mut R,
) -> DeltaEstimate
where
    G: Fn(&[usize]) -> Vec<f64>,
    R: Rng + ?Sized,
{
    let all: Vec<usize> = shards.iter().flatten().copied().collect();
    let global = grad(&all);
    let mut per_device = Vec::with_capacity(shards.len());
    let mut local_variance = Vec::with_capacity(shards.len());
    let mut heterogeneity = Vec::with_capacity(shards.len());
    for shard in shards {
        let mean_k = grad(shard);
        let mut total = 0.0;
        let mut local = 0.0;
        for _ in 0..draws {
            let idx: Vec<usize> = (0..batch).map(|_| shard[rng.random_range(0..shard.len())]).collect();
            let g = grad(&idx);
            total += sq_dist(&g, &global);
            local += sq_dist(&g, &mean_k);
        }
        per_device.push(total / draws as f64);
        local_variance.push(local / draws as f64);
        heterogeneity.push(sq_dist(&mean_k, &global));
    }
    let k = per_device.len() as f64;
    let delta = per_device.iter().sum::<f64>() / k;
    let sig: Vec<f64> = per_device.iter().map(|v| v.sqrt()).collect();
    let sig_mean = sig.iter().sum::<f64>() / k;
    let sigma_bar = sig.iter().map(|s| (s - sig_mean) * (s - sig_mean)).sum::<f64>() / k;
    DeltaEstimate {
        per_device,
        local_variance,
        heterogeneity,
        delta,
        sigma_bar,
    }
}

/// [`estimate_delta_with`] for the full-width cross-entropy gradient of a
/// slimmable network at `params`.
pub fn estimate_delta<R: Rng + ?Sized>(
    params: &SlimmableParams,
    data: &Dataset,
    shards: &[Shard],
    batch: usize,
    draws: usize,
    rng: &mut R,
) -> Result<DeltaEstimate> {
    let layout = params.layout();
    if layout.input_dim() != data.dim() {
        return Err(Error::Shape {
            context: "model input",
            expected: data.dim(),
            actual: layout.input_dim(),
        });
    }
    let grad = |idx: &[usize]| {
        let (x, y) = data.batch(idx);
        let obj = NetBatch { layout, inputs: &x, labels: &y };
        let mut g = vec![0.0; params.len()];
        obj.supervised(params.values(), 1.0, 1.0, &mut g)
            .expect("shapes checked by caller");
        g
    };
    let lists: Vec<Vec<usize>> = shards.iter().map(|s| s.indices.clone()).collect();
    Ok(estimate_delta_with(grad, &lists, batch, draws, rng))
}
