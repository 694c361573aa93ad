use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Gamma};
use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Shard {
    pub device_id: usize,
    pub indices: Vec<usize>,
    pub class_histogram: Vec<usize>,
}

/// Splits each class across `k` devices with proportions drawn from a
/// symmetric Dirichlet(α). Devices left empty take one sample from the
/// currently largest shard.
pub fn dirichlet_partition<R: Rng + ?Sized>(
    labels: &[usize],
    classes: usize,
    k: usize,
    alpha: f64,
    rng: &mut R,
) -> Result<Vec<Shard>> {
    if k == 0 {
        return Err(Error::config("data.devices", "need at least one device"));
    }
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::config("data.alpha", format!("must be positive, got {alpha}")));
    }
    if k > labels.len() {
        return Err(Error::TooManyDevices {
            devices: k,
            samples: labels.len(),
        });
    }
    let gamma = Gamma::new(alpha, 1.0).map_err(|e| Error::config("data.alpha", e.to_string()))?;
    let mut by_class = vec![Vec::new(); classes];
    for (i, &l) in labels.iter().enumerate() {
        if l >= classes {
            return Err(Error::InvalidLabel { label: l, classes });
        }
        by_class[l].push(i);
    }
    let mut shards: Vec<Vec<usize>> = vec![Vec::new(); k];
    for mut idx in by_class {
        if idx.is_empty() {
            continue;
        }
        idx.shuffle(rng);
        let draws: Vec<f64> = (0..k).map(|_| gamma.sample(rng)).collect();
        let total: f64 = draws.iter().sum();
        let n = idx.len();
        if !(total > 0.0) {
            // every draw underflowed; the class goes to one device
            let d = rng.random_range(0..k);
            shards[d].extend_from_slice(&idx);
            continue;
        }
        let mut acc = 0.0;
        let mut start = 0;
        for (d, g) in draws.iter().enumerate() {
            acc += g / total;
            let end = if d + 1 == k {
                n
            } else {
                ((acc * n as f64).round() as usize).clamp(start, n)
            };
            shards[d].extend_from_slice(&idx[start..end]);
            start = end;
        }
    }
    while let Some(empty) = shards.iter().position(Vec::is_empty) {
        let largest = (0..k)
            .max_by_key(|&d| (shards[d].len(), std::cmp::Reverse(d)))
            .expect("k >= 1");
        let moved = shards[largest].pop().expect("largest shard is non-empty");
        shards[empty].push(moved);
    }
    Ok(shards
        .into_iter()
        .enumerate()
        .map(|(device_id, mut indices)| {
            indices.sort_unstable();
            let mut class_histogram = vec![0; classes];
            indices.iter().for_each(|&i| class_histogram[labels[i]] += 1);
            Shard {
                device_id,
                indices,
                class_histogram,
            }
        })
        .collect())
}

/// Shannon entropy (nats) of a class histogram.
pub fn class_entropy(histogram: &[usize]) -> f64 {
    let n: usize = histogram.iter().sum();
    if n == 0 {
        return 0.0;
    }
    histogram
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n as f64;
            -p * p.ln()
        })
        .sum()
}
