//! Datasets, IDX files, non-IID partitioning and batching.

mod idx;
mod partition;
mod synth;

pub use idx::{load_idx, parse_idx_images, parse_idx_labels, write_idx, IdxImages};
pub use partition::{class_entropy, dirichlet_partition, Shard};
pub use synth::synth_dataset;

use rand::Rng;

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Labelled samples, one row of `features` per sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub features: Matrix,
    pub labels: Vec<usize>,
    pub classes: usize,
}

impl Dataset {
    pub fn new(features: Matrix, labels: Vec<usize>, classes: usize) -> Result<Self> {
        if features.rows() != labels.len() {
            return Err(Error::Shape {
                context: "dataset labels",
                expected: features.rows(),
                actual: labels.len(),
            });
        }
        if let Some(&label) = labels.iter().find(|&&l| l >= classes) {
            return Err(Error::InvalidLabel { label, classes });
        }
        Ok(Self {
            features,
            labels,
            classes,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features.cols()
    }

    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            features: self.features.select_rows(indices),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            classes: self.classes,
        }
    }

    /// Per-class counts.
    pub fn histogram(&self) -> Vec<usize> {
        let mut h = vec![0; self.classes];
        self.labels.iter().for_each(|&l| h[l] += 1);
        h
    }

    /// Features and labels of the given rows.
    pub fn batch(&self, indices: &[usize]) -> (Matrix, Vec<usize>) {
        (
            self.features.select_rows(indices),
            indices.iter().map(|&i| self.labels[i]).collect(),
        )
    }
}

/// `batch_size` distinct positions drawn from `pool`, or the whole pool in
/// random order when it is smaller than a batch.
pub fn sample_batch<R: Rng + ?Sized>(pool: &[usize], batch_size: usize, rng: &mut R) -> Vec<usize> {
    let k = batch_size.min(pool.len());
    rand::seq::index::sample(rng, pool.len(), k)
        .into_iter()
        .map(|i| pool[i])
        .collect()
}
