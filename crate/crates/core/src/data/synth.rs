use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::Dataset;
use crate::matrix::Matrix;

/// Gaussian blobs: one `N(0, I)` mean per class, samples at
/// `mean + spread·N(0, I)`. Exactly `per_class` samples of each class,
/// interleaved by class.
pub fn synth_dataset<R: Rng + ?Sized>(
    classes: usize,
    per_class: usize,
    dim: usize,
    spread: f64,
    rng: &mut R,
) -> Dataset {
    let means: Vec<Vec<f64>> = (0..classes)
        .map(|_| (0..dim).map(|_| StandardNormal.sample(rng)).collect())
        .collect();
    let n = classes * per_class;
    let mut data = Vec::with_capacity(n * dim);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let c = i % classes;
        for m in &means[c] {
            let z: f64 = StandardNormal.sample(rng);
            data.push(m + spread * z);
        }
        labels.push(c);
    }
    Dataset::new(Matrix::from_vec(n, dim, data), labels, classes).expect("labels below classes")
}
