use crate::data::Dataset;
use crate::error::Result;
use crate::slim::{build_mask, forward, SlimmableParams};

const CHUNK: usize = 512;

/// Top-1 accuracy of the sub-network at `ratio`. Ties go to the lowest class.
pub fn accuracy(params: &SlimmableParams, test: &Dataset, ratio: f64) -> Result<f64> {
    let mask = build_mask(params.layout(), ratio)?;
    let mut correct = 0usize;
    let idx: Vec<usize> = (0..test.len()).collect();
    for chunk in idx.chunks(CHUNK) {
        let (x, y) = test.batch(chunk);
        let logits = forward(params, &mask, &x)?;
        for (r, &label) in y.iter().enumerate() {
            let row = logits.row(r);
            let mut best = 0;
            for c in 1..row.len() {
                if row[c] > row[best] {
                    best = c;
                }
            }
            correct += (best == label) as usize;
        }
    }
    Ok(correct as f64 / test.len().max(1) as f64)
}

/// `(acc_0.5x, acc_1.0x)`.
pub fn evaluate(params: &SlimmableParams, test: &Dataset) -> Result<(f64, f64)> {
    Ok((accuracy(params, test, 0.5)?, accuracy(params, test, 1.0)?))
}
