#![allow(dead_code)]

use slimfl::slim::Layout;
use slimfl::train::{LocalAlgorithm, TrainConfig};
use slimfl::Matrix;

/// Dense layer copied out of the flat vector: `w[r][c]` and `b[r]`.
pub struct DenseBlock {
    pub w: Vec<Vec<f64>>,
    pub b: Vec<f64>,
}

/// Physically extracts the sub-network of width `ratio`: every slimmed
/// dimension keeps its leading units.
pub fn extract(layout: &Layout, values: &[f64], ratio: f64) -> Vec<DenseBlock> {
    layout
        .layers()
        .iter()
        .enumerate()
        .map(|(i, l)| {
            let keep = |d: usize, slim: bool| {
                if slim {
                    ((d as f64 * ratio - 1e-9).ceil() as usize).clamp(1, d)
                } else {
                    d
                }
            };
            let rows = keep(l.out_dim, l.slim_output);
            let cols = keep(l.in_dim, l.slim_input);
            let w0 = layout.weight_range(i).start;
            let b0 = layout.bias_range(i).start;
            DenseBlock {
                w: (0..rows)
                    .map(|r| values[w0 + r * l.in_dim..w0 + r * l.in_dim + cols].to_vec())
                    .collect(),
                b: values[b0..b0 + rows].to_vec(),
            }
        })
        .collect()
}

/// Plain forward pass through extracted blocks.
pub fn dense_forward(blocks: &[DenseBlock], x: &[f64]) -> Vec<f64> {
    let mut h = x.to_vec();
    for (i, blk) in blocks.iter().enumerate() {
        let z: Vec<f64> = blk
            .w
            .iter()
            .zip(&blk.b)
            .map(|(row, b)| row.iter().zip(&h).map(|(w, x)| w * x).sum::<f64>() + b)
            .collect();
        h = if i + 1 < blocks.len() {
            z.into_iter().map(|v| v.clamp(0.0, 6.0)).collect()
        } else {
            z
        };
    }
    h
}

pub fn oracle_logits(layout: &Layout, values: &[f64], ratio: f64, x: &Matrix) -> Vec<Vec<f64>> {
    let blocks = extract(layout, values, ratio);
    (0..x.rows()).map(|r| dense_forward(&blocks, x.row(r))).collect()
}

fn log_softmax(z: &[f64]) -> Vec<f64> {
    let m = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lse = m + z.iter().map(|v| (v - m).exp()).sum::<f64>().ln();
    z.iter().map(|v| v - lse).collect()
}

pub fn oracle_ce(logits: &[Vec<f64>], labels: &[usize]) -> f64 {
    let n = logits.len() as f64;
    logits
        .iter()
        .zip(labels)
        .map(|(z, &y)| -log_softmax(z)[y])
        .sum::<f64>()
        / n
}

/// Cross-entropy of the student against the teacher's softmax.
pub fn oracle_kd(student: &[Vec<f64>], teacher: &[Vec<f64>]) -> f64 {
    let n = student.len() as f64;
    student
        .iter()
        .zip(teacher)
        .map(|(s, t)| {
            let ls = log_softmax(s);
            let lt = log_softmax(t);
            -lt.iter().zip(&ls).map(|(a, b)| a.exp() * b).sum::<f64>()
        })
        .sum::<f64>()
        / n
}

/// Central finite differences of `f` at `x`.
pub fn fd_gradient(f: impl Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    let mut y = x.to_vec();
    (0..x.len())
        .map(|i| {
            y[i] = x[i] + h;
            let up = f(&y);
            y[i] = x[i] - h;
            let down = f(&y);
            y[i] = x[i];
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// `‖a − b‖ / max(‖a‖, ‖b‖)`.
pub fn rel_error(a: &[f64], b: &[f64]) -> f64 {
    let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    diff / na.max(nb).max(1e-300)
}

pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, v.sqrt())
}

/// Repository root, for configs and data that tests read.
pub fn repo_root() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

/// Loss minimized by one local step of `algo`, computed from extracted
/// sub-networks. Distillation targets come from `teacher_values` and are
/// held fixed, as the update treats them.
pub fn oracle_objective(
    algo: LocalAlgorithm,
    cfg: &TrainConfig,
    layout: &Layout,
    values: &[f64],
    teacher_values: &[f64],
    x: &Matrix,
    y: &[usize],
) -> f64 {
    let s = cfg.width_ratios.len();
    let teacher = oracle_logits(layout, teacher_values, 1.0, x);
    let at = |r: f64| oracle_logits(layout, values, r, x);
    match algo {
        LocalAlgorithm::SusTrain => {
            let mut l = cfg.st_weights[s - 1] * oracle_ce(&at(1.0), y);
            for i in 0..s - 1 {
                l += cfg.st_weights[i] * oracle_kd(&at(cfg.width_ratios[i]), &teacher);
            }
            l
        }
        LocalAlgorithm::SlimTrain => cfg.width_ratios.iter().map(|&r| oracle_ce(&at(r), y)).sum(),
        LocalAlgorithm::UsTrain { widths_per_iter } => {
            // smallest width plus every inner width (enough draws to pick all)
            assert!(widths_per_iter >= s, "oracle assumes every width is drawn");
            let mut l = oracle_ce(&at(1.0), y);
            for i in 0..s - 1 {
                l += oracle_kd(&at(cfg.width_ratios[i]), &teacher);
            }
            l
        }
        LocalAlgorithm::FixedWidth { ratio } => oracle_ce(&at(ratio), y),
    }
}
