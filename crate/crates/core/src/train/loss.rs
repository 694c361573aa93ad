//! Cross-entropy against labels and in-place distillation against detached
//! teacher logits. Both average over the batch.

use crate::error::{Error, Result};
use crate::matrix::Matrix;

fn log_softmax(row: &[f64]) -> Vec<f64> {
    let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + row.iter().map(|&v| (v - max).exp()).sum::<f64>().ln();
    row.iter().map(|&v| v - lse).collect()
}

pub fn softmax_rows(logits: &Matrix) -> Matrix {
    let mut out = logits.clone();
    for r in 0..out.rows() {
        let ls = log_softmax(logits.row(r));
        out.row_mut(r).iter_mut().zip(ls).for_each(|(o, l)| *o = l.exp());
    }
    out
}

fn check_labels(logits: &Matrix, labels: &[usize]) -> Result<()> {
    if labels.len() != logits.rows() {
        return Err(Error::Shape {
            context: "labels",
            expected: logits.rows(),
            actual: labels.len(),
        });
    }
    if let Some(&label) = labels.iter().find(|&&l| l >= logits.cols()) {
        return Err(Error::InvalidLabel {
            label,
            classes: logits.cols(),
        });
    }
    Ok(())
}

fn check_pair(student: &Matrix, teacher: &Matrix) -> Result<()> {
    if student.rows() != teacher.rows() || student.cols() != teacher.cols() {
        return Err(Error::Shape {
            context: "teacher logits",
            expected: student.rows() * student.cols(),
            actual: teacher.rows() * teacher.cols(),
        });
    }
    Ok(())
}

pub fn cross_entropy(logits: &Matrix, labels: &[usize]) -> Result<f64> {
    cross_entropy_grad(logits, labels).map(|(l, _)| l)
}

/// Loss and its gradient at the logits, `(softmax − onehot)/n`.
pub fn cross_entropy_grad(logits: &Matrix, labels: &[usize]) -> Result<(f64, Matrix)> {
    check_labels(logits, labels)?;
    let n = logits.rows() as f64;
    let mut grad = Matrix::zeros(logits.rows(), logits.cols());
    let mut loss = 0.0;
    for (r, &y) in labels.iter().enumerate() {
        let ls = log_softmax(logits.row(r));
        loss -= ls[y];
        let g = grad.row_mut(r);
        for (c, l) in ls.into_iter().enumerate() {
            g[c] = (l.exp() - if c == y { 1.0 } else { 0.0 }) / n;
        }
    }
    Ok((loss / n, grad))
}

pub fn ipkd_loss(student: &Matrix, teacher: &Matrix) -> Result<f64> {
    ipkd_grad(student, teacher).map(|(l, _)| l)
}

/// Loss and gradient at the student logits, `(softmax(s) − softmax(t))/n`.
/// The teacher is treated as a constant.
pub fn ipkd_grad(student: &Matrix, teacher: &Matrix) -> Result<(f64, Matrix)> {
    check_pair(student, teacher)?;
    let n = student.rows() as f64;
    let target = softmax_rows(teacher);
    let mut grad = Matrix::zeros(student.rows(), student.cols());
    let mut loss = 0.0;
    for r in 0..student.rows() {
        let ls = log_softmax(student.row(r));
        let t = target.row(r);
        let g = grad.row_mut(r);
        for c in 0..ls.len() {
            loss -= t[c] * ls[c];
            g[c] = (ls[c].exp() - t[c]) / n;
        }
    }
    Ok((loss / n, grad))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_logits_give_ln_classes() {
        let logits = Matrix::zeros(3, 10);
        let l = cross_entropy(&logits, &[0, 4, 9]).unwrap();
        assert!((l - 10f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn confident_correct_logits_near_zero() {
        let mut logits = Matrix::zeros(1, 5);
        logits.set(0, 2, 20.0);
        assert!(cross_entropy(&logits, &[2]).unwrap() <= 1e-8);
    }

    #[test]
    fn matches_per_sample_formula() {
        let logits = Matrix::from_rows(&[
            vec![0.3, -1.2, 2.0],
            vec![1.0, 1.0, -0.5],
            vec![-3.0, 0.2, 0.1],
            vec![0.0, 5.0, -2.0],
        ]);
        let labels = [2, 0, 1, 1];
        let mut expect = 0.0;
        for (r, &y) in labels.iter().enumerate() {
            let row = logits.row(r);
            let z: f64 = row.iter().map(|v| v.exp()).sum();
            expect += -(row[y].exp() / z).ln();
        }
        expect /= 4.0;
        assert!((cross_entropy(&logits, &labels).unwrap() - expect).abs() < 1e-12);
    }

    #[test]
    fn bad_label_is_rejected() {
        let logits = Matrix::zeros(2, 3);
        assert!(matches!(
            cross_entropy(&logits, &[0, 3]),
            Err(Error::InvalidLabel { label: 3, classes: 3 })
        ));
        assert!(matches!(cross_entropy(&logits, &[0]), Err(Error::Shape { .. })));
    }

    #[test]
    fn ipkd_self_is_entropy() {
        let t = Matrix::from_rows(&[vec![0.5, -1.0, 2.0]]);
        let p = softmax_rows(&t);
        let h: f64 = -p.row(0).iter().map(|q| q * q.ln()).sum::<f64>();
        assert!((ipkd_loss(&t, &t).unwrap() - h).abs() < 1e-12);
        let other = Matrix::from_rows(&[vec![0.0, 0.0, 0.0]]);
        assert!(ipkd_loss(&other, &t).unwrap() > h);
    }

    #[test]
    fn ipkd_uniform_teacher() {
        let s = Matrix::from_rows(&[vec![1.0, 2.0, -1.0, 0.0]]);
        let t = Matrix::zeros(1, 4);
        let ls = log_softmax(s.row(0));
        let expect = -ls.iter().sum::<f64>() / 4.0;
        assert!((ipkd_loss(&s, &t).unwrap() - expect).abs() < 1e-12);
    }

    #[test]
    fn ipkd_matches_double_loop() {
        let s = Matrix::from_rows(&[vec![0.1, 0.9, -0.4], vec![2.0, -1.0, 0.5]]);
        let t = Matrix::from_rows(&[vec![1.1, -0.2, 0.3], vec![0.0, 0.7, -1.5]]);
        let mut expect = 0.0;
        for r in 0..2 {
            let zs: f64 = s.row(r).iter().map(|v| v.exp()).sum();
            let zt: f64 = t.row(r).iter().map(|v| v.exp()).sum();
            for c in 0..3 {
                expect -= (t.get(r, c).exp() / zt) * (s.get(r, c).exp() / zs).ln();
            }
        }
        expect /= 2.0;
        assert!((ipkd_loss(&s, &t).unwrap() - expect).abs() < 1e-12);
    }
}
