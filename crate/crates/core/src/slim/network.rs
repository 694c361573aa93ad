//! Forward and backward passes of a slimmable MLP at any width.
//!
//! Only the active prefix of every weight matrix is touched, so a pass at
//! ratio `r` costs roughly `r²` of the full pass on hidden-to-hidden layers.
//! Hidden layers use ReLU6; the output layer emits raw logits.

use super::layout::{Layout, SlimmableParams};
use super::mask::WidthMask;
use crate::error::{Error, Result};
use crate::matrix::Matrix;

pub fn relu6(x: f64) -> f64 {
    x.clamp(0.0, 6.0)
}

fn relu6_grad(z: f64) -> f64 {
    if z > 0.0 && z < 6.0 {
        1.0
    } else {
        0.0
    }
}

/// Activations kept from a forward pass for reuse by the backward pass.
#[derive(Debug, Clone)]
pub(crate) struct Trace {
    ratio: f64,
    /// Input to each layer (batch for layer 0, post-activation afterwards).
    inputs: Vec<Matrix>,
    /// Pre-activation of each layer; the last one holds the logits.
    pre: Vec<Matrix>,
}

impl Trace {
    pub(crate) fn logits(&self) -> &Matrix {
        self.pre.last().expect("layout has at least one layer")
    }
}

fn check_inputs(layout: &Layout, values: &[f64], mask: &WidthMask, batch: &Matrix) -> Result<()> {
    if values.len() != layout.param_count() {
        return Err(Error::Shape {
            context: "parameter vector",
            expected: layout.param_count(),
            actual: values.len(),
        });
    }
    if mask.len() != values.len() {
        return Err(Error::Shape {
            context: "width mask",
            expected: values.len(),
            actual: mask.len(),
        });
    }
    if batch.cols() != layout.input_dim() {
        return Err(Error::Shape {
            context: "batch features",
            expected: layout.input_dim(),
            actual: batch.cols(),
        });
    }
    Ok(())
}

pub(crate) fn forward_trace(
    layout: &Layout,
    values: &[f64],
    mask: &WidthMask,
    batch: &Matrix,
) -> Result<Trace> {
    check_inputs(layout, values, mask, batch)?;
    let ratio = mask.ratio();
    let n_layers = layout.layers().len();
    let n = batch.rows();
    let mut inputs = Vec::with_capacity(n_layers);
    let mut pre = Vec::with_capacity(n_layers);
    let mut current = batch.clone();
    for (i, spec) in layout.layers().iter().enumerate() {
        let (rows, cols) = layout.active_shape(i, ratio);
        let w = &values[layout.weight_range(i)];
        let b = &values[layout.bias_range(i)];
        let mut z = Matrix::zeros(n, rows);
        for s in 0..n {
            let x = &current.row(s)[..cols];
            let out = z.row_mut(s);
            for (r, o) in out.iter_mut().enumerate() {
                let wr = &w[r * spec.in_dim..r * spec.in_dim + cols];
                *o = b[r] + wr.iter().zip(x).map(|(a, c)| a * c).sum::<f64>();
            }
        }
        let next = if i + 1 < n_layers {
            let mut a = z.clone();
            a.as_mut_slice().iter_mut().for_each(|v| *v = relu6(*v));
            Some(a)
        } else {
            None
        };
        inputs.push(current);
        pre.push(z);
        if let Some(a) = next {
            current = a;
        } else {
            break;
        }
    }
    Ok(Trace { ratio, inputs, pre })
}

/// Accumulates `scale · ∂L/∂θ` into `grad`, where `loss_grad` is `∂L/∂logits`.
pub(crate) fn backward_trace(
    layout: &Layout,
    values: &[f64],
    trace: &Trace,
    loss_grad: &Matrix,
    scale: f64,
    grad: &mut [f64],
) -> Result<()> {
    let logits = trace.logits();
    if loss_grad.rows() != logits.rows() || loss_grad.cols() != logits.cols() {
        return Err(Error::Shape {
            context: "loss gradient",
            expected: logits.rows() * logits.cols(),
            actual: loss_grad.rows() * loss_grad.cols(),
        });
    }
    if grad.len() != values.len() {
        return Err(Error::Shape {
            context: "gradient buffer",
            expected: values.len(),
            actual: grad.len(),
        });
    }
    let n = logits.rows();
    let mut delta = loss_grad.clone();
    if scale != 1.0 {
        delta.as_mut_slice().iter_mut().for_each(|v| *v *= scale);
    }
    for i in (0..layout.layers().len()).rev() {
        let spec = &layout.layers()[i];
        let (rows, cols) = layout.active_shape(i, trace.ratio);
        let input = &trace.inputs[i];
        let wr = layout.weight_range(i);
        let br = layout.bias_range(i);
        {
            let (gw, gb) = grad[wr.start..br.end].split_at_mut(spec.weight_len());
            for s in 0..n {
                let x = &input.row(s)[..cols];
                for (r, &d) in delta.row(s).iter().enumerate() {
                    if d == 0.0 {
                        continue;
                    }
                    gb[r] += d;
                    let g = &mut gw[r * spec.in_dim..r * spec.in_dim + cols];
                    g.iter_mut().zip(x).for_each(|(g, &x)| *g += d * x);
                }
            }
        }
        if i == 0 {
            break;
        }
        let w = &values[wr];
        let prev_pre = &trace.pre[i - 1];
        let mut prev_delta = Matrix::zeros(n, cols);
        for s in 0..n {
            let out = prev_delta.row_mut(s);
            for (r, &d) in delta.row(s).iter().enumerate().take(rows) {
                if d == 0.0 {
                    continue;
                }
                let wrow = &w[r * spec.in_dim..r * spec.in_dim + cols];
                out.iter_mut().zip(wrow).for_each(|(o, &w)| *o += d * w);
            }
            for (o, &z) in out.iter_mut().zip(prev_pre.row(s)) {
                *o *= relu6_grad(z);
            }
        }
        delta = prev_delta;
    }
    Ok(())
}

/// Logits of the sub-network selected by `mask`.
pub fn forward(params: &SlimmableParams, mask: &WidthMask, batch: &Matrix) -> Result<Matrix> {
    let trace = forward_trace(params.layout(), params.values(), mask, batch)?;
    Ok(trace.pre.into_iter().last().expect("at least one layer"))
}

/// Gradient of a loss with respect to every parameter, given the loss
/// gradient at the sub-network's logits. Coordinates outside `mask` are
/// exactly zero.
pub fn backward(
    params: &SlimmableParams,
    mask: &WidthMask,
    batch: &Matrix,
    loss_grad: &Matrix,
) -> Result<Vec<f64>> {
    let trace = forward_trace(params.layout(), params.values(), mask, batch)?;
    let mut grad = vec![0.0; params.len()];
    backward_trace(params.layout(), params.values(), &trace, loss_grad, 1.0, &mut grad)?;
    Ok(grad)
}
