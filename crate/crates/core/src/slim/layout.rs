use std::ops::Range;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LayerKind {
    Input,
    Dense,
    Output,
}

impl LayerKind {
    pub(crate) fn code(self) -> u32 {
        match self {
            LayerKind::Input => 0,
            LayerKind::Dense => 1,
            LayerKind::Output => 2,
        }
    }

    pub(crate) fn from_code(code: u32) -> Option<Self> {
        match code {
            0 => Some(LayerKind::Input),
            1 => Some(LayerKind::Dense),
            2 => Some(LayerKind::Output),
            _ => None,
        }
    }
}

/// One fully connected layer. Weights are stored row-major as an
/// `out_dim x in_dim` matrix followed by `out_dim` biases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerSpec {
    pub kind: LayerKind,
    pub in_dim: usize,
    pub out_dim: usize,
    pub slim_input: bool,
    pub slim_output: bool,
}

impl LayerSpec {
    pub fn weight_len(&self) -> usize {
        self.in_dim * self.out_dim
    }

    pub fn param_len(&self) -> usize {
        self.weight_len() + self.out_dim
    }
}

/// Number of units kept when a dimension of size `dim` is shrunk by `ratio`.
///
/// The tiny negative offset keeps products such as `10 * 0.3` (which is
/// `3.0000000000000004` in binary) from rounding up an extra unit.
pub fn active_units(dim: usize, ratio: f64) -> usize {
    let kept = (dim as f64 * ratio - 1e-9).ceil() as usize;
    kept.clamp(1, dim)
}

/// Validated sequence of layers plus the offset of each layer's block in the
/// flat parameter vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layout {
    layers: Vec<LayerSpec>,
    offsets: Vec<usize>,
    len: usize,
}

impl Layout {
    pub fn new(layers: Vec<LayerSpec>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::InvalidLayout("no layers".into()));
        }
        let n = layers.len();
        for (i, l) in layers.iter().enumerate() {
            if l.in_dim == 0 || l.out_dim == 0 {
                return Err(Error::InvalidLayout(format!("layer {i} has a zero dimension")));
            }
            let expected = if i + 1 == n {
                LayerKind::Output
            } else if i == 0 {
                LayerKind::Input
            } else {
                LayerKind::Dense
            };
            if l.kind != expected {
                return Err(Error::InvalidLayout(format!(
                    "layer {i} is {:?}, expected {expected:?}",
                    l.kind
                )));
            }
        }
        if layers[0].slim_input {
            return Err(Error::InvalidLayout("raw input features cannot be slimmed".into()));
        }
        if layers[n - 1].slim_output {
            return Err(Error::InvalidLayout("class logits cannot be slimmed".into()));
        }
        for (i, pair) in layers.windows(2).enumerate() {
            if pair[0].out_dim != pair[1].in_dim {
                return Err(Error::InvalidLayout(format!(
                    "layer {i} emits {} units but layer {} takes {}",
                    pair[0].out_dim,
                    i + 1,
                    pair[1].in_dim
                )));
            }
            if pair[0].slim_output != pair[1].slim_input {
                return Err(Error::InvalidLayout(format!(
                    "layers {i} and {} disagree on slimming their shared dimension",
                    i + 1
                )));
            }
        }
        let mut offsets = Vec::with_capacity(n);
        let mut len = 0;
        for l in &layers {
            offsets.push(len);
            len += l.param_len();
        }
        Ok(Self {
            layers,
            offsets,
            len,
        })
    }

    /// Multilayer perceptron whose hidden layers are slimmed on their output
    /// side (and correspondingly on the next layer's input side). With no
    /// hidden layers this is a plain softmax regression that never slims.
    pub fn slim_mlp(input: usize, hidden: &[usize], classes: usize) -> Result<Self> {
        let mut dims = Vec::with_capacity(hidden.len() + 2);
        dims.push(input);
        dims.extend_from_slice(hidden);
        dims.push(classes);
        let n = dims.len() - 1;
        let layers = (0..n)
            .map(|i| LayerSpec {
                kind: if i + 1 == n {
                    LayerKind::Output
                } else if i == 0 {
                    LayerKind::Input
                } else {
                    LayerKind::Dense
                },
                in_dim: dims[i],
                out_dim: dims[i + 1],
                slim_input: i > 0,
                slim_output: i + 1 < n,
            })
            .collect();
        Self::new(layers)
    }

    pub fn layers(&self) -> &[LayerSpec] {
        &self.layers
    }

    pub fn param_count(&self) -> usize {
        self.len
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].in_dim
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].out_dim
    }

    pub fn weight_range(&self, layer: usize) -> Range<usize> {
        let start = self.offsets[layer];
        start..start + self.layers[layer].weight_len()
    }

    pub fn bias_range(&self, layer: usize) -> Range<usize> {
        let l = &self.layers[layer];
        let start = self.offsets[layer] + l.weight_len();
        start..start + l.out_dim
    }

    /// `(rows, cols)` of layer `layer`'s weight matrix that stay active at `ratio`.
    pub fn active_shape(&self, layer: usize, ratio: f64) -> (usize, usize) {
        let l = &self.layers[layer];
        let rows = if l.slim_output {
            active_units(l.out_dim, ratio)
        } else {
            l.out_dim
        };
        let cols = if l.slim_input {
            active_units(l.in_dim, ratio)
        } else {
            l.in_dim
        };
        (rows, cols)
    }
}

/// Flat parameter vector of a slimmable network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlimmableParams {
    layout: Layout,
    values: Vec<f64>,
}

impl SlimmableParams {
    pub fn zeros(layout: Layout) -> Self {
        let values = vec![0.0; layout.param_count()];
        Self { layout, values }
    }

    pub fn from_values(layout: Layout, values: Vec<f64>) -> Result<Self> {
        if values.len() != layout.param_count() {
            return Err(Error::Shape {
                context: "parameter vector",
                expected: layout.param_count(),
                actual: values.len(),
            });
        }
        Ok(Self { layout, values })
    }

    /// Uniform `±1/sqrt(fan_in)` initialization for weights and biases.
    pub fn init<R: Rng + ?Sized>(layout: Layout, rng: &mut R) -> Self {
        let mut values = vec![0.0; layout.param_count()];
        for (i, l) in layout.layers().iter().enumerate() {
            let bound = 1.0 / (l.in_dim as f64).sqrt();
            let range = layout.weight_range(i).start..layout.bias_range(i).end;
            for v in &mut values[range] {
                *v = rng.random_range(-bound..bound);
            }
        }
        Self { layout, values }
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}
