use serde::{Deserialize, Serialize};

use super::layout::Layout;
use crate::error::{Error, Result};

/// Binary mask over a flat parameter vector selecting one width
/// configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WidthMask {
    ratio: f64,
    bits: Vec<bool>,
}

impl WidthMask {
    /// Mask from explicit bits, for parameter vectors that are not laid out
    /// as a [`Layout`].
    pub fn from_bits(ratio: f64, bits: Vec<bool>) -> Result<Self> {
        check_ratio(ratio)?;
        Ok(Self { ratio, bits })
    }

    pub fn full(len: usize) -> Self {
        Self {
            ratio: 1.0,
            bits: vec![true; len],
        }
    }

    pub fn ratio(&self) -> f64 {
        self.ratio
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// `mask ⊙ values`.
    pub fn apply(&self, values: &[f64]) -> Vec<f64> {
        values
            .iter()
            .zip(&self.bits)
            .map(|(&v, &b)| if b { v } else { 0.0 })
            .collect()
    }

    /// Bits of the complementary segment (all-ones minus this mask).
    pub fn complement_bits(&self) -> Vec<bool> {
        self.bits.iter().map(|b| !b).collect()
    }

    /// Bits set here but not in `smaller`.
    pub fn difference(&self, smaller: &WidthMask) -> Vec<bool> {
        self.bits
            .iter()
            .zip(&smaller.bits)
            .map(|(&a, &b)| a && !b)
            .collect()
    }

    pub fn is_subset_of(&self, other: &WidthMask) -> bool {
        self.bits.iter().zip(&other.bits).all(|(&a, &b)| !a || b)
    }
}

fn check_ratio(ratio: f64) -> Result<()> {
    if ratio > 0.0 && ratio <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidRatio(ratio))
    }
}

/// Keeps the leading `⌈out·r⌉` rows of every output-slimmed layer and the
/// leading `⌈in·r⌉` columns of every input-slimmed layer (with matching
/// biases). Taking prefixes nests every narrower width inside every wider one.
pub fn build_mask(layout: &Layout, ratio: f64) -> Result<WidthMask> {
    check_ratio(ratio)?;
    let mut bits = vec![false; layout.param_count()];
    for (i, l) in layout.layers().iter().enumerate() {
        let (rows, cols) = layout.active_shape(i, ratio);
        let w = layout.weight_range(i);
        for r in 0..rows {
            let start = w.start + r * l.in_dim;
            bits[start..start + cols].fill(true);
        }
        let b = layout.bias_range(i);
        bits[b.start..b.start + rows].fill(true);
    }
    Ok(WidthMask { ratio, bits })
}
