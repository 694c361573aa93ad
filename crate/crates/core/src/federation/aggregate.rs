use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::slim::WidthMask;

/// How a segment's sum over decoding devices is normalized.
#[derive(Debug, Clone, PartialEq)]
pub enum Weighting {
    /// Divide by the number of devices that decoded the segment.
    Empirical,
    /// Divide by `K·pᵢ`, the expected number of decoding devices.
    Expected { probs: Vec<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum WeightingMode {
    #[default]
    Empirical,
    Expected,
}

/// Segment `i` (0-based) is rebuilt from the devices with
/// `decoded_upto > i`; a segment nobody decoded keeps its previous value.
/// Coordinates outside every segment are left untouched.
pub fn aggregate_segments(
    global: &[f64],
    devices: &[Vec<f64>],
    decoded_upto: &[usize],
    segments: &[Vec<bool>],
    weighting: &Weighting,
) -> Result<Vec<f64>> {
    if devices.len() != decoded_upto.len() {
        return Err(Error::Shape {
            context: "decode outcomes",
            expected: devices.len(),
            actual: decoded_upto.len(),
        });
    }
    if let Some(d) = devices.iter().find(|d| d.len() != global.len()) {
        return Err(Error::Shape {
            context: "device parameters",
            expected: global.len(),
            actual: d.len(),
        });
    }
    let k = devices.len() as f64;
    let mut out = global.to_vec();
    for (i, seg) in segments.iter().enumerate() {
        if seg.len() != global.len() {
            return Err(Error::Shape {
                context: "segment mask",
                expected: global.len(),
                actual: seg.len(),
            });
        }
        let members: Vec<&[f64]> = devices
            .iter()
            .zip(decoded_upto)
            .filter(|(_, &d)| d > i)
            .map(|(p, _)| p.as_slice())
            .collect();
        if members.is_empty() {
            continue;
        }
        let divisor = match weighting {
            Weighting::Empirical => members.len() as f64,
            Weighting::Expected { probs } => {
                let p = probs.get(i).copied().unwrap_or(0.0);
                if !(p > 0.0) {
                    continue;
                }
                k * p
            }
        };
        for (j, _) in seg.iter().enumerate().filter(|(_, &b)| b) {
            let sum: f64 = members.iter().map(|m| m[j]).sum();
            out[j] = sum / divisor;
        }
    }
    Ok(out)
}

/// Two-segment aggregation from the decode sets: `h` decoded only the
/// 0.5x segment `lh`, `f` decoded both segments.
pub fn aggregate(
    global: &[f64],
    devices: &[Vec<f64>],
    lh: &WidthMask,
    h: &[usize],
    f: &[usize],
    weighting: &Weighting,
) -> Result<Vec<f64>> {
    let mut decoded = vec![0usize; devices.len()];
    for (set, level) in [(h, 1), (f, 2)] {
        for &k in set {
            if k >= devices.len() {
                return Err(Error::DecodeSets(format!(
                    "device {k} out of range for {} devices",
                    devices.len()
                )));
            }
            if decoded[k] != 0 {
                return Err(Error::DecodeSets(format!("device {k} appears twice")));
            }
            decoded[k] = level;
        }
    }
    let segments = [lh.bits().to_vec(), lh.complement_bits()];
    aggregate_segments(global, devices, &decoded, &segments, weighting)
}
