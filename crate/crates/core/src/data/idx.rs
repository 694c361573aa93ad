//! IDX image and label files (big-endian headers, raw `u8` payloads).

use std::fs;
use std::path::Path;

use super::Dataset;
use crate::error::{Error, Result};
use crate::matrix::Matrix;

const IMAGES_MAGIC: u32 = 0x0000_0803;
const LABELS_MAGIC: u32 = 0x0000_0801;

#[derive(Debug, Clone, PartialEq)]
pub struct IdxImages {
    pub rows: usize,
    pub cols: usize,
    pub pixels: Vec<u8>,
}

impl IdxImages {
    pub fn count(&self) -> usize {
        self.pixels.len() / (self.rows * self.cols).max(1)
    }
}

fn err(file: &str, field: &'static str, reason: impl Into<String>) -> Error {
    Error::Format {
        file: file.to_string(),
        field,
        reason: reason.into(),
    }
}

fn be_u32(bytes: &[u8], at: usize, file: &str, field: &'static str) -> Result<u32> {
    bytes
        .get(at..at + 4)
        .map(|b| u32::from_be_bytes(b.try_into().expect("4 bytes")))
        .ok_or_else(|| err(file, field, "truncated header"))
}

pub fn parse_idx_images(bytes: &[u8], file: &str) -> Result<IdxImages> {
    let magic = be_u32(bytes, 0, file, "magic")?;
    if magic != IMAGES_MAGIC {
        return Err(err(file, "magic", format!("expected 0x00000803, got {magic:#010x}")));
    }
    let n = be_u32(bytes, 4, file, "image count")? as usize;
    let rows = be_u32(bytes, 8, file, "rows")? as usize;
    let cols = be_u32(bytes, 12, file, "cols")? as usize;
    if rows == 0 || cols == 0 {
        return Err(err(file, "rows", "image dimensions must be non-zero"));
    }
    let need = n * rows * cols;
    let body = &bytes[16..];
    if body.len() != need {
        return Err(err(
            file,
            "pixels",
            format!("expected {need} bytes for {n} images, found {}", body.len()),
        ));
    }
    Ok(IdxImages {
        rows,
        cols,
        pixels: body.to_vec(),
    })
}

pub fn parse_idx_labels(bytes: &[u8], file: &str) -> Result<Vec<u8>> {
    let magic = be_u32(bytes, 0, file, "magic")?;
    if magic != LABELS_MAGIC {
        return Err(err(file, "magic", format!("expected 0x00000801, got {magic:#010x}")));
    }
    let n = be_u32(bytes, 4, file, "label count")? as usize;
    let body = &bytes[8..];
    if body.len() != n {
        return Err(err(
            file,
            "labels",
            format!("expected {n} labels, found {} bytes", body.len()),
        ));
    }
    Ok(body.to_vec())
}

/// Loads an image/label file pair with pixels scaled to `[0, 1]`. The class
/// count is one more than the largest label.
pub fn load_idx(images: impl AsRef<Path>, labels: impl AsRef<Path>) -> Result<Dataset> {
    let (ip, lp) = (images.as_ref(), labels.as_ref());
    let iname = ip.display().to_string();
    let lname = lp.display().to_string();
    let img = parse_idx_images(&fs::read(ip)?, &iname)?;
    let lab = parse_idx_labels(&fs::read(lp)?, &lname)?;
    if img.count() != lab.len() {
        return Err(err(
            &lname,
            "label count",
            format!("{} labels for {} images", lab.len(), img.count()),
        ));
    }
    let dim = img.rows * img.cols;
    let data = img.pixels.iter().map(|&p| p as f64 / 255.0).collect();
    let features = Matrix::from_vec(lab.len(), dim, data);
    let labels: Vec<usize> = lab.iter().map(|&l| l as usize).collect();
    let classes = labels.iter().max().map_or(0, |m| m + 1);
    Dataset::new(features, labels, classes)
}

pub fn write_idx(
    images: impl AsRef<Path>,
    labels: impl AsRef<Path>,
    data: &IdxImages,
    label_bytes: &[u8],
) -> Result<()> {
    let mut img = Vec::with_capacity(16 + data.pixels.len());
    for w in [IMAGES_MAGIC, data.count() as u32, data.rows as u32, data.cols as u32] {
        img.extend_from_slice(&w.to_be_bytes());
    }
    img.extend_from_slice(&data.pixels);
    let mut lab = Vec::with_capacity(8 + label_bytes.len());
    lab.extend_from_slice(&LABELS_MAGIC.to_be_bytes());
    lab.extend_from_slice(&(label_bytes.len() as u32).to_be_bytes());
    lab.extend_from_slice(label_bytes);
    fs::write(images, img)?;
    fs::write(labels, lab)?;
    Ok(())
}
