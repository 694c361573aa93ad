//! Binary parameter checkpoints.
//!
//! Layout: `u32` layer count, then per layer five `u32` words
//! (kind, in, out, slim_input, slim_output), then every parameter as `f64`.
//! All integers and floats are little-endian.

use std::fs;
use std::path::Path;

use super::layout::{LayerKind, LayerSpec, Layout, SlimmableParams};
use crate::error::{Error, Result};

pub fn encode(params: &SlimmableParams) -> Vec<u8> {
    let layers = params.layout().layers();
    let mut out = Vec::with_capacity(4 + layers.len() * 20 + params.len() * 8);
    out.extend_from_slice(&(layers.len() as u32).to_le_bytes());
    for l in layers {
        for word in [
            l.kind.code(),
            l.in_dim as u32,
            l.out_dim as u32,
            l.slim_input as u32,
            l.slim_output as u32,
        ] {
            out.extend_from_slice(&word.to_le_bytes());
        }
    }
    for v in params.values() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

struct Reader<'a> {
    file: &'a str,
    bytes: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take(&mut self, n: usize, field: &'static str) -> Result<&[u8]> {
        if self.bytes.len() - self.pos < n {
            return Err(Error::Format {
                file: self.file.to_string(),
                field,
                reason: "truncated".into(),
            });
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self, field: &'static str) -> Result<u32> {
        let b = self.take(4, field)?;
        Ok(u32::from_le_bytes(b.try_into().expect("4 bytes")))
    }

    fn flag(&mut self, field: &'static str) -> Result<bool> {
        match self.u32(field)? {
            0 => Ok(false),
            1 => Ok(true),
            v => Err(self.bad(field, format!("expected 0 or 1, got {v}"))),
        }
    }

    fn bad(&self, field: &'static str, reason: String) -> Error {
        Error::Format {
            file: self.file.to_string(),
            field,
            reason,
        }
    }
}

/// Decodes a checkpoint. `name` is used in error messages.
pub fn decode(bytes: &[u8], name: &str) -> Result<SlimmableParams> {
    let mut r = Reader {
        file: name,
        bytes,
        pos: 0,
    };
    let count = r.u32("layer count")? as usize;
    if count == 0 || count > bytes.len() / 20 {
        return Err(r.bad("layer count", format!("implausible value {count}")));
    }
    let mut layers = Vec::with_capacity(count);
    for _ in 0..count {
        let code = r.u32("layer kind")?;
        let kind =
            LayerKind::from_code(code).ok_or_else(|| r.bad("layer kind", format!("unknown code {code}")))?;
        let in_dim = r.u32("in_dim")? as usize;
        let out_dim = r.u32("out_dim")? as usize;
        let slim_input = r.flag("slim_input")?;
        let slim_output = r.flag("slim_output")?;
        layers.push(LayerSpec {
            kind,
            in_dim,
            out_dim,
            slim_input,
            slim_output,
        });
    }
    let layout = Layout::new(layers)?;
    let n = layout.param_count();
    let body = r.take(n * 8, "parameters")?;
    let values = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    if r.pos != bytes.len() {
        return Err(r.bad(
            "parameters",
            format!("{} trailing bytes", bytes.len() - r.pos),
        ));
    }
    SlimmableParams::from_values(layout, values)
}

pub fn save(params: &SlimmableParams, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, encode(params))?;
    Ok(())
}

pub fn load(path: impl AsRef<Path>) -> Result<SlimmableParams> {
    let path = path.as_ref();
    let bytes = fs::read(path)?;
    decode(&bytes, &path.display().to_string())
}
