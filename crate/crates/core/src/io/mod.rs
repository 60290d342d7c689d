//! File formats: binary tensor datasets (`TNPD`), fitted models (`TNPM`) and
//! the CSV result tables.

mod csv;
mod dataset;
mod model;

pub use csv::{
    format_real, parse_aggregate, parse_detail, render_aggregate, render_detail, verify_aggregates,
    AggregateRow, DetailRow, AGGREGATE_HEADER, DETAIL_HEADER,
};
pub use dataset::{
    decode_dataset, encode_dataset, read_dataset, write_dataset, TensorDataset, DATASET_MAGIC,
};
pub use model::{decode_model, encode_model, read_model, write_model, MODEL_MAGIC};

use crate::error::{Error, Result};
use crate::tensor::Shape;

pub const FORMAT_VERSION: u32 = 1;

fn length_mismatch(expected: impl std::fmt::Display, found: usize) -> Error {
    Error::Format(format!(
        "file length mismatch: expected {expected} bytes, found {found}"
    ))
}

/// Little-endian cursor that reports truncation as a length mismatch.
struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn new(bytes: &'a [u8]) -> Self {
        Reader { bytes, pos: 0 }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| {
                length_mismatch(
                    format!("at least {}", self.pos.saturating_add(n)),
                    self.bytes.len(),
                )
            })?;
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn magic(&mut self, want: &[u8; 4], what: &str) -> Result<()> {
        if self.bytes.len() < 4 || &self.bytes[..4] != want {
            return Err(Error::Format(format!(
                "not a {what} file (magic bytes must be {:?})",
                String::from_utf8_lossy(want)
            )));
        }
        self.pos = 4;
        Ok(())
    }

    fn version(&mut self) -> Result<()> {
        let v = self.u32()?;
        if v != FORMAT_VERSION {
            return Err(Error::Format(format!("unsupported format version {v}")));
        }
        Ok(())
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64s(&mut self, n: usize) -> Result<Vec<f64>> {
        let raw = self.take(
            n.checked_mul(8)
                .ok_or_else(|| length_mismatch("more", self.bytes.len()))?,
        )?;
        Ok(raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }

    fn shape(&mut self) -> Result<Shape> {
        let order = self.u32()? as usize;
        if order == 0 {
            return Err(Error::Format("tensor order must be at least 1".into()));
        }
        let dims = (0..order)
            .map(|_| self.u32().map(|d| d as usize))
            .collect::<Result<Vec<_>>>()?;
        Shape::new(dims).map_err(|e| Error::Format(e.to_string()))
    }

    fn finish(&self) -> Result<()> {
        if self.pos != self.bytes.len() {
            return Err(length_mismatch(self.pos, self.bytes.len()));
        }
        Ok(())
    }
}

fn put_shape(out: &mut Vec<u8>, shape: &Shape) {
    out.extend_from_slice(&(shape.order() as u32).to_le_bytes());
    for &d in shape.dims() {
        out.extend_from_slice(&(d as u32).to_le_bytes());
    }
}

fn put_f64s(out: &mut Vec<u8>, values: &[f64]) {
    for v in values {
        out.extend_from_slice(&v.to_le_bytes());
    }
}

fn check_dims_fit(shape: &Shape) -> Result<()> {
    if shape.order() > u32::MAX as usize || shape.dims().iter().any(|&d| d > u32::MAX as usize) {
        return Err(Error::InvalidArgument(format!(
            "shape {shape} does not fit the 32-bit header fields"
        )));
    }
    Ok(())
}
