use std::path::Path;

use super::{check_dims_fit, length_mismatch, put_f64s, put_shape, Reader};
use crate::error::{Error, Result};
use crate::estimation::LabeledSample;
use crate::tensor::{DenseTensor, Shape};

pub const DATASET_MAGIC: &[u8; 4] = b"TNPD";

/// Labeled tensors of one common shape. May be empty.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorDataset {
    pub shape: Shape,
    pub samples: Vec<LabeledSample>,
}

impl TensorDataset {
    pub fn new(shape: Shape, samples: Vec<LabeledSample>) -> Result<Self> {
        for s in &samples {
            if s.tensor.shape() != &shape {
                return Err(Error::ShapeMismatch {
                    expected: shape.dims().to_vec(),
                    found: s.tensor.shape().dims().to_vec(),
                });
            }
            if s.label > 1 {
                return Err(Error::InvalidArgument(format!(
                    "label must be 0 or 1, got {}",
                    s.label
                )));
            }
        }
        Ok(TensorDataset { shape, samples })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn class_count(&self, label: u8) -> usize {
        self.samples.iter().filter(|s| s.label == label).count()
    }
}

pub fn encode_dataset(ds: &TensorDataset) -> Result<Vec<u8>> {
    check_dims_fit(&ds.shape)?;
    let d = ds.shape.total();
    let mut out = Vec::with_capacity(20 + 4 * ds.shape.order() + ds.len() * (1 + 8 * d));
    out.extend_from_slice(DATASET_MAGIC);
    out.extend_from_slice(&super::FORMAT_VERSION.to_le_bytes());
    put_shape(&mut out, &ds.shape);
    out.extend_from_slice(&(ds.len() as u64).to_le_bytes());
    out.extend(ds.samples.iter().map(|s| s.label));
    for s in &ds.samples {
        put_f64s(&mut out, s.tensor.data());
    }
    Ok(out)
}

pub fn decode_dataset(bytes: &[u8]) -> Result<TensorDataset> {
    let mut r = Reader::new(bytes);
    r.magic(DATASET_MAGIC, "tensor dataset")?;
    r.version()?;
    let shape = r.shape()?;
    let n = r.u64()?;
    let d = shape.total() as u128;
    let expected = r.pos as u128 + n as u128 * (1 + 8 * d);
    if expected != bytes.len() as u128 {
        return Err(length_mismatch(expected, bytes.len()));
    }
    let n = n as usize;
    let labels = r.take(n)?.to_vec();
    if let Some(bad) = labels.iter().find(|&&y| y > 1) {
        return Err(Error::Format(format!(
            "label byte {bad} is neither 0 nor 1"
        )));
    }
    let samples = labels
        .into_iter()
        .map(|y| {
            let data = r.f64s(shape.total())?;
            Ok(LabeledSample::new(
                DenseTensor::new(shape.clone(), data)?,
                y,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    r.finish()?;
    Ok(TensorDataset { shape, samples })
}

pub fn write_dataset(path: impl AsRef<Path>, ds: &TensorDataset) -> Result<()> {
    std::fs::write(path, encode_dataset(ds)?)?;
    Ok(())
}

pub fn read_dataset(path: impl AsRef<Path>) -> Result<TensorDataset> {
    decode_dataset(&std::fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dataset() -> TensorDataset {
        let shape = Shape::new(vec![2, 3]).unwrap();
        let samples = (0..4)
            .map(|i| {
                let t = DenseTensor::from_fn(shape.clone(), |ix| {
                    (i * 10 + ix[0] + 2 * ix[1]) as f64 * 0.1 - 0.3
                });
                LabeledSample::new(t, (i % 2) as u8)
            })
            .collect();
        TensorDataset::new(shape, samples).unwrap()
    }

    #[test]
    fn header_layout() {
        let bytes = encode_dataset(&dataset()).unwrap();
        assert_eq!(&bytes[..4], b"TNPD");
        assert_eq!(&bytes[4..8], &1u32.to_le_bytes());
        assert_eq!(&bytes[8..12], &2u32.to_le_bytes());
        assert_eq!(&bytes[12..16], &2u32.to_le_bytes());
        assert_eq!(&bytes[16..20], &3u32.to_le_bytes());
        assert_eq!(&bytes[20..28], &4u64.to_le_bytes());
        assert_eq!(&bytes[28..32], &[0, 1, 0, 1]);
        assert_eq!(bytes.len(), 4 + 4 + 4 + 4 * 2 + 8 + 4 + 8 * 4 * 6);
        // first payload value is sample 0, entry (0,0)
        assert_eq!(&bytes[32..40], &(-0.3f64).to_le_bytes());
    }

    #[test]
    fn round_trip_is_bitwise() {
        let ds = dataset();
        let back = decode_dataset(&encode_dataset(&ds).unwrap()).unwrap();
        assert_eq!(back, ds);
        for (a, b) in back.samples.iter().zip(&ds.samples) {
            for (x, y) in a.tensor.data().iter().zip(b.tensor.data()) {
                assert_eq!(x.to_bits(), y.to_bits());
            }
        }
    }

    #[test]
    fn empty_dataset_round_trips() {
        let ds = TensorDataset::new(Shape::new(vec![3]).unwrap(), vec![]).unwrap();
        let bytes = encode_dataset(&ds).unwrap();
        assert_eq!(bytes.len(), 4 + 4 + 4 + 4 + 8);
        assert_eq!(decode_dataset(&bytes).unwrap(), ds);
    }

    #[test]
    fn truncation_and_padding_rejected() {
        let bytes = encode_dataset(&dataset()).unwrap();
        for cut in [bytes.len() - 1, 30, 10, 3] {
            let err = decode_dataset(&bytes[..cut]).unwrap_err();
            let msg = err.to_string();
            assert!(
                msg.contains("file length mismatch") || msg.contains("magic"),
                "{msg}"
            );
        }
        let mut longer = bytes.clone();
        longer.push(0);
        assert!(decode_dataset(&longer)
            .unwrap_err()
            .to_string()
            .contains("file length mismatch"));
    }

    #[test]
    fn bad_labels_and_magic_rejected() {
        let mut bytes = encode_dataset(&dataset()).unwrap();
        bytes[29] = 2;
        assert!(decode_dataset(&bytes).is_err());
        let mut bytes = encode_dataset(&dataset()).unwrap();
        bytes[0] = b'X';
        assert!(decode_dataset(&bytes).is_err());
        let mut bytes = encode_dataset(&dataset()).unwrap();
        bytes[4] = 2;
        assert!(decode_dataset(&bytes)
            .unwrap_err()
            .to_string()
            .contains("version"));
    }
}
