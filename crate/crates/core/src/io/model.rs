use std::path::Path;

use super::{check_dims_fit, put_f64s, put_shape, Reader};
use crate::calibration::NpLevels;
use crate::classifiers::{LinearScorer, Method, NpClassifier, Scorer, TclNetwork};
use crate::error::{Error, Result};
use crate::tensor::DenseTensor;

pub const MODEL_MAGIC: &[u8; 4] = b"TNPM";

const LINEAR: u8 = 0;
const NETWORK: u8 = 1;

/// Layout after the magic and version: method tag (u8), input shape
/// (u32 order, u32 dims), threshold (f64), levels flag (u8) with optional
/// alpha/delta (f64), scorer kind (u8), then either the weight tensor or the
/// network description (u32 layers, u32 hidden, u32 ranks, u64 count,
/// parameters).
pub fn encode_model(clf: &NpClassifier) -> Result<Vec<u8>> {
    let shape = clf.scorer.input_shape();
    check_dims_fit(shape)?;
    let mut out = Vec::new();
    out.extend_from_slice(MODEL_MAGIC);
    out.extend_from_slice(&super::FORMAT_VERSION.to_le_bytes());
    out.push(clf.method.tag());
    put_shape(&mut out, shape);
    out.extend_from_slice(&clf.threshold.to_le_bytes());
    match clf.levels {
        Some(l) => {
            out.push(1);
            put_f64s(&mut out, &[l.alpha, l.delta]);
        }
        None => out.push(0),
    }
    match &clf.scorer {
        Scorer::Linear(s) => {
            out.push(LINEAR);
            put_f64s(&mut out, s.weights.data());
        }
        Scorer::Network(net) => {
            out.push(NETWORK);
            out.extend_from_slice(&(net.layers() as u32).to_le_bytes());
            out.extend_from_slice(&(net.hidden() as u32).to_le_bytes());
            for &r in net.ranks() {
                out.extend_from_slice(&(r as u32).to_le_bytes());
            }
            out.extend_from_slice(&(net.parameters().len() as u64).to_le_bytes());
            put_f64s(&mut out, net.parameters());
        }
    }
    Ok(out)
}

pub fn decode_model(bytes: &[u8]) -> Result<NpClassifier> {
    let mut r = Reader::new(bytes);
    r.magic(MODEL_MAGIC, "model")?;
    r.version()?;
    let tag = r.u8()?;
    let method =
        Method::from_tag(tag).ok_or_else(|| Error::Format(format!("unknown method tag {tag}")))?;
    let shape = r.shape()?;
    let threshold = r.f64()?;
    let levels = match r.u8()? {
        0 => None,
        1 => {
            let alpha = r.f64()?;
            let delta = r.f64()?;
            Some(NpLevels::new(alpha, delta).map_err(|e| Error::Format(e.to_string()))?)
        }
        f => return Err(Error::Format(format!("bad levels flag {f}"))),
    };
    let scorer = match r.u8()? {
        LINEAR => {
            let weights = r.f64s(shape.total())?;
            Scorer::Linear(LinearScorer {
                weights: DenseTensor::new(shape, weights)?,
            })
        }
        NETWORK => {
            let layers = r.u32()? as usize;
            let hidden = r.u32()? as usize;
            let ranks = (0..shape.order())
                .map(|_| r.u32().map(|v| v as usize))
                .collect::<Result<Vec<_>>>()?;
            let count = r.u64()?;
            let remaining = (bytes.len() - r.pos) as u64 / 8;
            if count > remaining {
                return Err(super::length_mismatch(
                    r.pos as u128 + 8 * count as u128,
                    bytes.len(),
                ));
            }
            let params = r.f64s(count as usize)?;
            let net = TclNetwork::from_parameters(shape, ranks, layers, hidden, params)
                .map_err(|e| Error::Format(e.to_string()))?;
            Scorer::Network(net)
        }
        k => return Err(Error::Format(format!("unknown scorer kind {k}"))),
    };
    r.finish()?;
    Ok(NpClassifier {
        method,
        scorer,
        threshold,
        levels,
    })
}

pub fn write_model(path: impl AsRef<Path>, clf: &NpClassifier) -> Result<()> {
    std::fs::write(path, encode_model(clf)?)?;
    Ok(())
}

pub fn read_model(path: impl AsRef<Path>) -> Result<NpClassifier> {
    decode_model(&std::fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifiers::NnArch;
    use crate::numerics::RandomSource;
    use crate::tensor::Shape;

    #[test]
    fn linear_model_round_trip() {
        let shape = Shape::new(vec![2, 2]).unwrap();
        let clf = NpClassifier {
            method: Method::TLdaNp,
            scorer: Scorer::Linear(LinearScorer {
                weights: DenseTensor::new(shape, vec![0.1, -2.0, 3.5, 1e-300]).unwrap(),
            }),
            threshold: -0.125,
            levels: Some(NpLevels::new(0.05, 0.1).unwrap()),
        };
        let bytes = encode_model(&clf).unwrap();
        assert_eq!(&bytes[..4], b"TNPM");
        assert_eq!(decode_model(&bytes).unwrap(), clf);
        assert!(decode_model(&bytes[..bytes.len() - 3]).is_err());
    }

    #[test]
    fn network_model_round_trip() {
        let shape = Shape::new(vec![3, 4]).unwrap();
        let arch = NnArch {
            tcl_ranks: Some(vec![2, 2]),
            tcl_layers: 2,
            hidden: 5,
        };
        let net = TclNetwork::new(shape, &arch, &mut RandomSource::new(2)).unwrap();
        let clf = NpClassifier {
            method: Method::TNn,
            scorer: Scorer::Network(net),
            threshold: 0.5,
            levels: None,
        };
        let bytes = encode_model(&clf).unwrap();
        assert_eq!(decode_model(&bytes).unwrap(), clf);
        let mut extra = bytes.clone();
        extra.extend_from_slice(&[0; 8]);
        assert!(decode_model(&extra).is_err());
    }
}
