use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;
use sha2::{Digest, Sha256};

use super::model::{BinaryModel, MulticlassModel};
use super::SvmError;

/// Format version written into model files.
pub const MODEL_FORMAT_VERSION: u32 = 1;

/// A model as stored on disk: either a two-class model or a one-vs-one stack.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum SavedModel {
    Binary(BinaryModel),
    Multiclass(MulticlassModel),
}

impl SavedModel {
    pub fn as_binary(&self) -> Option<&BinaryModel> {
        match self {
            SavedModel::Binary(m) => Some(m),
            SavedModel::Multiclass(_) => None,
        }
    }

    pub fn as_multiclass(&self) -> Option<&MulticlassModel> {
        match self {
            SavedModel::Binary(_) => None,
            SavedModel::Multiclass(m) => Some(m),
        }
    }
}

#[derive(Serialize)]
struct EnvelopeOut<'a> {
    format_version: u32,
    /// SHA-256 over the exact bytes of `model`.
    checksum: &'a str,
    model: &'a RawValue,
}

#[derive(Deserialize)]
struct EnvelopeIn<'a> {
    format_version: u32,
    checksum: String,
    #[serde(borrow)]
    model: &'a RawValue,
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Serializes a model file to bytes: a versioned JSON envelope whose payload
/// is covered by a SHA-256 checksum. Identical models produce identical
/// bytes.
pub fn model_to_bytes(model: &SavedModel) -> Result<Vec<u8>, SvmError> {
    let payload = serde_json::to_string(model)?;
    let checksum = sha256_hex(payload.as_bytes());
    let raw = RawValue::from_string(payload)?;
    let envelope = EnvelopeOut {
        format_version: MODEL_FORMAT_VERSION,
        checksum: &checksum,
        model: &raw,
    };
    Ok(serde_json::to_vec(&envelope)?)
}

pub fn model_from_bytes(bytes: &[u8]) -> Result<SavedModel, SvmError> {
    let text =
        std::str::from_utf8(bytes).map_err(|e| SvmError::Format(serde::de::Error::custom(e)))?;
    let envelope: EnvelopeIn = serde_json::from_str(text)?;
    if envelope.format_version != MODEL_FORMAT_VERSION {
        return Err(SvmError::Version {
            found: envelope.format_version,
            supported: MODEL_FORMAT_VERSION,
        });
    }
    if sha256_hex(envelope.model.get().as_bytes()) != envelope.checksum {
        return Err(SvmError::Checksum);
    }
    Ok(serde_json::from_str(envelope.model.get())?)
}

pub fn save_model(model: &SavedModel, path: &Path) -> Result<(), SvmError> {
    let bytes = model_to_bytes(model)?;
    fs::write(path, bytes).map_err(|source| SvmError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn load_model(path: &Path) -> Result<SavedModel, SvmError> {
    let bytes = fs::read(path).map_err(|source| SvmError::Io {
        path: path.display().to_string(),
        source,
    })?;
    model_from_bytes(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nslkdd::EncodedVector;
    use crate::svm::{decision_value, predict_binary, KernelSpec};

    fn enc(values: &[f64]) -> EncodedVector {
        EncodedVector {
            values: values.to_vec(),
            class_index: Some(1),
        }
    }

    fn sample_model() -> SavedModel {
        SavedModel::Binary(BinaryModel {
            support_vectors: vec![enc(&[0.25, 0.75]), enc(&[0.1, 0.9])],
            dual_coefficients: vec![0.3121312312371, -0.3121312312371],
            bias: -0.017331,
            kernel: KernelSpec::rbf(0.07).unwrap(),
            class_pair: ("attack".into(), "normal".into()),
        })
    }

    #[test]
    fn round_trip_preserves_predictions_bit_for_bit() {
        let saved = sample_model();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        save_model(&saved, &path).unwrap();
        let loaded = load_model(&path).unwrap();
        assert_eq!(loaded, saved);

        let (orig, reread) = (saved.as_binary().unwrap(), loaded.as_binary().unwrap());
        for i in 0..10 {
            let x = enc(&[0.1 * i as f64, 1.0 - 0.07 * i as f64]);
            let a = decision_value(orig, &x).unwrap();
            let b = decision_value(reread, &x).unwrap();
            assert_eq!(a.to_bits(), b.to_bits());
            assert_eq!(
                predict_binary(orig, &x).unwrap(),
                predict_binary(reread, &x).unwrap()
            );
        }
    }

    #[test]
    fn zero_support_vector_model_round_trips() {
        let saved = SavedModel::Binary(BinaryModel {
            support_vectors: vec![],
            dual_coefficients: vec![],
            bias: 0.0,
            kernel: KernelSpec::linear(),
            class_pair: ("+1".into(), "-1".into()),
        });
        let bytes = model_to_bytes(&saved).unwrap();
        assert_eq!(model_from_bytes(&bytes).unwrap(), saved);
    }

    #[test]
    fn two_saves_of_one_model_are_byte_identical() {
        let saved = sample_model();
        assert_eq!(
            model_to_bytes(&saved).unwrap(),
            model_to_bytes(&saved).unwrap()
        );
    }

    #[test]
    fn version_mismatch_is_detected() {
        let bytes = model_to_bytes(&sample_model()).unwrap();
        let text = String::from_utf8(bytes).unwrap().replacen(
            "\"format_version\":1",
            "\"format_version\":999",
            1,
        );
        assert!(matches!(
            model_from_bytes(text.as_bytes()),
            Err(SvmError::Version {
                found: 999,
                supported: MODEL_FORMAT_VERSION
            })
        ));
    }

    #[test]
    fn corruption_is_detected_by_the_checksum() {
        let bytes = model_to_bytes(&sample_model()).unwrap();
        let text = String::from_utf8(bytes)
            .unwrap()
            .replacen("0.25", "0.26", 1);
        assert!(matches!(
            model_from_bytes(text.as_bytes()),
            Err(SvmError::Checksum)
        ));
    }
}
