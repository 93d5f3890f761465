//! Soft-margin support vector classification: kernels, the SMO trainer,
//! one-vs-one multiclass composition, and portable model files.

mod io;
mod kernel;
mod model;
mod smo;

use thiserror::Error;

pub use io::{load_model, save_model, SavedModel, MODEL_FORMAT_VERSION};
pub use kernel::{kernel_eval, KernelKind, KernelSpec};
pub use model::{
    decision_value, predict_binary, predict_multiclass, train_binary, train_multiclass,
    BinaryModel, BinaryTrainReport, MulticlassModel, MulticlassTrainReport, PairSummary,
};

#[derive(Debug, Error)]
pub enum SvmError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error("training set contains a single class; two are required")]
    SingleClass,
    #[error("training label {0} is not in {{-1, +1}}")]
    InvalidLabel(f64),
    #[error("training data contains a non-finite value")]
    NonFiniteValue,
    #[error("vector has dimension {found}, expected {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("cannot access model file {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed model file: {0}")]
    Format(#[from] serde_json::Error),
    #[error("model file has format version {found}, this build reads version {supported}")]
    Version { found: u32, supported: u32 },
    #[error("model file checksum mismatch: the file is corrupted")]
    Checksum,
}

/// Trainer configuration.
///
/// `max_passes` caps the number of sweeps over the full training set; if KKT
/// violations survive that many sweeps the trainer returns its best solution
/// flagged as non-converged. The default budget comfortably covers the built
/// detection datasets, which converge in under thirty sweeps.
/// `cache_bytes` bounds the kernel row cache.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvmParams {
    pub c: f64,
    pub tolerance: f64,
    pub max_passes: u32,
    pub seed: u64,
    pub cache_bytes: usize,
}

impl Default for SvmParams {
    fn default() -> Self {
        SvmParams {
            c: 1.0,
            tolerance: 1e-3,
            max_passes: 50,
            seed: 42,
            cache_bytes: 256 << 20,
        }
    }
}

impl SvmParams {
    pub fn validate(&self) -> Result<(), SvmError> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(SvmError::InvalidParameter(format!(
                "c must be positive, got {}",
                self.c
            )));
        }
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(SvmError::InvalidParameter(format!(
                "tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        if self.max_passes == 0 {
            return Err(SvmError::InvalidParameter(
                "max_passes must be at least 1".into(),
            ));
        }
        Ok(())
    }
}
