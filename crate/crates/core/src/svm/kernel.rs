use serde::{Deserialize, Serialize};

use super::SvmError;
use crate::nslkdd::EncodedVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    Rbf,
    Linear,
}

/// Kernel function specification. `gamma` is the RBF width parameter; the
/// linear kernel ignores it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub kind: KernelKind,
    pub gamma: f64,
}

impl KernelSpec {
    pub fn rbf(gamma: f64) -> Result<Self, SvmError> {
        if gamma <= 0.0 || !gamma.is_finite() {
            return Err(SvmError::InvalidParameter(format!(
                "rbf gamma must be positive and finite, got {gamma}"
            )));
        }
        Ok(KernelSpec {
            kind: KernelKind::Rbf,
            gamma,
        })
    }

    pub fn linear() -> Self {
        KernelSpec {
            kind: KernelKind::Linear,
            gamma: 0.0,
        }
    }

    /// The default width for this pipeline: 1 / encoded dimension.
    pub fn rbf_for_dim(dim: usize) -> Result<Self, SvmError> {
        Self::rbf(1.0 / dim.max(1) as f64)
    }

    pub fn eval(&self, x: &[f64], y: &[f64]) -> Result<f64, SvmError> {
        if x.len() != y.len() {
            return Err(SvmError::DimensionMismatch {
                expected: x.len(),
                found: y.len(),
            });
        }
        Ok(self.eval_unchecked(x, y))
    }

    #[inline]
    pub(crate) fn eval_unchecked(&self, x: &[f64], y: &[f64]) -> f64 {
        match self.kind {
            KernelKind::Rbf => {
                let mut dist2 = 0.0;
                for (a, b) in x.iter().zip(y) {
                    let d = a - b;
                    dist2 += d * d;
                }
                (-self.gamma * dist2).exp()
            }
            KernelKind::Linear => x.iter().zip(y).map(|(a, b)| a * b).sum(),
        }
    }
}

/// Kernel evaluation over encoded records.
pub fn kernel_eval(
    x: &EncodedVector,
    y: &EncodedVector,
    spec: &KernelSpec,
) -> Result<f64, SvmError> {
    spec.eval(&x.values, &y.values)
}
