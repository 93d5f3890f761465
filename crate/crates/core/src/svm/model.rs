use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::kernel::KernelSpec;
use super::{smo, SvmError, SvmParams};
use crate::nslkdd::EncodedVector;

/// A trained two-class model. `class_pair.0` is the class predicted for
/// non-negative decision values, `class_pair.1` the other one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinaryModel {
    pub support_vectors: Vec<EncodedVector>,
    /// alpha_i * y_i for each support vector.
    pub dual_coefficients: Vec<f64>,
    pub bias: f64,
    pub kernel: KernelSpec,
    pub class_pair: (String, String),
}

impl BinaryModel {
    /// Dimension of inputs this model accepts; `None` for a model without
    /// support vectors, which accepts anything and always answers its bias.
    pub fn dim(&self) -> Option<usize> {
        self.support_vectors.first().map(|sv| sv.values.len())
    }

    fn check_dim(&self, x: &EncodedVector) -> Result<(), SvmError> {
        match self.dim() {
            Some(dim) if dim != x.values.len() => Err(SvmError::DimensionMismatch {
                expected: dim,
                found: x.values.len(),
            }),
            _ => Ok(()),
        }
    }
}

/// Training result: the model plus solver diagnostics.
#[derive(Debug, Clone)]
pub struct BinaryTrainReport {
    pub model: BinaryModel,
    pub converged: bool,
    pub full_passes: u32,
    pub updates: u64,
    /// Final value of the dual objective.
    pub dual_objective: f64,
    /// Largest margin-condition violation over all training points.
    pub max_kkt_violation: f64,
    /// Signed sum of the dual coefficients; zero up to rounding.
    pub coefficient_sum: f64,
}

/// Trains a two-class soft-margin SVM with labels in {-1, +1}. The returned
/// model predicts `class_pair = ("+1", "-1")`; callers composing named
/// classifiers overwrite the pair.
pub fn train_binary(
    train: &[(EncodedVector, f64)],
    params: &SvmParams,
    kernel: &KernelSpec,
) -> Result<BinaryTrainReport, SvmError> {
    train_binary_with_stream(train, params, kernel, 0)
}

pub(crate) fn train_binary_with_stream(
    train: &[(EncodedVector, f64)],
    params: &SvmParams,
    kernel: &KernelSpec,
    rng_stream: u64,
) -> Result<BinaryTrainReport, SvmError> {
    params.validate()?;
    if train.is_empty() {
        return Err(SvmError::EmptyTrainingSet);
    }
    let dim = train[0].0.values.len();
    for (x, y) in train {
        if *y != 1.0 && *y != -1.0 {
            return Err(SvmError::InvalidLabel(*y));
        }
        if x.values.len() != dim {
            return Err(SvmError::DimensionMismatch {
                expected: dim,
                found: x.values.len(),
            });
        }
        if x.values.iter().any(|v| !v.is_finite()) {
            return Err(SvmError::NonFiniteValue);
        }
    }
    if train.iter().all(|(_, y)| *y > 0.0) || train.iter().all(|(_, y)| *y < 0.0) {
        return Err(SvmError::SingleClass);
    }

    let xs: Vec<&[f64]> = train.iter().map(|(x, _)| x.values.as_slice()).collect();
    let ys: Vec<f64> = train.iter().map(|(_, y)| *y).collect();
    let outcome = smo::solve(&xs, &ys, kernel, params, rng_stream);
    let bias = optimal_bias(&xs, &ys, &outcome.alpha, kernel, params.c);

    let support: Vec<usize> = (0..train.len())
        .filter(|&i| outcome.alpha[i] > 0.0)
        .collect();
    let model = BinaryModel {
        support_vectors: support.iter().map(|&i| train[i].0.clone()).collect(),
        dual_coefficients: support.iter().map(|&i| outcome.alpha[i] * ys[i]).collect(),
        bias,
        kernel: *kernel,
        class_pair: ("+1".to_string(), "-1".to_string()),
    };

    let diagnostics = solution_diagnostics(&xs, &ys, &outcome.alpha, bias, kernel, params);
    Ok(BinaryTrainReport {
        model,
        converged: outcome.converged,
        full_passes: outcome.full_passes,
        updates: outcome.updates,
        dual_objective: diagnostics.0,
        max_kkt_violation: diagnostics.1,
        coefficient_sum: diagnostics.2,
    })
}

/// Final bias for a dual solution. Interior multipliers pin the bias
/// exactly; when every multiplier sits on a bound the bias is only
/// constrained to an interval, whose midpoint the incremental SMO update
/// does not always hit, so it is recomputed here from all points.
fn optimal_bias(xs: &[&[f64]], ys: &[f64], alpha: &[f64], kernel: &KernelSpec, c: f64) -> f64 {
    let support: Vec<usize> = (0..xs.len()).filter(|&i| alpha[i] > 0.0).collect();
    let g = |i: usize| -> f64 {
        support
            .iter()
            .map(|&j| alpha[j] * ys[j] * kernel.eval_unchecked(xs[j], xs[i]))
            .sum()
    };
    let bound_eps = 1e-10 * c;
    let mut interior_sum = 0.0;
    let mut interior_count = 0usize;
    let mut lower = f64::NEG_INFINITY;
    let mut upper = f64::INFINITY;
    for i in 0..xs.len() {
        let target = ys[i] - g(i);
        if alpha[i] > bound_eps && alpha[i] < c - bound_eps {
            interior_sum += target;
            interior_count += 1;
        } else if (alpha[i] <= bound_eps) == (ys[i] > 0.0) {
            // alpha = 0 with y = +1, or alpha = C with y = -1: f must not
            // fall below the margin, so `target` bounds the bias from below.
            lower = lower.max(target);
        } else {
            upper = upper.min(target);
        }
    }
    if interior_count > 0 {
        interior_sum / interior_count as f64
    } else if lower.is_finite() && upper.is_finite() {
        0.5 * (lower + upper)
    } else if lower.is_finite() {
        lower
    } else if upper.is_finite() {
        upper
    } else {
        0.0
    }
}

/// Recomputes (dual objective, max KKT violation, sum alpha_i y_i) from
/// scratch, independent of the solver's incremental error cache.
fn solution_diagnostics(
    xs: &[&[f64]],
    ys: &[f64],
    alpha: &[f64],
    bias: f64,
    kernel: &KernelSpec,
    params: &SvmParams,
) -> (f64, f64, f64) {
    let support: Vec<usize> = (0..xs.len()).filter(|&i| alpha[i] > 0.0).collect();

    let mut objective = alpha.iter().sum::<f64>();
    for (si, &i) in support.iter().enumerate() {
        for &j in &support[si..] {
            let q = alpha[i] * alpha[j] * ys[i] * ys[j] * kernel.eval_unchecked(xs[i], xs[j]);
            objective -= if i == j { 0.5 * q } else { q };
        }
    }

    let bound_eps = 1e-8 * params.c;
    let mut worst = 0.0f64;
    for i in 0..xs.len() {
        let f_i = support
            .iter()
            .map(|&j| alpha[j] * ys[j] * kernel.eval_unchecked(xs[j], xs[i]))
            .sum::<f64>()
            + bias;
        let margin = ys[i] * f_i;
        let violation = if alpha[i] <= bound_eps {
            (1.0 - margin).max(0.0)
        } else if alpha[i] >= params.c - bound_eps {
            (margin - 1.0).max(0.0)
        } else {
            (margin - 1.0).abs()
        };
        worst = worst.max(violation);
    }

    let coefficient_sum = (0..xs.len()).map(|i| alpha[i] * ys[i]).sum();
    (objective, worst, coefficient_sum)
}

/// Raw decision function: sum of `dual_coefficient_i * K(sv_i, x)` plus bias.
pub fn decision_value(model: &BinaryModel, x: &EncodedVector) -> Result<f64, SvmError> {
    model.check_dim(x)?;
    let sum = model
        .support_vectors
        .iter()
        .zip(&model.dual_coefficients)
        .map(|(sv, coeff)| coeff * model.kernel.eval_unchecked(&sv.values, &x.values))
        .sum::<f64>();
    Ok(sum + model.bias)
}

/// Predicted class name; a decision value of exactly zero maps to the
/// positive class (`class_pair.0`).
pub fn predict_binary<'m>(model: &'m BinaryModel, x: &EncodedVector) -> Result<&'m str, SvmError> {
    Ok(if decision_value(model, x)? >= 0.0 {
        &model.class_pair.0
    } else {
        &model.class_pair.1
    })
}

/// One-vs-one composition: one [`BinaryModel`] per unordered class pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MulticlassModel {
    /// Class names in stable (lexicographic) order.
    pub classes: Vec<String>,
    /// Pair models in (i, j) order, i < j over `classes`; the positive class
    /// of each model is `classes[i]`.
    pub models: Vec<BinaryModel>,
}

#[derive(Debug, Clone)]
pub struct PairSummary {
    pub positive: String,
    pub negative: String,
    pub converged: bool,
    pub support_count: usize,
    pub max_kkt_violation: f64,
}

#[derive(Debug, Clone)]
pub struct MulticlassTrainReport {
    pub model: MulticlassModel,
    pub pairs: Vec<PairSummary>,
}

impl MulticlassTrainReport {
    pub fn all_converged(&self) -> bool {
        self.pairs.iter().all(|p| p.converged)
    }

    pub fn non_converged_pairs(&self) -> Vec<(String, String)> {
        self.pairs
            .iter()
            .filter(|p| !p.converged)
            .map(|p| (p.positive.clone(), p.negative.clone()))
            .collect()
    }
}

/// Trains k(k-1)/2 pairwise models, each on the records of its two classes
/// only. Pairs train in parallel; the result does not depend on scheduling.
pub fn train_multiclass(
    train: &[(EncodedVector, String)],
    params: &SvmParams,
    kernel: &KernelSpec,
) -> Result<MulticlassTrainReport, SvmError> {
    params.validate()?;
    if train.is_empty() {
        return Err(SvmError::EmptyTrainingSet);
    }
    let mut classes: Vec<String> = train.iter().map(|(_, c)| c.clone()).collect();
    classes.sort();
    classes.dedup();
    if classes.len() < 2 {
        return Err(SvmError::SingleClass);
    }

    let mut pairs = Vec::new();
    for i in 0..classes.len() {
        for j in (i + 1)..classes.len() {
            pairs.push((i, j));
        }
    }

    let trained: Vec<Result<(BinaryModel, PairSummary), SvmError>> = pairs
        .par_iter()
        .enumerate()
        .map(|(pair_idx, &(i, j))| {
            let positive = &classes[i];
            let negative = &classes[j];
            let subset: Vec<(EncodedVector, f64)> = train
                .iter()
                .filter_map(|(x, c)| {
                    if c == positive {
                        Some((x.clone(), 1.0))
                    } else if c == negative {
                        Some((x.clone(), -1.0))
                    } else {
                        None
                    }
                })
                .collect();
            let report = train_binary_with_stream(&subset, params, kernel, 1 + pair_idx as u64)?;
            let mut model = report.model;
            model.class_pair = (positive.clone(), negative.clone());
            let summary = PairSummary {
                positive: positive.clone(),
                negative: negative.clone(),
                converged: report.converged,
                support_count: model.support_vectors.len(),
                max_kkt_violation: report.max_kkt_violation,
            };
            Ok((model, summary))
        })
        .collect();

    let mut models = Vec::with_capacity(trained.len());
    let mut summaries = Vec::with_capacity(trained.len());
    for item in trained {
        let (model, summary) = item?;
        models.push(model);
        summaries.push(summary);
    }
    Ok(MulticlassTrainReport {
        model: MulticlassModel { classes, models },
        pairs: summaries,
    })
}

/// Majority vote over all pairwise models. Vote ties break to the tied class
/// with the largest sum of |decision value| over the models it won, then to
/// stable class order.
pub fn predict_multiclass<'m>(
    model: &'m MulticlassModel,
    x: &EncodedVector,
) -> Result<&'m str, SvmError> {
    let k = model.classes.len();
    let mut votes = vec![0usize; k];
    let mut confidence = vec![0.0f64; k];
    for pair_model in &model.models {
        let value = decision_value(pair_model, x)?;
        let winner = if value >= 0.0 {
            &pair_model.class_pair.0
        } else {
            &pair_model.class_pair.1
        };
        let idx = model
            .classes
            .iter()
            .position(|c| c == winner)
            .expect("pair classes are in the class list");
        votes[idx] += 1;
        confidence[idx] += value.abs();
    }
    let top_votes = *votes.iter().max().expect("at least one class");
    let best = (0..k)
        .filter(|&i| votes[i] == top_votes)
        .max_by(|&a, &b| {
            confidence[a]
                .partial_cmp(&confidence[b])
                .expect("finite confidence")
                .then(
                    // Prefer earlier classes on exact confidence ties.
                    b.cmp(&a),
                )
        })
        .expect("non-empty candidate set");
    Ok(&model.classes[best])
}
