//! Metrics and reporting: confusion matrices, detection and false-positive
//! rates, timed evaluation passes, and the per-layer report files.
//!
//! Two detection-rate variants are computed side by side. The strict rate
//! credits an attack record only when it is predicted as its exact class;
//! the lenient rate credits any attack-class prediction. For a two-class
//! matrix the variants coincide.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

use crate::ids::{decision_unit, IdsLayer, Verdict};
use crate::nslkdd::{EncodedVector, NORMAL_LABEL};
use crate::svm::{predict_binary, predict_multiclass, BinaryModel, MulticlassModel, SvmError};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("truth and prediction lists differ in length: {truths} vs {predictions}")]
    LengthMismatch { truths: usize, predictions: usize },
    #[error("metric needs at least one attack record")]
    NoAttackRecords,
    #[error("metric needs at least one normal record")]
    NoNormalRecords,
    #[error("measure needs repeats >= 1")]
    ZeroRepeats,
    #[error("cannot write report to {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Svm(#[from] SvmError),
    #[error(transparent)]
    Ids(#[from] crate::ids::IdsError),
}

/// Square count matrix over the union of observed true and predicted classes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConfusionMatrix {
    classes: Vec<String>,
    /// Row-major counts indexed by (true class, predicted class).
    counts: Vec<u64>,
}

/// Builds the confusion matrix of a prediction run.
pub fn confusion<S: AsRef<str>, T: AsRef<str>>(
    truths: &[S],
    predictions: &[T],
) -> Result<ConfusionMatrix, EvalError> {
    if truths.len() != predictions.len() {
        return Err(EvalError::LengthMismatch {
            truths: truths.len(),
            predictions: predictions.len(),
        });
    }
    let mut classes: Vec<String> = truths
        .iter()
        .map(|s| s.as_ref().to_string())
        .chain(predictions.iter().map(|s| s.as_ref().to_string()))
        .collect();
    classes.sort();
    classes.dedup();
    let k = classes.len();
    let mut counts = vec![0u64; k * k];
    let index = |label: &str| {
        classes
            .binary_search_by(|c| c.as_str().cmp(label))
            .expect("known")
    };
    for (t, p) in truths.iter().zip(predictions) {
        counts[index(t.as_ref()) * k + index(p.as_ref())] += 1;
    }
    Ok(ConfusionMatrix { classes, counts })
}

impl ConfusionMatrix {
    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn count(&self, truth: &str, predicted: &str) -> u64 {
        let t = self.classes.iter().position(|c| c == truth);
        let p = self.classes.iter().position(|c| c == predicted);
        match (t, p) {
            (Some(t), Some(p)) => self.counts[t * self.classes.len() + p],
            _ => 0,
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    fn row_total(&self, t: usize) -> u64 {
        let k = self.classes.len();
        self.counts[t * k..(t + 1) * k].iter().sum()
    }

    fn is_normal(&self, idx: usize) -> bool {
        self.classes[idx] == NORMAL_LABEL
    }

    fn attack_total(&self) -> u64 {
        (0..self.classes.len())
            .filter(|i| !self.is_normal(*i))
            .map(|i| self.row_total(i))
            .sum()
    }
}

/// Strict detection rate: attack records predicted as their exact attack
/// class, as a percentage of all attack records.
pub fn detection_rate(cm: &ConfusionMatrix) -> Result<f64, EvalError> {
    let attacks = cm.attack_total();
    if attacks == 0 {
        return Err(EvalError::NoAttackRecords);
    }
    let k = cm.classes.len();
    let hit: u64 = (0..k)
        .filter(|i| !cm.is_normal(*i))
        .map(|i| cm.counts[i * k + i])
        .sum();
    Ok(100.0 * hit as f64 / attacks as f64)
}

/// Lenient detection rate: attack records predicted as any attack class.
pub fn detection_rate_lenient(cm: &ConfusionMatrix) -> Result<f64, EvalError> {
    let attacks = cm.attack_total();
    if attacks == 0 {
        return Err(EvalError::NoAttackRecords);
    }
    let k = cm.classes.len();
    let mut hit = 0u64;
    for t in (0..k).filter(|i| !cm.is_normal(*i)) {
        for p in (0..k).filter(|i| !cm.is_normal(*i)) {
            hit += cm.counts[t * k + p];
        }
    }
    Ok(100.0 * hit as f64 / attacks as f64)
}

/// Normal records predicted as any attack class, as a percentage of all
/// normal records.
pub fn false_positive_rate(cm: &ConfusionMatrix) -> Result<f64, EvalError> {
    let k = cm.classes.len();
    let normal_row = match (0..k).find(|i| cm.is_normal(*i)) {
        Some(row) if cm.row_total(row) > 0 => row,
        _ => return Err(EvalError::NoNormalRecords),
    };
    let false_positives: u64 = (0..k)
        .filter(|p| !cm.is_normal(*p))
        .map(|p| cm.counts[normal_row * k + p])
        .sum();
    Ok(100.0 * false_positives as f64 / cm.row_total(normal_row) as f64)
}

pub fn accuracy(cm: &ConfusionMatrix) -> f64 {
    let total = cm.total();
    if total == 0 {
        return 100.0;
    }
    let k = cm.classes.len();
    let correct: u64 = (0..k).map(|i| cm.counts[i * k + i]).sum();
    100.0 * correct as f64 / total as f64
}

/// Recall per true class, in percent; classes with no records recall 100.
pub fn per_class_recall(cm: &ConfusionMatrix) -> BTreeMap<String, f64> {
    let k = cm.classes.len();
    (0..k)
        .map(|t| {
            let total = cm.row_total(t);
            let recall = if total == 0 {
                100.0
            } else {
                100.0 * cm.counts[t * k + t] as f64 / total as f64
            };
            (cm.classes[t].clone(), recall)
        })
        .collect()
}

/// All headline metrics of one layer's evaluation.
#[derive(Debug, Clone, Serialize)]
pub struct LayerMetrics {
    pub layer: String,
    pub dr_strict: f64,
    pub dr_lenient: f64,
    pub fpr: f64,
    pub accuracy: f64,
    pub per_class_recall: BTreeMap<String, f64>,
}

pub fn layer_metrics(layer: IdsLayer, cm: &ConfusionMatrix) -> Result<LayerMetrics, EvalError> {
    Ok(LayerMetrics {
        layer: layer.name().to_string(),
        dr_strict: detection_rate(cm)?,
        dr_lenient: detection_rate_lenient(cm)?,
        fpr: false_positive_rate(cm)?,
        accuracy: accuracy(cm),
        per_class_recall: per_class_recall(cm),
    })
}

/// Wall-clock and peak-memory figures over repeated runs of a procedure.
#[derive(Debug, Clone, Serialize)]
pub struct ResourceStats {
    pub runtimes_s: Vec<f64>,
    pub peak_mem_mb: Vec<f64>,
    pub mean_runtime_s: f64,
    pub mean_peak_mem_mb: f64,
}

impl ResourceStats {
    pub fn run_count(&self) -> usize {
        self.runtimes_s.len()
    }
}

/// Peak resident set of this process in MB, from the kernel's accounting.
pub fn peak_rss_mb() -> Option<f64> {
    let status = fs::read_to_string("/proc/self/status").ok()?;
    let line = status.lines().find(|l| l.starts_with("VmHWM:"))?;
    let kb: f64 = line.split_whitespace().nth(1)?.parse().ok()?;
    Some(kb / 1024.0)
}

/// Resets the kernel's peak-RSS watermark so per-run peaks are comparable.
/// Not every kernel/configuration allows it; returns whether it worked.
pub fn reset_peak_rss() -> bool {
    fs::write("/proc/self/clear_refs", b"5").is_ok()
}

/// Runs a procedure `repeats` times, recording wall-clock time and peak
/// resident memory per run. Runs are serialized so timings do not contend.
pub fn measure<F: FnMut()>(mut run: F, repeats: usize) -> Result<ResourceStats, EvalError> {
    if repeats == 0 {
        return Err(EvalError::ZeroRepeats);
    }
    let mut runtimes = Vec::with_capacity(repeats);
    let mut peaks = Vec::with_capacity(repeats);
    for _ in 0..repeats {
        reset_peak_rss();
        let start = Instant::now();
        run();
        runtimes.push(start.elapsed().as_secs_f64());
        peaks.push(peak_rss_mb().unwrap_or(0.0));
    }
    let mean = |xs: &[f64]| xs.iter().sum::<f64>() / xs.len() as f64;
    Ok(ResourceStats {
        mean_runtime_s: mean(&runtimes),
        mean_peak_mem_mb: mean(&peaks),
        runtimes_s: runtimes,
        peak_mem_mb: peaks,
    })
}

/// One classification pass of the anomaly layer over a pre-encoded split.
pub fn evaluate_anomaly(
    model: &BinaryModel,
    xs: &[EncodedVector],
) -> Result<Vec<String>, EvalError> {
    xs.iter()
        .map(|x| Ok(predict_binary(model, x)?.to_string()))
        .collect()
}

/// One classification pass of the misuse layer over a pre-encoded split.
pub fn evaluate_misuse(
    model: &MulticlassModel,
    xs: &[EncodedVector],
) -> Result<Vec<String>, EvalError> {
    xs.iter()
        .map(|x| Ok(predict_multiclass(model, x)?.to_string()))
        .collect()
}

/// One classification pass of the hybrid layer: a full anomaly pass, a full
/// misuse pass, and the decision unit over each pair. The gate-facing
/// classifier short-circuits instead; this evaluation pass mirrors the cost
/// structure of running both constituent systems, which is what the layered
/// architecture deploys on the database agent.
pub fn evaluate_hybrid(
    anomaly_model: &BinaryModel,
    misuse_model: &MulticlassModel,
    xs: &[EncodedVector],
) -> Result<Vec<Verdict>, EvalError> {
    let mut verdicts = Vec::with_capacity(xs.len());
    for x in xs {
        let first = crate::ids::anomaly_classify(anomaly_model, x)?;
        let second = crate::ids::misuse_classify(misuse_model, x)?;
        verdicts.push(decision_unit(&first, &second)?);
    }
    Ok(verdicts)
}

/// Everything the report carries for one layer.
#[derive(Debug, Clone, Serialize)]
pub struct ReportEntry {
    pub metrics: LayerMetrics,
    pub confusion: ConfusionMatrix,
    pub resources: ResourceStats,
}

/// Writes `report.csv` (one row per layer) and `report.json` (full matrices
/// and per-run resource samples) under `dir`. Re-emitting the same inputs
/// produces byte-identical files.
pub fn emit_report(entries: &[ReportEntry], dir: &Path) -> Result<(PathBuf, PathBuf), EvalError> {
    fs::create_dir_all(dir).map_err(|source| EvalError::Io {
        path: dir.display().to_string(),
        source,
    })?;
    let csv_path = dir.join("report.csv");
    let json_path = dir.join("report.json");

    let mut csv = Vec::new();
    writeln!(
        csv,
        "layer,dr_strict,dr_lenient,fpr,accuracy,runtime_s,peak_mem_mb"
    )
    .expect("in-memory write");
    for entry in entries {
        writeln!(
            csv,
            "{},{:.4},{:.4},{:.4},{:.4},{:.6},{:.3}",
            entry.metrics.layer,
            entry.metrics.dr_strict,
            entry.metrics.dr_lenient,
            entry.metrics.fpr,
            entry.metrics.accuracy,
            entry.resources.mean_runtime_s,
            entry.resources.mean_peak_mem_mb,
        )
        .expect("in-memory write");
    }
    fs::write(&csv_path, csv).map_err(|source| EvalError::Io {
        path: csv_path.display().to_string(),
        source,
    })?;

    let json = serde_json::to_string_pretty(&entries).expect("report serializes");
    fs::write(&json_path, json).map_err(|source| EvalError::Io {
        path: json_path.display().to_string(),
        source,
    })?;
    Ok((csv_path, json_path))
}
