//! Implementations of the `careguard` subcommands. Each artifact-producing
//! command writes a manifest next to its outputs recording inputs, digests,
//! seeds and tool version.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime};

use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::agents::{run_simulation, LayerModels, SimConfig, SimError, TrafficPools};
use crate::eval::{
    confusion, emit_report, evaluate_anomaly, evaluate_hybrid, evaluate_misuse, layer_metrics,
    measure, EvalError, ReportEntry,
};
use crate::ids::IdsLayer;
use crate::nslkdd::{
    build_anomaly_dataset, build_misuse_dataset, count_classes, parse_file, read_split, synth,
    write_split, AttackCatalog, DatasetError, DatasetSidecar, DatasetSpec, EncodedVector,
    FeatureSchema, ParseError, SchemaError, TrafficRecord, ANOMALY_ATTACK_LABEL, NORMAL_LABEL,
};
use crate::svm::{
    load_model, save_model, train_binary, train_multiclass, KernelSpec, SavedModel, SvmError,
    SvmParams,
};

pub const ANOMALY_TRAIN_FILE: &str = "anomaly_train.csv";
pub const ANOMALY_TEST_FILE: &str = "anomaly_test.csv";
pub const MISUSE_TRAIN_FILE: &str = "misuse_train.csv";
pub const MISUSE_TEST_FILE: &str = "misuse_test.csv";
pub const ANOMALY_SCHEMA_FILE: &str = "schema_anomaly.json";
pub const MISUSE_SCHEMA_FILE: &str = "schema_misuse.json";
pub const SIDECAR_FILE: &str = "dataset.json";
pub const MANIFEST_FILE: &str = "manifest.json";

/// Command failures, partitioned by exit code: usage errors exit 2 (clap's
/// own code for bad invocations), data errors 3, convergence failures 4,
/// anything else 1.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Convergence(String),
    #[error("{0}")]
    Other(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) => 3,
            CliError::Convergence(_) => 4,
            CliError::Other(_) => 1,
        }
    }
}

impl From<ParseError> for CliError {
    fn from(e: ParseError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<DatasetError> for CliError {
    fn from(e: DatasetError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<SchemaError> for CliError {
    fn from(e: SchemaError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<SvmError> for CliError {
    fn from(e: SvmError) -> Self {
        match e {
            SvmError::InvalidParameter(msg) => CliError::Usage(msg),
            other => CliError::Data(other.to_string()),
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::InvalidConfig(_) | SimError::Toml(_) => CliError::Usage(e.to_string()),
            other => CliError::Data(other.to_string()),
        }
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        CliError::Data(e.to_string())
    }
}

fn io_err(path: &Path, source: std::io::Error) -> CliError {
    CliError::Other(format!("cannot access {}: {source}", path.display()))
}

/// Provenance record written next to every command's outputs.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub tool_version: String,
    pub seed: u64,
    pub created_unix_s: u64,
    /// SHA-256 per input file.
    pub inputs: BTreeMap<String, String>,
    /// SHA-256 per output file.
    pub outputs: BTreeMap<String, String>,
    pub notes: BTreeMap<String, String>,
}

impl RunManifest {
    fn new(command: &str, seed: u64) -> Self {
        RunManifest {
            command: command.to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            created_unix_s: SystemTime::now()
                .duration_since(SystemTime::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            inputs: BTreeMap::new(),
            outputs: BTreeMap::new(),
            notes: BTreeMap::new(),
        }
    }

    fn add_input(&mut self, path: &Path) -> Result<(), CliError> {
        // A missing or unreadable input is a data failure (exit 3), not a
        // generic I/O one.
        let digest = sha256_file(path).map_err(|e| CliError::Data(e.to_string()))?;
        self.inputs.insert(path.display().to_string(), digest);
        Ok(())
    }

    fn add_output(&mut self, path: &Path) -> Result<(), CliError> {
        self.outputs
            .insert(path.display().to_string(), sha256_file(path)?);
        Ok(())
    }

    fn write(&self, path: &Path) -> Result<(), CliError> {
        let json = serde_json::to_string_pretty(self).expect("manifest serializes");
        fs::write(path, json).map_err(|e| io_err(path, e))
    }
}

pub fn sha256_file(path: &Path) -> Result<String, CliError> {
    let bytes = fs::read(path).map_err(|e| io_err(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// Builds the anomaly and misuse splits from raw NSL-KDD files, writes them
/// with their schemas and sidecar under `out`, and fails unless the built
/// per-class counts match the target composition exactly.
pub fn cmd_build_data(
    train_file: &Path,
    test_file: &Path,
    seed: u64,
    out: &Path,
) -> Result<(), CliError> {
    let started = Instant::now();
    fs::create_dir_all(out).map_err(|e| io_err(out, e))?;
    let mut manifest = RunManifest::new("build-data", seed);
    manifest.add_input(train_file)?;
    manifest.add_input(test_file)?;

    let train_source = parse_file(train_file)?;
    let test_source = parse_file(test_file)?;
    let catalog = AttackCatalog::standard();
    let (_, train_filter) = crate::nslkdd::filter_attacks(&train_source, &catalog);
    println!(
        "sources: {} train records ({} catalog attacks), {} test records",
        train_source.len(),
        train_filter.kept,
        test_source.len()
    );

    let spec = DatasetSpec {
        seed,
        ..DatasetSpec::default()
    };
    let (misuse_train, misuse_test) = build_misuse_dataset(&train_source, &test_source, &spec)?;
    let (anomaly_train, anomaly_test) = build_anomaly_dataset(&train_source, &test_source, &spec)?;

    // The builders verify per-class counts against the spec; re-check the
    // headline totals here so the command's contract is explicit.
    let misuse_train_counts = count_classes(&misuse_train);
    let misuse_test_counts = count_classes(&misuse_test);
    let anomaly_train_counts = count_classes(&anomaly_train);
    let anomaly_test_counts = count_classes(&anomaly_test);
    if misuse_train.len() != spec.train_total() || misuse_test.len() != spec.test_total() {
        return Err(CliError::Data(format!(
            "built split totals {}/{} do not match the target {}/{}",
            misuse_train.len(),
            misuse_test.len(),
            spec.train_total(),
            spec.test_total()
        )));
    }

    println!("per-class counts (train/test):");
    for (class, want_train) in &spec.train_counts {
        println!(
            "  {class:>16}  {want_train:>5} / {:>5}",
            spec.test_counts.get(class).copied().unwrap_or(0)
        );
    }
    println!(
        "train total {} ({} attack + {} normal), test total {} ({} attack + {} normal)",
        misuse_train.len(),
        spec.train_attack_total(),
        spec.train_counts[NORMAL_LABEL],
        misuse_test.len(),
        spec.test_attack_total(),
        spec.test_counts[NORMAL_LABEL],
    );

    let anomaly_schema = FeatureSchema::fit(&anomaly_train)?;
    let misuse_schema = FeatureSchema::fit(&misuse_train)?;

    for (name, records) in [
        (MISUSE_TRAIN_FILE, &misuse_train),
        (MISUSE_TEST_FILE, &misuse_test),
        (ANOMALY_TRAIN_FILE, &anomaly_train),
        (ANOMALY_TEST_FILE, &anomaly_test),
    ] {
        let path = out.join(name);
        write_split(&path, records)?;
        manifest.add_output(&path)?;
    }
    let anomaly_schema_path = out.join(ANOMALY_SCHEMA_FILE);
    anomaly_schema.save(&anomaly_schema_path)?;
    manifest.add_output(&anomaly_schema_path)?;
    let misuse_schema_path = out.join(MISUSE_SCHEMA_FILE);
    misuse_schema.save(&misuse_schema_path)?;
    manifest.add_output(&misuse_schema_path)?;

    let sidecar = DatasetSidecar {
        seed,
        source_digests: [
            (
                "train".to_string(),
                manifest.inputs[&train_file.display().to_string()].clone(),
            ),
            (
                "test".to_string(),
                manifest.inputs[&test_file.display().to_string()].clone(),
            ),
        ]
        .into(),
        misuse_train_counts,
        misuse_test_counts,
        anomaly_train_counts,
        anomaly_test_counts,
    };
    let sidecar_path = out.join(SIDECAR_FILE);
    fs::write(
        &sidecar_path,
        serde_json::to_string_pretty(&sidecar).expect("sidecar serializes"),
    )
    .map_err(|e| io_err(&sidecar_path, e))?;
    manifest.add_output(&sidecar_path)?;

    manifest.notes.insert(
        "elapsed_s".into(),
        format!("{:.3}", started.elapsed().as_secs_f64()),
    );
    manifest.write(&out.join(MANIFEST_FILE))?;
    println!("dataset written to {}", out.display());
    Ok(())
}

/// Which layer `cmd_train` builds a model for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrainLayer {
    Anomaly,
    Misuse,
}

impl TrainLayer {
    pub fn name(self) -> &'static str {
        match self {
            TrainLayer::Anomaly => "anomaly",
            TrainLayer::Misuse => "misuse",
        }
    }
}

/// Encodes a split under its schema, keeping the label strings.
fn encode_split(records: &[TrafficRecord], schema: &FeatureSchema) -> Vec<(EncodedVector, String)> {
    records
        .iter()
        .map(|r| (schema.encode(r), r.label().to_string()))
        .collect()
}

/// Trains one layer's model from a built dataset directory and saves it.
#[allow(clippy::too_many_arguments)]
pub fn cmd_train(
    data: &Path,
    layer: TrainLayer,
    c: f64,
    gamma: Option<f64>,
    tolerance: f64,
    max_passes: u32,
    seed: u64,
    out: &Path,
    strict_convergence: bool,
) -> Result<(), CliError> {
    let started = Instant::now();
    let mut manifest = RunManifest::new(&format!("train --layer {}", layer.name()), seed);

    let (split_file, schema_file) = match layer {
        TrainLayer::Anomaly => (ANOMALY_TRAIN_FILE, ANOMALY_SCHEMA_FILE),
        TrainLayer::Misuse => (MISUSE_TRAIN_FILE, MISUSE_SCHEMA_FILE),
    };
    let split_path = data.join(split_file);
    let schema_path = data.join(schema_file);
    manifest.add_input(&split_path)?;
    manifest.add_input(&schema_path)?;

    let schema = FeatureSchema::load(&schema_path)?;
    let records = read_split(&split_path)?;
    let encoded = encode_split(&records, &schema);
    let dim = schema.encoded_dim();
    let gamma = gamma.unwrap_or(1.0 / dim as f64);
    let kernel = KernelSpec::rbf(gamma)?;
    let params = SvmParams {
        c,
        tolerance,
        max_passes,
        seed,
        ..SvmParams::default()
    };
    println!(
        "training {} layer: {} records, dim {dim}, C={c}, gamma={gamma:.6}",
        layer.name(),
        encoded.len()
    );

    let (model, converged, detail) = match layer {
        TrainLayer::Anomaly => {
            let train: Vec<(EncodedVector, f64)> = encoded
                .into_iter()
                .map(|(x, label)| {
                    let y = if label == NORMAL_LABEL { -1.0 } else { 1.0 };
                    (x, y)
                })
                .collect();
            let report = train_binary(&train, &params, &kernel)?;
            let mut model = report.model;
            model.class_pair = (ANOMALY_ATTACK_LABEL.to_string(), NORMAL_LABEL.to_string());
            let detail = format!(
                "passes={} updates={} support_vectors={} max_kkt_violation={:.2e}",
                report.full_passes,
                report.updates,
                model.support_vectors.len(),
                report.max_kkt_violation
            );
            (SavedModel::Binary(model), report.converged, detail)
        }
        TrainLayer::Misuse => {
            let report = train_multiclass(&encoded, &params, &kernel)?;
            let converged = report.all_converged();
            let detail = format!(
                "pairs={} non_converged={:?}",
                report.pairs.len(),
                report.non_converged_pairs()
            );
            (SavedModel::Multiclass(report.model), converged, detail)
        }
    };

    save_model(&model, out)?;
    manifest.add_output(out)?;
    manifest
        .notes
        .insert("converged".into(), converged.to_string());
    manifest.notes.insert("solver".into(), detail.clone());
    manifest.notes.insert("c".into(), c.to_string());
    manifest.notes.insert("gamma".into(), gamma.to_string());
    manifest.notes.insert(
        "elapsed_s".into(),
        format!("{:.3}", started.elapsed().as_secs_f64()),
    );
    manifest.write(&manifest_path_for(out))?;

    println!("model written to {} ({detail})", out.display());
    if !converged {
        println!("warning: solver did not fully converge within {max_passes} passes");
        if strict_convergence {
            return Err(CliError::Convergence(format!(
                "training stopped after {max_passes} passes with KKT violations remaining"
            )));
        }
    }
    Ok(())
}

fn manifest_path_for(artifact: &Path) -> PathBuf {
    let stem = artifact
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("artifact");
    artifact.with_file_name(format!("{stem}.manifest.json"))
}

/// Loads both models plus the encoded test split shared by the layers.
struct EvalInputs {
    anomaly: crate::svm::BinaryModel,
    misuse: crate::svm::MulticlassModel,
    xs: Vec<EncodedVector>,
    misuse_truths: Vec<String>,
    anomaly_truths: Vec<String>,
}

fn load_eval_inputs(
    data: &Path,
    anomaly_model: &Path,
    misuse_model: &Path,
    manifest: &mut RunManifest,
) -> Result<EvalInputs, CliError> {
    let misuse_schema_path = data.join(MISUSE_SCHEMA_FILE);
    let test_path = data.join(MISUSE_TEST_FILE);
    manifest.add_input(&misuse_schema_path)?;
    manifest.add_input(&test_path)?;
    manifest.add_input(anomaly_model)?;
    manifest.add_input(misuse_model)?;

    let schema = FeatureSchema::load(&misuse_schema_path)?;
    let records = read_split(&test_path)?;
    let xs: Vec<EncodedVector> = records.iter().map(|r| schema.encode(r)).collect();
    let misuse_truths: Vec<String> = records.iter().map(|r| r.label().to_string()).collect();
    let anomaly_truths: Vec<String> = misuse_truths
        .iter()
        .map(|label| {
            if label == NORMAL_LABEL {
                NORMAL_LABEL
            } else {
                ANOMALY_ATTACK_LABEL
            }
            .to_string()
        })
        .collect();

    let anomaly = load_model(anomaly_model)?
        .as_binary()
        .cloned()
        .ok_or_else(|| CliError::Data("anomaly model file holds a multiclass model".into()))?;
    let misuse = load_model(misuse_model)?
        .as_multiclass()
        .cloned()
        .ok_or_else(|| CliError::Data("misuse model file holds a binary model".into()))?;
    Ok(EvalInputs {
        anomaly,
        misuse,
        xs,
        misuse_truths,
        anomaly_truths,
    })
}

/// Evaluates the three layers on the built test split, timing each layer's
/// classification pass `repeats` times, and emits the report files.
pub fn cmd_eval(
    data: &Path,
    anomaly_model: &Path,
    misuse_model: &Path,
    repeats: usize,
    out: &Path,
) -> Result<(), CliError> {
    let mut manifest = RunManifest::new("eval", 0);
    let inputs = load_eval_inputs(data, anomaly_model, misuse_model, &mut manifest)?;

    let anomaly_preds = evaluate_anomaly(&inputs.anomaly, &inputs.xs)?;
    let anomaly_res = measure(
        || {
            evaluate_anomaly(&inputs.anomaly, &inputs.xs).expect("evaluated once already");
        },
        repeats,
    )?;
    let anomaly_cm = confusion(&inputs.anomaly_truths, &anomaly_preds)?;
    let anomaly_entry = ReportEntry {
        metrics: layer_metrics(IdsLayer::Anomaly, &anomaly_cm)?,
        confusion: anomaly_cm,
        resources: anomaly_res,
    };

    let misuse_preds = evaluate_misuse(&inputs.misuse, &inputs.xs)?;
    let misuse_res = measure(
        || {
            evaluate_misuse(&inputs.misuse, &inputs.xs).expect("evaluated once already");
        },
        repeats,
    )?;
    let misuse_cm = confusion(&inputs.misuse_truths, &misuse_preds)?;
    let misuse_entry = ReportEntry {
        metrics: layer_metrics(IdsLayer::Misuse, &misuse_cm)?,
        confusion: misuse_cm,
        resources: misuse_res,
    };

    let hybrid_verdicts = evaluate_hybrid(&inputs.anomaly, &inputs.misuse, &inputs.xs)?;
    let hybrid_preds: Vec<String> = hybrid_verdicts
        .iter()
        .map(|v| v.predicted_label().to_string())
        .collect();
    let hybrid_res = measure(
        || {
            evaluate_hybrid(&inputs.anomaly, &inputs.misuse, &inputs.xs)
                .expect("evaluated once already");
        },
        repeats,
    )?;
    let hybrid_cm = confusion(&inputs.misuse_truths, &hybrid_preds)?;
    let hybrid_entry = ReportEntry {
        metrics: layer_metrics(IdsLayer::Hybrid, &hybrid_cm)?,
        confusion: hybrid_cm,
        resources: hybrid_res,
    };

    let entries = vec![anomaly_entry, misuse_entry, hybrid_entry];
    for entry in &entries {
        println!(
            "{:>8}: DR {:.2}% (lenient {:.2}%), FPR {:.2}%, accuracy {:.2}%, runtime {:.3}s, peak {:.1} MB",
            entry.metrics.layer,
            entry.metrics.dr_strict,
            entry.metrics.dr_lenient,
            entry.metrics.fpr,
            entry.metrics.accuracy,
            entry.resources.mean_runtime_s,
            entry.resources.mean_peak_mem_mb,
        );
    }

    let (csv_path, json_path) = emit_report(&entries, out)?;
    manifest.add_output(&csv_path)?;
    manifest.add_output(&json_path)?;
    manifest.notes.insert("repeats".into(), repeats.to_string());
    manifest.write(&out.join(MANIFEST_FILE))?;
    println!("report written to {}", out.display());
    Ok(())
}

/// Runs the agent simulation and writes the trace, summary and manifest.
pub fn cmd_simulate(
    config_path: Option<&Path>,
    data: &Path,
    anomaly_model: &Path,
    misuse_model: &Path,
    seed_override: Option<u64>,
    out: &Path,
) -> Result<(), CliError> {
    let mut config = match config_path {
        Some(path) => SimConfig::from_path(path)?,
        None => SimConfig::default(),
    };
    if let Some(seed) = seed_override {
        config.seed = seed;
    }
    let mut manifest = RunManifest::new("simulate", config.seed);
    if let Some(path) = config_path {
        manifest.add_input(path)?;
    }

    let inputs = load_eval_inputs(data, anomaly_model, misuse_model, &mut manifest)?;
    let schema = FeatureSchema::load(&data.join(MISUSE_SCHEMA_FILE))?;
    let records = read_split(&data.join(MISUSE_TEST_FILE))?;
    let pools = TrafficPools::from_test_split(&records, &schema, &AttackCatalog::standard());
    let models = LayerModels {
        anomaly: inputs.anomaly,
        misuse: inputs.misuse,
    };

    let trace = run_simulation(&config, &models, &pools)?;

    fs::create_dir_all(out).map_err(|e| io_err(out, e))?;
    let trace_path = out.join("trace.ndjson");
    fs::write(&trace_path, trace.to_ndjson()).map_err(|e| io_err(&trace_path, e))?;
    let summary_path = out.join("summary.csv");
    fs::write(&summary_path, trace.summary_csv()).map_err(|e| io_err(&summary_path, e))?;
    manifest.add_output(&trace_path)?;
    manifest.add_output(&summary_path)?;
    manifest.notes.insert("trace_digest".into(), trace.digest());
    manifest.notes.insert("config".into(), config.to_toml());
    manifest.write(&out.join(MANIFEST_FILE))?;

    println!(
        "simulated {} ticks over {} patients: {} emitted, {} delivered, {} blocked ({} corrected)",
        config.tick_count,
        config.patient_count,
        trace.summary.emitted,
        trace.summary.delivered,
        trace.summary.blocked,
        trace.summary.corrected,
    );
    println!("trace digest {}", trace.digest());
    Ok(())
}

/// Writes a synthetic NSL-KDD-format corpus for runs without the real files.
pub fn cmd_synth_data(seed: u64, out: &Path) -> Result<(), CliError> {
    let spec = synth::SynthSpec {
        seed,
        ..synth::SynthSpec::default()
    };
    let (train_path, test_path) = synth::write_corpus(&spec, out).map_err(|e| io_err(out, e))?;
    let mut manifest = RunManifest::new("synth-data", seed);
    manifest.add_output(&train_path)?;
    manifest.add_output(&test_path)?;
    manifest.write(&out.join(MANIFEST_FILE))?;
    println!(
        "synthetic corpus written: {} and {}",
        train_path.display(),
        test_path.display()
    );
    Ok(())
}
