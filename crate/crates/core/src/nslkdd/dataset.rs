use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::Write as _;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::catalog::AttackCatalog;
use super::record::{parse_lines, ParseError, TrafficRecord, FEATURE_NAMES};

/// Label carried by non-attack records.
pub const NORMAL_LABEL: &str = "normal";

/// Collapsed label given to every attack record in the anomaly dataset.
pub const ANOMALY_ATTACK_LABEL: &str = "attack";

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error(
        "class {class:?}: requested {requested} {role} records but only {available} are available"
    )]
    InsufficientRecords {
        class: String,
        role: &'static str,
        requested: usize,
        available: usize,
    },
    #[error("built {role} split has {found} {class:?} records, expected {expected}")]
    CountMismatch {
        class: String,
        role: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("cannot access {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Parse(#[from] ParseError),
}

/// Per-class record counts for one split.
pub type ClassCounts = BTreeMap<String, usize>;

/// Target composition of the train and test splits, plus the sampling seed.
///
/// The default composition is the standard evaluation one: the ten DoS/U2R
/// attacks with fixed per-class counts summing to 1471 train / 997 test
/// attack records, plus 4000 normal records in each split (5471 / 4997
/// records in total).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetSpec {
    pub train_counts: ClassCounts,
    pub test_counts: ClassCounts,
    pub seed: u64,
}

impl Default for DatasetSpec {
    fn default() -> Self {
        let train = [
            ("neptune", 300),
            ("back", 300),
            ("smurf", 300),
            ("buffer_overflow", 30),
            ("pod", 201),
            ("loadmodule", 9),
            ("perl", 3),
            ("land", 18),
            ("rootkit", 10),
            ("teardrop", 300),
            (NORMAL_LABEL, 4000),
        ];
        let test = [
            ("neptune", 300),
            ("back", 300),
            ("smurf", 300),
            ("buffer_overflow", 20),
            ("pod", 41),
            ("loadmodule", 2),
            ("perl", 2),
            ("land", 7),
            ("rootkit", 13),
            ("teardrop", 12),
            (NORMAL_LABEL, 4000),
        ];
        DatasetSpec {
            train_counts: train.iter().map(|(c, n)| (c.to_string(), *n)).collect(),
            test_counts: test.iter().map(|(c, n)| (c.to_string(), *n)).collect(),
            seed: 42,
        }
    }
}

impl DatasetSpec {
    pub fn train_total(&self) -> usize {
        self.train_counts.values().sum()
    }

    pub fn test_total(&self) -> usize {
        self.test_counts.values().sum()
    }

    pub fn train_attack_total(&self) -> usize {
        self.train_total() - self.train_counts.get(NORMAL_LABEL).copied().unwrap_or(0)
    }

    pub fn test_attack_total(&self) -> usize {
        self.test_total() - self.test_counts.get(NORMAL_LABEL).copied().unwrap_or(0)
    }
}

/// Exclusion counts produced by [`filter_attacks`].
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct FilterSummary {
    pub kept: usize,
    /// Records whose label is outside the catalog, counted per label
    /// ("normal" included).
    pub excluded: BTreeMap<String, usize>,
}

/// Groups the catalogued attack records by attack name, preserving source
/// order. Records with any other label (normal included) are excluded and
/// tallied in the summary.
pub fn filter_attacks<'a>(
    records: &'a [TrafficRecord],
    catalog: &AttackCatalog,
) -> (BTreeMap<String, Vec<&'a TrafficRecord>>, FilterSummary) {
    let mut by_attack: BTreeMap<String, Vec<&TrafficRecord>> = catalog
        .names()
        .map(|n| (n.to_string(), Vec::new()))
        .collect();
    let mut summary = FilterSummary::default();
    for rec in records {
        match by_attack.get_mut(rec.label()) {
            Some(bucket) => {
                bucket.push(rec);
                summary.kept += 1;
            }
            None => *summary.excluded.entry(rec.label().to_string()).or_default() += 1,
        }
    }
    (by_attack, summary)
}

/// Indices of `count` records drawn uniformly without replacement from
/// `pool_len` candidates, returned in ascending order so draws preserve
/// source order.
fn draw_indices(pool_len: usize, count: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut picked = rand::seq::index::sample(rng, pool_len, count).into_vec();
    picked.sort_unstable();
    picked
}

/// One RNG stream per (class, role) so a class's draw does not depend on the
/// order classes are processed in.
fn class_rng(seed: u64, class_pos: u64, role: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(class_pos * 4 + role);
    rng
}

struct ClassPools<'a> {
    train: Vec<&'a TrafficRecord>,
    test: Vec<&'a TrafficRecord>,
}

fn class_pools<'a>(
    train_source: &'a [TrafficRecord],
    test_source: &'a [TrafficRecord],
    class: &str,
) -> ClassPools<'a> {
    ClassPools {
        train: train_source.iter().filter(|r| r.label() == class).collect(),
        test: test_source.iter().filter(|r| r.label() == class).collect(),
    }
}

/// Builds the 11-class train/test splits with exactly the per-class counts of
/// the spec. Train records are drawn from the train source and test records
/// from the test source; when the test source runs short for a class, the
/// remainder is drawn from train-source records not used for training, so the
/// two draws stay disjoint.
pub fn build_misuse_dataset(
    train_source: &[TrafficRecord],
    test_source: &[TrafficRecord],
    spec: &DatasetSpec,
) -> Result<(Vec<TrafficRecord>, Vec<TrafficRecord>), DatasetError> {
    let mut train_split = Vec::with_capacity(spec.train_total());
    let mut test_split = Vec::with_capacity(spec.test_total());
    let classes: BTreeSet<&String> = spec
        .train_counts
        .keys()
        .chain(spec.test_counts.keys())
        .collect();

    for (class_pos, class) in classes.iter().enumerate() {
        let pools = class_pools(train_source, test_source, class);
        let want_train = spec.train_counts.get(*class).copied().unwrap_or(0);
        let want_test = spec.test_counts.get(*class).copied().unwrap_or(0);

        if want_train > pools.train.len() {
            return Err(DatasetError::InsufficientRecords {
                class: (*class).clone(),
                role: "train",
                requested: want_train,
                available: pools.train.len(),
            });
        }
        let mut rng = class_rng(spec.seed, class_pos as u64, 0);
        let train_picks = draw_indices(pools.train.len(), want_train, &mut rng);
        train_split.extend(train_picks.iter().map(|i| pools.train[*i].clone()));

        // Test draw, falling back to unused train-source records when the
        // test source has too few records of this class.
        let from_test = want_test.min(pools.test.len());
        let mut rng = class_rng(spec.seed, class_pos as u64, 1);
        let test_picks = draw_indices(pools.test.len(), from_test, &mut rng);
        test_split.extend(test_picks.iter().map(|i| pools.test[*i].clone()));

        let shortfall = want_test - from_test;
        if shortfall > 0 {
            let used: BTreeSet<usize> = train_picks.iter().copied().collect();
            let leftovers: Vec<usize> = (0..pools.train.len())
                .filter(|i| !used.contains(i))
                .collect();
            if shortfall > leftovers.len() {
                return Err(DatasetError::InsufficientRecords {
                    class: (*class).clone(),
                    role: "test",
                    requested: want_test,
                    available: pools.test.len() + leftovers.len(),
                });
            }
            let mut rng = class_rng(spec.seed, class_pos as u64, 2);
            let fallback_picks = draw_indices(leftovers.len(), shortfall, &mut rng);
            test_split.extend(
                fallback_picks
                    .iter()
                    .map(|i| pools.train[leftovers[*i]].clone()),
            );
        }
    }

    verify_counts(&train_split, &spec.train_counts, "train")?;
    verify_counts(&test_split, &spec.test_counts, "test")?;
    Ok((train_split, test_split))
}

/// Builds the binary train/test splits: the same records as the misuse
/// dataset (both layers see the same traffic), with every attack label
/// collapsed to [`ANOMALY_ATTACK_LABEL`].
pub fn build_anomaly_dataset(
    train_source: &[TrafficRecord],
    test_source: &[TrafficRecord],
    spec: &DatasetSpec,
) -> Result<(Vec<TrafficRecord>, Vec<TrafficRecord>), DatasetError> {
    let (train, test) = build_misuse_dataset(train_source, test_source, spec)?;
    Ok((collapse_labels(train), collapse_labels(test)))
}

fn collapse_labels(records: Vec<TrafficRecord>) -> Vec<TrafficRecord> {
    records
        .into_iter()
        .map(|r| {
            if r.label() == NORMAL_LABEL {
                r
            } else {
                r.with_label(ANOMALY_ATTACK_LABEL)
            }
        })
        .collect()
}

/// Tallies the labels of a built split.
pub fn count_classes(records: &[TrafficRecord]) -> ClassCounts {
    let mut counts = ClassCounts::new();
    for r in records {
        *counts.entry(r.label().to_string()).or_default() += 1;
    }
    counts
}

fn verify_counts(
    records: &[TrafficRecord],
    expected: &ClassCounts,
    role: &'static str,
) -> Result<(), DatasetError> {
    let counts = count_classes(records);
    for (class, want) in expected {
        let found = counts.get(class).copied().unwrap_or(0);
        if found != *want {
            return Err(DatasetError::CountMismatch {
                class: class.clone(),
                role,
                expected: *want,
                found,
            });
        }
    }
    Ok(())
}

/// Header line of a persisted split file: the 41 feature names plus `label`.
pub fn split_header() -> String {
    let mut header = FEATURE_NAMES.join(",");
    header.push_str(",label");
    header
}

/// Writes a built split as a comma-separated file with a one-line header.
pub fn write_split(path: &Path, records: &[TrafficRecord]) -> Result<(), DatasetError> {
    let io_err = |source| DatasetError::Io {
        path: path.display().to_string(),
        source,
    };
    let mut out = Vec::with_capacity(records.len() * 128);
    writeln!(out, "{}", split_header()).map_err(io_err)?;
    for rec in records {
        writeln!(out, "{}", rec.to_split_line()).map_err(io_err)?;
    }
    fs::write(path, out).map_err(io_err)
}

/// Reads a split file written by [`write_split`].
pub fn read_split(path: &Path) -> Result<Vec<TrafficRecord>, DatasetError> {
    let text = fs::read_to_string(path).map_err(|source| DatasetError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let body = match text.split_once('\n') {
        Some((first, rest)) if first.trim_end() == split_header() => rest,
        _ => &text,
    };
    Ok(parse_lines(body)?)
}

/// Build provenance written next to the split files.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetSidecar {
    pub seed: u64,
    /// SHA-256 digest of each source file, keyed by role (train/test).
    pub source_digests: BTreeMap<String, String>,
    pub misuse_train_counts: ClassCounts,
    pub misuse_test_counts: ClassCounts,
    pub anomaly_train_counts: ClassCounts,
    pub anomaly_test_counts: ClassCounts,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nslkdd::synth::{self, SynthSpec};

    fn sources() -> (Vec<TrafficRecord>, Vec<TrafficRecord>) {
        let spec = SynthSpec::default();
        let train = parse_lines(&synth::generate_file(&spec, synth::Role::Train)).unwrap();
        let test = parse_lines(&synth::generate_file(&spec, synth::Role::Test)).unwrap();
        (train, test)
    }

    #[test]
    fn default_spec_matches_the_published_composition() {
        let spec = DatasetSpec::default();
        assert_eq!(spec.train_total(), 5471);
        assert_eq!(spec.test_total(), 4997);
        assert_eq!(spec.train_attack_total(), 1471);
        assert_eq!(spec.test_attack_total(), 997);
        assert_eq!(spec.train_counts["perl"], 3);
        assert_eq!(spec.test_counts["rootkit"], 13);
        assert_eq!(spec.test_counts[NORMAL_LABEL], 4000);
    }

    #[test]
    fn filter_keeps_only_catalog_attacks_in_source_order() {
        let lines = "\
0,tcp,http,SF,1,1,0,0,0,0,0,1,0,0,0,0,0,0,0,0,0,0,2,2,0.00,0.00,0.00,0.00,1.00,0.00,0.00,10,10,1.00,0.00,0.00,0.00,0.00,0.00,0.00,0.00,smurf,19
0,tcp,http,SF,2,1,0,0,0,0,0,1,0,0,0,0,0,0,0,0,0,0,2,2,0.00,0.00,0.00,0.00,1.00,0.00,0.00,10,10,1.00,0.00,0.00,0.00,0.00,0.00,0.00,0.00,normal,21
0,tcp,http,SF,3,1,0,0,0,0,0,1,0,0,0,0,0,0,0,0,0,0,2,2,0.00,0.00,0.00,0.00,1.00,0.00,0.00,10,10,1.00,0.00,0.00,0.00,0.00,0.00,0.00,0.00,ipsweep,15
0,tcp,http,SF,4,1,0,0,0,0,0,1,0,0,0,0,0,0,0,0,0,0,2,2,0.00,0.00,0.00,0.00,1.00,0.00,0.00,10,10,1.00,0.00,0.00,0.00,0.00,0.00,0.00,0.00,smurf,19
";
        let records = parse_lines(lines).unwrap();
        let (by_attack, summary) = filter_attacks(&records, &AttackCatalog::standard());
        assert_eq!(by_attack.len(), 10);
        assert_eq!(by_attack["smurf"].len(), 2);
        // Source order preserved within the bucket.
        assert_eq!(by_attack["smurf"][0].numeric_values()[1], 1.0);
        assert_eq!(by_attack["smurf"][1].numeric_values()[1], 4.0);
        assert!(by_attack["neptune"].is_empty());
        assert_eq!(summary.kept, 2);
        assert_eq!(summary.excluded["normal"], 1);
        assert_eq!(summary.excluded["ipsweep"], 1);
    }

    #[test]
    fn filter_with_no_catalog_attacks_yields_ten_empty_buckets() {
        let (by_attack, summary) = filter_attacks(&[], &AttackCatalog::standard());
        assert_eq!(by_attack.len(), 10);
        assert!(by_attack.values().all(Vec::is_empty));
        assert_eq!(summary.kept, 0);
    }

    #[test]
    fn train_source_covers_every_per_attack_target() {
        let (train_src, _) = sources();
        let (by_attack, _) = filter_attacks(&train_src, &AttackCatalog::standard());
        let spec = DatasetSpec::default();
        for (class, need) in &spec.train_counts {
            if class == NORMAL_LABEL {
                continue;
            }
            let have = by_attack[class].len();
            assert!(
                have >= *need,
                "class {class}: {have} available, {need} needed"
            );
        }
    }

    #[test]
    fn built_split_schema_matches_independent_vocabulary_counts() {
        let (train_src, test_src) = sources();
        let (train, _) =
            build_misuse_dataset(&train_src, &test_src, &DatasetSpec::default()).unwrap();
        let schema = crate::nslkdd::FeatureSchema::fit(&train).unwrap();
        let distinct_services: BTreeSet<&str> = train.iter().map(|r| r.service()).collect();
        assert_eq!(schema.vocabulary(2).unwrap().len(), distinct_services.len());
        let distinct_flags: BTreeSet<&str> = train.iter().map(|r| r.flag()).collect();
        assert_eq!(schema.vocabulary(3).unwrap().len(), distinct_flags.len());
    }

    #[test]
    fn every_built_record_encodes_within_bounds() {
        let (train_src, test_src) = sources();
        let (train, test) =
            build_misuse_dataset(&train_src, &test_src, &DatasetSpec::default()).unwrap();
        let schema = crate::nslkdd::FeatureSchema::fit(&train).unwrap();
        for rec in train.iter().chain(&test) {
            let encoded = schema.encode(rec);
            assert_eq!(encoded.values.len(), schema.encoded_dim());
            assert!(encoded.values.iter().all(|v| (0.0..=1.0).contains(v)));
            assert!(
                encoded.class_index.is_some(),
                "built labels are in the schema"
            );
        }
    }

    #[test]
    fn misuse_build_hits_every_target_count() {
        let (train_src, test_src) = sources();
        let spec = DatasetSpec::default();
        let (train, test) = build_misuse_dataset(&train_src, &test_src, &spec).unwrap();
        assert_eq!(train.len(), 5471);
        assert_eq!(test.len(), 4997);
        assert_eq!(count_classes(&train), spec.train_counts);
        assert_eq!(count_classes(&test), spec.test_counts);
    }

    #[test]
    fn anomaly_build_collapses_attack_labels() {
        let (train_src, test_src) = sources();
        let spec = DatasetSpec::default();
        let (train, test) = build_anomaly_dataset(&train_src, &test_src, &spec).unwrap();
        let train_counts = count_classes(&train);
        let test_counts = count_classes(&test);
        assert_eq!(train_counts[ANOMALY_ATTACK_LABEL], 1471);
        assert_eq!(train_counts[NORMAL_LABEL], 4000);
        assert_eq!(test_counts[ANOMALY_ATTACK_LABEL], 997);
        assert_eq!(test_counts[NORMAL_LABEL], 4000);
    }

    #[test]
    fn anomaly_and_misuse_builds_share_the_same_traffic() {
        let (train_src, test_src) = sources();
        let spec = DatasetSpec::default();
        let (misuse_train, _) = build_misuse_dataset(&train_src, &test_src, &spec).unwrap();
        let (anomaly_train, _) = build_anomaly_dataset(&train_src, &test_src, &spec).unwrap();
        assert_eq!(misuse_train.len(), anomaly_train.len());
        for (m, a) in misuse_train.iter().zip(&anomaly_train) {
            assert_eq!(
                m.to_split_line().rsplit_once(',').unwrap().0,
                a.to_split_line().rsplit_once(',').unwrap().0
            );
        }
    }

    #[test]
    fn same_seed_builds_identical_splits() {
        let (train_src, test_src) = sources();
        let spec = DatasetSpec::default();
        let first = build_misuse_dataset(&train_src, &test_src, &spec).unwrap();
        let second = build_misuse_dataset(&train_src, &test_src, &spec).unwrap();
        assert_eq!(first, second);
    }

    #[test]
    fn different_seeds_draw_different_samples() {
        let (train_src, test_src) = sources();
        let a = build_misuse_dataset(&train_src, &test_src, &DatasetSpec::default()).unwrap();
        let spec_b = DatasetSpec {
            seed: 43,
            ..DatasetSpec::default()
        };
        let b = build_misuse_dataset(&train_src, &test_src, &spec_b).unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn test_shortfall_falls_back_to_unused_train_records() {
        // 12 smurf records, each with a unique src_bytes token, and no test
        // source at all: the test draw must come from train-source leftovers
        // disjoint from the train draw.
        let train_src: Vec<TrafficRecord> = (0..12)
            .map(|i| {
                let line = format!(
                    "0,icmp,ecr_i,SF,{},0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,200,200,0.00,0.00,0.00,0.00,1.00,0.00,0.00,255,255,1.00,0.00,1.00,0.00,0.00,0.00,0.00,0.00,smurf,18",
                    1000 + i
                );
                TrafficRecord::parse_labeled(&line, 1).unwrap()
            })
            .collect();
        let spec = DatasetSpec {
            train_counts: [("smurf".to_string(), 7)].into(),
            test_counts: [("smurf".to_string(), 4)].into(),
            seed: 42,
        };
        let (train, test) = build_misuse_dataset(&train_src, &[], &spec).unwrap();
        assert_eq!((train.len(), test.len()), (7, 4));
        let train_lines: BTreeSet<String> = train.iter().map(|r| r.to_line()).collect();
        for rec in &test {
            assert!(
                !train_lines.contains(&rec.to_line()),
                "test draw reused a training record"
            );
        }
        // One more than the leftovers can supply is an error.
        let mut over = spec.clone();
        over.test_counts.insert("smurf".to_string(), 6);
        assert!(matches!(
            build_misuse_dataset(&train_src, &[], &over),
            Err(DatasetError::InsufficientRecords { role: "test", .. })
        ));
    }

    #[test]
    fn insufficient_records_is_a_hard_error() {
        let (train_src, test_src) = sources();
        let mut spec = DatasetSpec::default();
        spec.train_counts.insert("perl".to_string(), 1_000_000);
        match build_misuse_dataset(&train_src, &test_src, &spec) {
            Err(DatasetError::InsufficientRecords { class, role, .. }) => {
                assert_eq!(class, "perl");
                assert_eq!(role, "train");
            }
            other => panic!("expected insufficient-records error, got {other:?}"),
        }
    }

    #[test]
    fn split_files_round_trip() {
        let (train_src, test_src) = sources();
        let spec = DatasetSpec::default();
        let (_, test) = build_misuse_dataset(&train_src, &test_src, &spec).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("misuse_test.csv");
        write_split(&path, &test).unwrap();
        let reread = read_split(&path).unwrap();
        // Split files carry no difficulty column; everything else round-trips.
        assert_eq!(reread.len(), test.len());
        for (a, b) in reread.iter().zip(&test) {
            assert_eq!(a.to_split_line(), b.to_split_line());
        }
    }
}
