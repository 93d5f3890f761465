use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::record::{is_categorical, TrafficRecord, CATEGORICAL_POSITIONS, FEATURE_COUNT};

#[derive(Debug, Error)]
pub enum SchemaError {
    #[error("cannot fit a schema on an empty train split")]
    EmptyTrain,
    #[error("cannot access schema file {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed schema file: {0}")]
    Format(#[from] serde_json::Error),
}

/// Whether a feature column is numeric or categorical.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureKind {
    Continuous,
    Categorical,
}

impl FeatureKind {
    /// Kind of the feature at the given file position (0-based).
    pub fn at(position: usize) -> FeatureKind {
        if is_categorical(position) {
            FeatureKind::Categorical
        } else {
            FeatureKind::Continuous
        }
    }
}

/// Encoding schema fitted on a train split only: one-hot vocabularies for the
/// three categorical features (lexicographic index order), min/max scaling
/// ranges for the 38 numeric features, and the label vocabulary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSchema {
    /// Sorted vocabulary per categorical feature: protocol_type, service, flag.
    vocabularies: [Vec<String>; 3],
    /// (min, max) observed on the train split, per numeric feature in file order.
    ranges: Vec<(f64, f64)>,
    /// Sorted label vocabulary of the train split.
    classes: Vec<String>,
}

/// A record encoded under a schema: numeric features min-max scaled to
/// [0, 1], categorical features one-hot, laid out in file position order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncodedVector {
    pub values: Vec<f64>,
    /// Index of the record's label in the schema's class list; `None` when
    /// the label is not part of that list (e.g. an attack-named record
    /// encoded under the binary anomaly schema).
    pub class_index: Option<usize>,
}

impl FeatureSchema {
    /// Fits vocabularies, scaling ranges and the class list from a train
    /// split. The schema never sees test data.
    pub fn fit(train: &[TrafficRecord]) -> Result<Self, SchemaError> {
        if train.is_empty() {
            return Err(SchemaError::EmptyTrain);
        }
        let mut vocab_sets: [BTreeSet<String>; 3] = Default::default();
        let mut ranges = vec![(f64::INFINITY, f64::NEG_INFINITY); train[0].numeric_values().len()];
        let mut classes: BTreeSet<String> = BTreeSet::new();
        for rec in train {
            vocab_sets[0].insert(rec.protocol_type().to_string());
            vocab_sets[1].insert(rec.service().to_string());
            vocab_sets[2].insert(rec.flag().to_string());
            for (range, value) in ranges.iter_mut().zip(rec.numeric_values()) {
                range.0 = range.0.min(*value);
                range.1 = range.1.max(*value);
            }
            classes.insert(rec.label().to_string());
        }
        Ok(FeatureSchema {
            vocabularies: vocab_sets.map(|s| s.into_iter().collect()),
            ranges,
            classes: classes.into_iter().collect(),
        })
    }

    /// Length of vectors produced by [`FeatureSchema::encode`].
    pub fn encoded_dim(&self) -> usize {
        self.ranges.len() + self.vocabularies.iter().map(Vec::len).sum::<usize>()
    }

    /// Labels seen in the train split, in stable (lexicographic) order.
    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn class_index(&self, label: &str) -> Option<usize> {
        self.classes
            .binary_search_by(|c| c.as_str().cmp(label))
            .ok()
    }

    /// Vocabulary of the categorical feature at the given file position.
    pub fn vocabulary(&self, position: usize) -> Option<&[String]> {
        CATEGORICAL_POSITIONS
            .iter()
            .position(|p| *p == position)
            .map(|i| self.vocabularies[i].as_slice())
    }

    /// Encodes a record: numeric features scaled to [0, 1] with out-of-range
    /// test values clamped, categorical features one-hot with unseen values
    /// encoding as an all-zero block.
    pub fn encode(&self, rec: &TrafficRecord) -> EncodedVector {
        let mut values = Vec::with_capacity(self.encoded_dim());
        let mut numeric = rec.numeric_values().iter();
        let categorical = [rec.protocol_type(), rec.service(), rec.flag()];
        for position in 0..FEATURE_COUNT {
            if let Some(block) = CATEGORICAL_POSITIONS.iter().position(|p| *p == position) {
                let vocab = &self.vocabularies[block];
                let hit = vocab
                    .binary_search_by(|v| v.as_str().cmp(categorical[block]))
                    .ok();
                values.extend((0..vocab.len()).map(|i| if hit == Some(i) { 1.0 } else { 0.0 }));
            } else {
                let value = *numeric.next().expect("38 numeric features");
                let (min, max) = self.ranges[values_index(position)];
                let scaled = if max > min {
                    ((value - min) / (max - min)).clamp(0.0, 1.0)
                } else {
                    0.0
                };
                values.push(scaled);
            }
        }
        EncodedVector {
            values,
            class_index: self.class_index(rec.label()),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("schema serializes")
    }

    pub fn save(&self, path: &Path) -> Result<(), SchemaError> {
        fs::write(path, self.to_json()).map_err(|source| SchemaError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<Self, SchemaError> {
        let text = fs::read_to_string(path).map_err(|source| SchemaError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Ok(serde_json::from_str(&text)?)
    }
}

/// Index into the numeric-range table for a numeric file position.
fn values_index(position: usize) -> usize {
    position
        - CATEGORICAL_POSITIONS
            .iter()
            .filter(|p| **p < position)
            .count()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(line: &str) -> TrafficRecord {
        TrafficRecord::parse_labeled(line, 1).unwrap()
    }

    fn tiny_train() -> Vec<TrafficRecord> {
        vec![
            rec("0,tcp,http,SF,100,2000,0,0,0,0,0,1,0,0,0,0,0,0,0,0,0,0,2,2,0.00,0.00,0.00,0.00,1.00,0.00,0.00,10,10,1.00,0.00,0.00,0.00,0.00,0.00,0.00,0.00,normal,20"),
            rec("10,udp,domain_u,SF,300,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,4,4,0.00,0.00,0.00,0.00,1.00,0.00,0.00,20,20,1.00,0.00,0.00,0.00,0.00,0.00,0.00,0.00,normal,20"),
            rec("0,tcp,private,S0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,100,10,1.00,1.00,0.00,0.00,0.05,0.07,0.00,255,10,0.04,0.06,0.00,0.00,1.00,1.00,0.00,0.00,neptune,19"),
        ]
    }

    #[test]
    fn single_record_schema_has_degenerate_ranges() {
        let train = tiny_train()[..1].to_vec();
        let schema = FeatureSchema::fit(&train).unwrap();
        let encoded = schema.encode(&train[0]);
        // Every numeric feature has min == max, so every scaled value is 0,
        // and each one-hot block has width 1.
        assert_eq!(schema.encoded_dim(), 38 + 3);
        let one_hot_positions = [1usize, 2, 3]; // protocol, service, flag blocks of width 1
        for (i, v) in encoded.values.iter().enumerate() {
            if one_hot_positions.contains(&i) {
                assert_eq!(*v, 1.0);
            } else {
                assert_eq!(*v, 0.0);
            }
        }
    }

    #[test]
    fn two_protocols_give_a_width_two_block() {
        let schema = FeatureSchema::fit(&tiny_train()).unwrap();
        assert_eq!(schema.vocabulary(1).unwrap(), ["tcp", "udp"]);
        assert_eq!(schema.vocabulary(2).unwrap().len(), 3);
        assert_eq!(schema.encoded_dim(), 38 + 2 + 3 + 2);
    }

    #[test]
    fn scaling_maps_train_extremes_to_unit_interval() {
        let train = tiny_train();
        let schema = FeatureSchema::fit(&train).unwrap();
        // duration ranges over [0, 10]; src_bytes over [0, 300].
        let enc0 = schema.encode(&train[0]);
        let enc1 = schema.encode(&train[1]);
        assert_eq!(enc0.values[0], 0.0); // duration at train min
        assert_eq!(enc1.values[0], 1.0); // duration at train max
        for enc in [&enc0, &enc1] {
            assert!(enc.values.iter().all(|v| (0.0..=1.0).contains(v)));
        }
    }

    #[test]
    fn out_of_range_test_values_clamp() {
        let train = tiny_train();
        let schema = FeatureSchema::fit(&train).unwrap();
        let test = rec("99999,tcp,http,SF,100,2000,0,0,0,0,0,1,0,0,0,0,0,0,0,0,0,0,2,2,0.00,0.00,0.00,0.00,1.00,0.00,0.00,10,10,1.00,0.00,0.00,0.00,0.00,0.00,0.00,0.00,normal,20");
        assert_eq!(schema.encode(&test).values[0], 1.0);
    }

    #[test]
    fn unseen_category_encodes_as_zero_block() {
        let train = tiny_train();
        let schema = FeatureSchema::fit(&train).unwrap();
        let test = rec("0,icmp,http,SF,100,2000,0,0,0,0,0,1,0,0,0,0,0,0,0,0,0,0,2,2,0.00,0.00,0.00,0.00,1.00,0.00,0.00,10,10,1.00,0.00,0.00,0.00,0.00,0.00,0.00,0.00,normal,20");
        let encoded = schema.encode(&test);
        // protocol block is the first two values (tcp, udp); icmp is unseen.
        assert_eq!(&encoded.values[1..3], &[0.0, 0.0]);
        assert_eq!(encoded.values.len(), schema.encoded_dim());
    }

    #[test]
    fn class_indices_follow_sorted_order() {
        let schema = FeatureSchema::fit(&tiny_train()).unwrap();
        assert_eq!(schema.classes(), ["neptune", "normal"]);
        assert_eq!(schema.class_index("neptune"), Some(0));
        assert_eq!(schema.class_index("normal"), Some(1));
        assert_eq!(schema.class_index("smurf"), None);
    }

    #[test]
    fn empty_train_is_rejected() {
        assert!(matches!(
            FeatureSchema::fit(&[]),
            Err(SchemaError::EmptyTrain)
        ));
    }

    #[test]
    fn schema_json_round_trips() {
        let schema = FeatureSchema::fit(&tiny_train()).unwrap();
        let parsed: FeatureSchema = serde_json::from_str(&schema.to_json()).unwrap();
        assert_eq!(parsed, schema);
    }
}
