//! NSL-KDD traffic records, attack extraction, dataset construction and
//! feature encoding.

mod catalog;
mod dataset;
mod record;
mod schema;
pub mod synth;

pub use catalog::{AttackCatalog, AttackCategory};
pub use dataset::{
    build_anomaly_dataset, build_misuse_dataset, count_classes, filter_attacks, read_split,
    split_header, write_split, ClassCounts, DatasetError, DatasetSidecar, DatasetSpec,
    FilterSummary, ANOMALY_ATTACK_LABEL, NORMAL_LABEL,
};
pub use record::{
    parse_file, ParseError, TrafficRecord, CATEGORICAL_POSITIONS, FEATURE_COUNT, FEATURE_NAMES,
    NUMERIC_FEATURE_COUNT,
};
pub use schema::{EncodedVector, FeatureKind, FeatureSchema, SchemaError};
