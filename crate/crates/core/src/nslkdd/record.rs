use std::fs;
use std::path::Path;

use thiserror::Error;

/// Names of the 41 connection features, in file order.
pub const FEATURE_NAMES: [&str; 41] = [
    "duration",
    "protocol_type",
    "service",
    "flag",
    "src_bytes",
    "dst_bytes",
    "land",
    "wrong_fragment",
    "urgent",
    "hot",
    "num_failed_logins",
    "logged_in",
    "num_compromised",
    "root_shell",
    "su_attempted",
    "num_root",
    "num_file_creations",
    "num_shells",
    "num_access_files",
    "num_outbound_cmds",
    "is_host_login",
    "is_guest_login",
    "count",
    "srv_count",
    "serror_rate",
    "srv_serror_rate",
    "rerror_rate",
    "srv_rerror_rate",
    "same_srv_rate",
    "diff_srv_rate",
    "srv_diff_host_rate",
    "dst_host_count",
    "dst_host_srv_count",
    "dst_host_same_srv_rate",
    "dst_host_diff_srv_rate",
    "dst_host_same_src_port_rate",
    "dst_host_srv_diff_host_rate",
    "dst_host_serror_rate",
    "dst_host_srv_serror_rate",
    "dst_host_rerror_rate",
    "dst_host_srv_rerror_rate",
];

/// Total feature columns per record.
pub const FEATURE_COUNT: usize = 41;

/// Positions of the three categorical features: protocol_type, service, flag.
pub const CATEGORICAL_POSITIONS: [usize; 3] = [1, 2, 3];

/// Number of numeric feature columns.
pub const NUMERIC_FEATURE_COUNT: usize = FEATURE_COUNT - CATEGORICAL_POSITIONS.len();

pub(crate) fn is_categorical(position: usize) -> bool {
    CATEGORICAL_POSITIONS.contains(&position)
}

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: expected {expected} comma-separated fields, found {found}")]
    FieldCount {
        line: usize,
        expected: &'static str,
        found: usize,
    },
    #[error("line {line}: field {field} ({name}) is not numeric: {token:?}")]
    NumericField {
        line: usize,
        field: usize,
        name: &'static str,
        token: String,
    },
    #[error("line {line}: difficulty is not an integer: {token:?}")]
    Difficulty { line: usize, token: String },
}

/// One NSL-KDD connection record: 41 features, a label, and the difficulty
/// score that NSL-KDD lines carry (retained but unused).
#[derive(Debug, Clone, PartialEq)]
pub struct TrafficRecord {
    /// The 41 raw feature tokens exactly as read, comma-joined.
    feature_csv: Box<str>,
    /// Parsed values of the 38 numeric features, in file order.
    numeric: Box<[f64]>,
    label: Box<str>,
    difficulty: Option<u32>,
}

impl TrafficRecord {
    /// Parses a line of the form `f1,...,f41,label[,difficulty]`.
    pub fn parse_labeled(line: &str, line_no: usize) -> Result<Self, ParseError> {
        let fields: Vec<&str> = line.trim_end_matches(['\r', '\n']).split(',').collect();
        if fields.len() != FEATURE_COUNT + 1 && fields.len() != FEATURE_COUNT + 2 {
            return Err(ParseError::FieldCount {
                line: line_no,
                expected: "42 or 43",
                found: fields.len(),
            });
        }
        let difficulty = match fields.get(FEATURE_COUNT + 1) {
            Some(token) => {
                Some(
                    token
                        .trim()
                        .parse::<u32>()
                        .map_err(|_| ParseError::Difficulty {
                            line: line_no,
                            token: token.to_string(),
                        })?,
                )
            }
            None => None,
        };
        Self::from_fields(
            &fields[..FEATURE_COUNT],
            fields[FEATURE_COUNT],
            difficulty,
            line_no,
        )
    }

    /// Parses a line holding only the 41 feature fields; the label is left
    /// empty. Lines with a trailing label (and difficulty) are also accepted.
    pub fn parse_flexible(line: &str, line_no: usize) -> Result<Self, ParseError> {
        let fields: Vec<&str> = line.trim_end_matches(['\r', '\n']).split(',').collect();
        if fields.len() == FEATURE_COUNT {
            Self::from_fields(&fields, "", None, line_no)
        } else {
            Self::parse_labeled(line, line_no)
        }
    }

    fn from_fields(
        features: &[&str],
        label: &str,
        difficulty: Option<u32>,
        line_no: usize,
    ) -> Result<Self, ParseError> {
        debug_assert_eq!(features.len(), FEATURE_COUNT);
        let mut numeric = Vec::with_capacity(NUMERIC_FEATURE_COUNT);
        for (position, token) in features.iter().enumerate() {
            if is_categorical(position) {
                continue;
            }
            let value = token
                .trim()
                .parse::<f64>()
                .map_err(|_| ParseError::NumericField {
                    line: line_no,
                    field: position + 1,
                    name: FEATURE_NAMES[position],
                    token: token.to_string(),
                })?;
            numeric.push(value);
        }
        Ok(TrafficRecord {
            feature_csv: features.join(",").into_boxed_str(),
            numeric: numeric.into_boxed_slice(),
            label: label.into(),
            difficulty,
        })
    }

    /// The 41 raw feature tokens in file order.
    pub fn feature_tokens(&self) -> impl Iterator<Item = &str> {
        self.feature_csv.split(',')
    }

    fn token_at(&self, position: usize) -> &str {
        self.feature_tokens().nth(position).expect("41 tokens")
    }

    pub fn protocol_type(&self) -> &str {
        self.token_at(1)
    }

    pub fn service(&self) -> &str {
        self.token_at(2)
    }

    pub fn flag(&self) -> &str {
        self.token_at(3)
    }

    /// The 38 numeric feature values, in file order.
    pub fn numeric_values(&self) -> &[f64] {
        &self.numeric
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn difficulty(&self) -> Option<u32> {
        self.difficulty
    }

    /// Returns a copy of this record carrying a different label.
    pub fn with_label(&self, label: &str) -> Self {
        TrafficRecord {
            feature_csv: self.feature_csv.clone(),
            numeric: self.numeric.clone(),
            label: label.into(),
            difficulty: self.difficulty,
        }
    }

    /// Re-serializes the record as a source-file line: the original feature
    /// tokens, the label, and the difficulty when present.
    pub fn to_line(&self) -> String {
        match self.difficulty {
            Some(d) => format!("{},{},{}", self.feature_csv, self.label, d),
            None => format!("{},{}", self.feature_csv, self.label),
        }
    }

    /// Like [`TrafficRecord::to_line`] but always without the difficulty
    /// column; the format used by built split files.
    pub fn to_split_line(&self) -> String {
        format!("{},{}", self.feature_csv, self.label)
    }
}

/// Parses an NSL-KDD file into records, one per non-empty line, in file
/// order.
pub fn parse_file(path: &Path) -> Result<Vec<TrafficRecord>, ParseError> {
    let text = fs::read_to_string(path).map_err(|source| ParseError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_lines(&text)
}

pub(crate) fn parse_lines(text: &str) -> Result<Vec<TrafficRecord>, ParseError> {
    let mut records = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        records.push(TrafficRecord::parse_labeled(line, idx + 1)?);
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;

    // A KDDTrain+-style line: 41 features, label, difficulty.
    pub(crate) const SAMPLE_LINE: &str = "0,tcp,http,SF,215,45076,0,0,0,0,0,1,0,0,0,0,0,0,0,0,0,0,1,1,0.00,0.00,0.00,0.00,1.00,0.00,0.00,0,0,0.00,0.00,0.00,0.00,0.00,0.00,0.00,0.00,normal,21";

    #[test]
    fn parses_a_labeled_line() {
        let rec = TrafficRecord::parse_labeled(SAMPLE_LINE, 1).unwrap();
        assert_eq!(rec.label(), "normal");
        assert_eq!(rec.difficulty(), Some(21));
        assert_eq!(rec.protocol_type(), "tcp");
        assert_eq!(rec.service(), "http");
        assert_eq!(rec.flag(), "SF");
        assert_eq!(rec.numeric_values().len(), NUMERIC_FEATURE_COUNT);
        assert_eq!(rec.numeric_values()[1], 215.0); // src_bytes
        assert_eq!(rec.feature_tokens().count(), FEATURE_COUNT);
    }

    #[test]
    fn line_without_difficulty_parses() {
        let line = SAMPLE_LINE.rsplit_once(',').unwrap().0;
        let rec = TrafficRecord::parse_labeled(line, 1).unwrap();
        assert_eq!(rec.label(), "normal");
        assert_eq!(rec.difficulty(), None);
    }

    #[test]
    fn empty_input_yields_no_records() {
        assert!(parse_lines("").unwrap().is_empty());
        assert!(parse_lines("\n\n").unwrap().is_empty());
    }

    #[test]
    fn missing_file_is_an_io_error() {
        let err = parse_file(Path::new("/nonexistent/KDDTrain+.txt")).unwrap_err();
        assert!(matches!(err, ParseError::Io { .. }), "{err}");
    }

    #[test]
    fn short_line_reports_field_count_and_line_number() {
        let text = format!("{SAMPLE_LINE}\n1,tcp,http,SF\n");
        match parse_lines(&text) {
            Err(ParseError::FieldCount { line, found, .. }) => {
                assert_eq!(line, 2);
                assert_eq!(found, 4);
            }
            other => panic!("expected field-count error, got {other:?}"),
        }
    }

    #[test]
    fn non_numeric_token_in_numeric_position_is_an_error() {
        let bad = SAMPLE_LINE.replacen("215", "oops", 1);
        match TrafficRecord::parse_labeled(&bad, 7) {
            Err(ParseError::NumericField {
                line, name, token, ..
            }) => {
                assert_eq!(line, 7);
                assert_eq!(name, "src_bytes");
                assert_eq!(token, "oops");
            }
            other => panic!("expected numeric-field error, got {other:?}"),
        }
    }

    #[test]
    fn round_trips_back_to_the_source_line() {
        let rec = TrafficRecord::parse_labeled(SAMPLE_LINE, 1).unwrap();
        assert_eq!(rec.to_line(), SAMPLE_LINE);
    }

    #[test]
    fn relabel_keeps_features_and_difficulty() {
        let rec = TrafficRecord::parse_labeled(SAMPLE_LINE, 1).unwrap();
        let relabeled = rec.with_label("attack");
        assert_eq!(relabeled.label(), "attack");
        assert_eq!(relabeled.difficulty(), rec.difficulty());
        assert_eq!(
            relabeled.to_split_line(),
            SAMPLE_LINE.replace(",normal,21", ",attack")
        );
    }

    #[test]
    fn parse_flexible_accepts_feature_only_lines() {
        let features_only = SAMPLE_LINE.rsplitn(3, ',').nth(2).unwrap();
        let rec = TrafficRecord::parse_flexible(features_only, 1).unwrap();
        assert_eq!(rec.label(), "");
        assert_eq!(rec.feature_tokens().count(), FEATURE_COUNT);
    }
}
