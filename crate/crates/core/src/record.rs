//! `DebateRecord` ingestion: one claim's per-layer, per-token truth
//! probabilities as produced by the extractor.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

pub const SCHEMA_VERSION: u64 = 1;

#[derive(Debug, Error)]
pub enum RecordError {
    #[error("schema error: {0}")]
    Schema(String),
    #[error("shape error: {0}")]
    Shape(String),
    #[error("range error: {0}")]
    Range(String),
    #[error("line {line}: {source}")]
    AtLine {
        line: usize,
        #[source]
        source: Box<RecordError>,
    },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Binary truth value used for gold labels, model predictions, and verdicts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label {
    True,
    False,
}

impl Label {
    /// Zero counts as `True`.
    pub fn from_sign(x: f64) -> Self {
        if x >= 0.0 {
            Label::True
        } else {
            Label::False
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Label::True => "True",
            Label::False => "False",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Token {
    pub text: String,
    pub weight: f64,
}

/// Validated extraction record. `p_true[l][n]` is P(True) at layer `l + 1`,
/// token `n + 1`; layers ascend from the first transformer layer.
#[derive(Debug, Clone, PartialEq)]
pub struct DebateRecord {
    pub claim: String,
    pub gold_label: Label,
    pub model_prediction: Label,
    pub tokens: Vec<Token>,
    pub num_layers: usize,
    pub p_true: Vec<Vec<f64>>,
    pub metadata: Map<String, Value>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRecord {
    schema_version: u64,
    claim: String,
    gold_label: Label,
    model_prediction: Label,
    tokens: Vec<Token>,
    num_layers: usize,
    p_true: Vec<Vec<f64>>,
    metadata: Map<String, Value>,
}

#[derive(Serialize)]
struct RawRecordRef<'a> {
    schema_version: u64,
    claim: &'a str,
    gold_label: Label,
    model_prediction: Label,
    tokens: &'a [Token],
    num_layers: usize,
    p_true: &'a [Vec<f64>],
    metadata: &'a Map<String, Value>,
}

impl DebateRecord {
    pub fn num_tokens(&self) -> usize {
        self.tokens.len()
    }

    /// Probability of True at 1-based `(layer, token)`.
    pub fn p_true_at(&self, layer: usize, token: usize) -> f64 {
        self.p_true[layer - 1][token - 1]
    }

    pub fn is_hallucination(&self) -> bool {
        self.model_prediction != self.gold_label
    }

    pub fn validate(&self) -> Result<(), RecordError> {
        if self.num_layers < 1 {
            return Err(RecordError::Shape("num_layers must be at least 1".into()));
        }
        if self.tokens.is_empty() {
            return Err(RecordError::Shape("tokens must be non-empty".into()));
        }
        if self.p_true.len() != self.num_layers {
            return Err(RecordError::Shape(format!(
                "p_true has {} rows but num_layers = {}",
                self.p_true.len(),
                self.num_layers
            )));
        }
        for (l, row) in self.p_true.iter().enumerate() {
            if row.len() != self.tokens.len() {
                return Err(RecordError::Shape(format!(
                    "p_true row {} has {} entries but there are {} tokens",
                    l + 1,
                    row.len(),
                    self.tokens.len()
                )));
            }
            if let Some((n, p)) = row.iter().enumerate().find(|(_, p)| !(0.0..=1.0).contains(*p)) {
                return Err(RecordError::Range(format!(
                    "p_true[{}][{}] = {p} is outside [0, 1]",
                    l + 1,
                    n + 1
                )));
            }
        }
        if let Some(t) = self.tokens.iter().find(|t| !(0.0..=1.0).contains(&t.weight)) {
            return Err(RecordError::Range(format!(
                "weight of token {:?} = {} is outside [0, 1]",
                t.text, t.weight
            )));
        }
        Ok(())
    }

    /// Serializes to a single-line JSON document in schema key order.
    pub fn to_json(&self) -> String {
        let raw = RawRecordRef {
            schema_version: SCHEMA_VERSION,
            claim: &self.claim,
            gold_label: self.gold_label,
            model_prediction: self.model_prediction,
            tokens: &self.tokens,
            num_layers: self.num_layers,
            p_true: &self.p_true,
            metadata: &self.metadata,
        };
        serde_json::to_string(&raw).expect("record serializes")
    }
}

/// Parses and validates one JSON record document.
pub fn parse_record(document: &[u8]) -> Result<DebateRecord, RecordError> {
    let raw: RawRecord =
        serde_json::from_slice(document).map_err(|e| RecordError::Schema(e.to_string()))?;
    if raw.schema_version != SCHEMA_VERSION {
        return Err(RecordError::Schema(format!(
            "unsupported schema_version {} (expected {SCHEMA_VERSION})",
            raw.schema_version
        )));
    }
    let record = DebateRecord {
        claim: raw.claim,
        gold_label: raw.gold_label,
        model_prediction: raw.model_prediction,
        tokens: raw.tokens,
        num_layers: raw.num_layers,
        p_true: raw.p_true,
        metadata: raw.metadata,
    };
    record.validate()?;
    Ok(record)
}

/// Parses a JSON-lines corpus. Blank lines are skipped; errors carry the
/// 1-based line number.
pub fn parse_corpus(text: &str) -> Result<Vec<DebateRecord>, RecordError> {
    text.lines()
        .enumerate()
        .filter(|(_, line)| !line.trim().is_empty())
        .map(|(i, line)| {
            parse_record(line.as_bytes()).map_err(|e| RecordError::AtLine {
                line: i + 1,
                source: Box::new(e),
            })
        })
        .collect()
}

/// Reads either a single JSON record document or a JSON-lines corpus.
pub fn read_records(path: &Path) -> Result<Vec<DebateRecord>, RecordError> {
    let text = std::fs::read_to_string(path).map_err(|source| RecordError::Io {
        path: path.display().to_string(),
        source,
    })?;
    // a pretty-printed single record parses as one value; JSON-lines does not
    if serde_json::from_str::<Value>(&text).is_ok() {
        return parse_record(text.as_bytes()).map(|r| vec![r]);
    }
    parse_corpus(&text)
}

/// Maps P(True) to an initial strength: `2p - 1`.
pub fn initial_strength(p: f64) -> Result<f64, RecordError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(RecordError::Range(format!("probability {p} is outside [0, 1]")));
    }
    Ok(2.0 * p - 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(num_layers: usize, p_true: &str) -> String {
        format!(
            r#"{{"schema_version":1,"claim":"Paris is in France.","gold_label":"True","model_prediction":"True","tokens":[{{"text":":","weight":0.5}},{{"text":" True","weight":1.0}}],"num_layers":{num_layers},"p_true":{p_true},"metadata":{{"model":"test"}}}}"#
        )
    }

    #[test]
    fn parses_well_formed_record() {
        let r = parse_record(doc(3, "[[0.1,0.2],[0.3,0.4],[0.5,0.6]]").as_bytes()).unwrap();
        assert_eq!(r.num_layers * r.num_tokens(), 6);
        assert_eq!(r.p_true_at(3, 2), 0.6);
        assert!(!r.is_hallucination());
    }

    #[test]
    fn rejects_out_of_range_probability() {
        let err = parse_record(doc(3, "[[0.1,1.2],[0.3,0.4],[0.5,0.6]]").as_bytes()).unwrap_err();
        assert!(matches!(err, RecordError::Range(_)), "{err}");
    }

    #[test]
    fn rejects_row_count_mismatch() {
        let err = parse_record(doc(4, "[[0.1,0.2],[0.3,0.4],[0.5,0.6]]").as_bytes()).unwrap_err();
        assert!(matches!(err, RecordError::Shape(_)), "{err}");
        let err = parse_record(doc(3, "[[0.1],[0.3,0.4],[0.5,0.6]]").as_bytes()).unwrap_err();
        assert!(matches!(err, RecordError::Shape(_)), "{err}");
    }

    #[test]
    fn rejects_schema_violations() {
        let err = parse_record(br#"{"claim":"x"}"#).unwrap_err();
        assert!(matches!(err, RecordError::Schema(_)));
        let bad_label = doc(1, "[[0.1,0.2]]").replace("\"gold_label\":\"True\"", "\"gold_label\":\"yes\"");
        assert!(matches!(parse_record(bad_label.as_bytes()).unwrap_err(), RecordError::Schema(_)));
        let bad_version = doc(1, "[[0.1,0.2]]").replace("\"schema_version\":1", "\"schema_version\":2");
        assert!(matches!(parse_record(bad_version.as_bytes()).unwrap_err(), RecordError::Schema(_)));
    }

    #[test]
    fn corpus_errors_carry_line_numbers() {
        let text = format!("{}\n\n{}\n", doc(1, "[[0.1,0.2]]"), doc(1, "[[0.1,7.0]]"));
        match parse_corpus(&text).unwrap_err() {
            RecordError::AtLine { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn json_round_trip() {
        let r = parse_record(doc(3, "[[0.1,0.2],[0.3,0.4],[0.5,0.6]]").as_bytes()).unwrap();
        assert_eq!(parse_record(r.to_json().as_bytes()).unwrap(), r);
    }

    #[test]
    fn initial_strength_examples() {
        assert_eq!(initial_strength(0.5).unwrap(), 0.0);
        assert_eq!(initial_strength(1.0).unwrap(), 1.0);
        assert!((initial_strength(0.675).unwrap() - 0.35).abs() < 1e-15);
        assert!(initial_strength(-0.01).is_err());
    }
}
