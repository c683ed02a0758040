//! Corpus-level drivers behind the command-line subcommands.

use std::fmt::Write as _;

use thiserror::Error;

use crate::detector::{self, Dataset, DetectorConfig, DetectorError, DetectorModel, ImportanceReport};
use crate::features::{self, FeatureError, FeatureVector};
use crate::grid::{build_grid, GridError, Topology};
use crate::record::{DebateRecord, Label};
use crate::surrogates::{self, consistency, Method, SurrogateVerdict};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("record {index}: {source}")]
    Grid {
        index: usize,
        #[source]
        source: GridError,
    },
    #[error("record {index}: {source}")]
    Features {
        index: usize,
        #[source]
        source: FeatureError,
    },
    #[error(transparent)]
    Detector(#[from] DetectorError),
    #[error("corpus is empty")]
    EmptyCorpus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridOptions {
    pub topology: Topology,
    pub use_weights: bool,
}

impl Default for GridOptions {
    fn default() -> Self {
        Self { topology: Topology::Simple, use_weights: true }
    }
}

/// Verdicts for one record, in [`Method::ALL`] order.
#[derive(Debug, Clone, PartialEq)]
pub struct RecordVerdicts {
    pub model_prediction: Label,
    pub verdicts: [SurrogateVerdict; 5],
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationReport {
    pub rows: Vec<RecordVerdicts>,
    /// Consistency with the model's own prediction, in [`Method::ALL`] order.
    pub consistency: [f64; 5],
}

impl EvaluationReport {
    pub fn consistency_of(&self, method: Method) -> f64 {
        let k = Method::ALL.iter().position(|&m| m == method).expect("known method");
        self.consistency[k]
    }

    /// Per-record verdict table.
    pub fn verdicts_csv(&self) -> String {
        let mut out = String::from("record,model_prediction");
        for m in Method::ALL {
            write!(out, ",{m}").unwrap();
        }
        out.push_str(",latent_debate_score\n");
        for (i, row) in self.rows.iter().enumerate() {
            write!(out, "{},{}", i + 1, row.model_prediction).unwrap();
            for v in &row.verdicts {
                write!(out, ",{}", v.label).unwrap();
            }
            writeln!(out, ",{:.6}", row.verdicts[4].score).unwrap();
        }
        out
    }

    /// `method,n,consistency` with the fraction to 4 decimals.
    pub fn consistency_csv(&self) -> String {
        let mut out = String::from("method,n,consistency\n");
        for (m, c) in Method::ALL.iter().zip(self.consistency) {
            writeln!(out, "{m},{},{c:.4}", self.rows.len()).unwrap();
        }
        out
    }
}

/// Runs all five surrogates on every record. Record `i` (0-based) draws its
/// Random pick with seed `seed + i`.
pub fn evaluate_corpus(
    records: &[DebateRecord],
    options: GridOptions,
    seed: u64,
) -> Result<EvaluationReport, PipelineError> {
    if records.is_empty() {
        return Err(PipelineError::EmptyCorpus);
    }
    let mut rows = Vec::with_capacity(records.len());
    for (index, record) in records.iter().enumerate() {
        let latent = surrogates::latent_debate(record, options.topology, options.use_weights)
            .map_err(|source| PipelineError::Grid { index: index + 1, source })?;
        rows.push(RecordVerdicts {
            model_prediction: record.model_prediction,
            verdicts: [
                surrogates::random_baseline(record, seed.wrapping_add(index as u64)),
                surrogates::average_baseline(record),
                surrogates::majority_baseline(record),
                surrogates::top_right_baseline(record),
                latent,
            ],
        });
    }
    let predictions: Vec<Label> = rows.iter().map(|r| r.model_prediction).collect();
    let consistency = std::array::from_fn(|k| {
        let labels: Vec<Label> = rows.iter().map(|r| r.verdicts[k].label).collect();
        consistency(&labels, &predictions).expect("equal non-empty lists")
    });
    Ok(EvaluationReport { rows, consistency })
}

pub fn corpus_features(
    records: &[DebateRecord],
    options: GridOptions,
) -> Result<Vec<FeatureVector>, PipelineError> {
    if records.is_empty() {
        return Err(PipelineError::EmptyCorpus);
    }
    records
        .iter()
        .enumerate()
        .map(|(i, record)| {
            let index = i + 1;
            let grid = build_grid(record, options.topology, options.use_weights)
                .map_err(|source| PipelineError::Grid { index, source })?;
            let strengths = grid.evaluate();
            let partition = features::region_partition(record.num_layers)
                .map_err(|source| PipelineError::Features { index, source })?;
            features::extract_features(&grid, &strengths, &partition, record)
                .map_err(|source| PipelineError::Features { index, source })
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: DetectorModel,
    pub train_size: usize,
    pub test_size: usize,
    pub test_auroc: f64,
}

/// Splits, trains on the training half, and scores AUROC on the held-out half.
pub fn train_detector(
    vectors: &[FeatureVector],
    config: &DetectorConfig,
) -> Result<TrainOutcome, PipelineError> {
    let data = Dataset::from_vectors(vectors);
    let (train, test) = detector::split_dataset(&data, config)?;
    let model = detector::train(&train, config)?;
    let scores = test
        .rows()
        .iter()
        .map(|r| model.predict_proba(r))
        .collect::<Result<Vec<_>, _>>()?;
    let test_auroc = detector::auroc(&scores, test.labels())?;
    Ok(TrainOutcome { model, train_size: train.len(), test_size: test.len(), test_auroc })
}

/// Mean |phi| over every vector, with a seeded background drawn from them.
pub fn explain(
    model: &DetectorModel,
    vectors: &[FeatureVector],
    seed: u64,
) -> Result<ImportanceReport, PipelineError> {
    let data = Dataset::from_vectors(vectors);
    if data.is_empty() {
        return Err(DetectorError::EmptyInput.into());
    }
    let background = detector::sample_background(&data, seed);
    Ok(detector::importance_report(model, &data, &background)?)
}
