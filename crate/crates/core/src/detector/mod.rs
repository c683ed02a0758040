//! Hallucination detector: second-order gradient-boosted depth-limited trees
//! on logistic loss, rank-based AUROC, and exact interventional Shapley
//! attributions.

mod config;
mod metrics;
mod shap;
mod tree;

pub use config::DetectorConfig;
pub use metrics::auroc;
pub use shap::{importance_report, sample_background, shapley, Attribution, ImportanceReport, MAX_EXACT_FEATURES};
pub use tree::{logloss, train, DetectorModel, Node};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::features::FeatureVector;

#[derive(Debug, Error, PartialEq)]
pub enum DetectorError {
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("labels contain a single class")]
    SingleClass,
    #[error("expected {expected} features, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("{0} features exceed the exact Shapley enumeration bound")]
    TooManyFeatures(usize),
    #[error("background set is empty")]
    EmptyBackground,
    #[error("empty input")]
    EmptyInput,
    #[error("invalid detector config: {0}")]
    InvalidConfig(String),
    #[error("scores and labels differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("label must be 0 or 1, got {0}")]
    BadLabel(u8),
}

/// Feature rows with binary labels; every row has the same width.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    rows: Vec<Vec<f64>>,
    labels: Vec<u8>,
    num_features: usize,
}

impl Dataset {
    pub fn new(rows: Vec<Vec<f64>>, labels: Vec<u8>) -> Result<Self, DetectorError> {
        if rows.len() != labels.len() {
            return Err(DetectorError::LengthMismatch(rows.len(), labels.len()));
        }
        let num_features = rows.first().map_or(0, Vec::len);
        if let Some(r) = rows.iter().find(|r| r.len() != num_features) {
            return Err(DetectorError::Dimension { expected: num_features, got: r.len() });
        }
        if let Some(&l) = labels.iter().find(|&&l| l > 1) {
            return Err(DetectorError::BadLabel(l));
        }
        Ok(Self { rows, labels, num_features })
    }

    pub fn from_vectors(vectors: &[FeatureVector]) -> Self {
        let rows = vectors.iter().map(|v| v.values().to_vec()).collect();
        let labels = vectors.iter().map(|v| v.hallucination_label).collect();
        Self::new(rows, labels).expect("feature vectors have a fixed width")
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn num_features(&self) -> usize {
        self.num_features
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn subset(&self, indices: &[usize]) -> Self {
        Self {
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            num_features: self.num_features,
        }
    }
}

/// Seeded shuffle, then the first `floor(n * train_fraction)` rows train.
pub fn split_dataset(
    data: &Dataset,
    config: &DetectorConfig,
) -> Result<(Dataset, Dataset), DetectorError> {
    if data.len() < 4 {
        return Err(DetectorError::TooFewSamples { needed: 4, got: data.len() });
    }
    config.validate()?;
    let mut order: Vec<usize> = (0..data.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(config.seed));
    let n_train = (data.len() as f64 * config.train_fraction).floor() as usize;
    let (train, test) = order.split_at(n_train);
    Ok((data.subset(train), data.subset(test)))
}
