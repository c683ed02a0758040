use serde::{Deserialize, Serialize};

use super::DetectorError;

/// Boosting hyperparameters. Defaults reproduce the reference setup: 100
/// trees of depth 2, learning rate 0.03, 0.8 row and column subsampling,
/// seed 42, and a 50/50 train/test split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectorConfig {
    pub num_trees: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
    pub subsample: f64,
    pub colsample_per_tree: f64,
    pub seed: u64,
    /// L2 penalty on leaf weights.
    pub l2_reg: f64,
    /// Minimum hessian sum in each child of a split.
    pub min_child_weight: f64,
    pub train_fraction: f64,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            num_trees: 100,
            max_depth: 2,
            learning_rate: 0.03,
            subsample: 0.8,
            colsample_per_tree: 0.8,
            seed: 42,
            l2_reg: 1.0,
            min_child_weight: 1.0,
            train_fraction: 0.5,
        }
    }
}

impl DetectorConfig {
    pub fn validate(&self) -> Result<(), DetectorError> {
        let bad = |msg: &str| Err(DetectorError::InvalidConfig(msg.to_owned()));
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return bad("learning_rate must lie in (0, 1]");
        }
        if !(self.subsample > 0.0 && self.subsample <= 1.0) {
            return bad("subsample must lie in (0, 1]");
        }
        if !(self.colsample_per_tree > 0.0 && self.colsample_per_tree <= 1.0) {
            return bad("colsample_per_tree must lie in (0, 1]");
        }
        if self.max_depth < 1 {
            return bad("max_depth must be at least 1");
        }
        if self.l2_reg.is_nan() || self.l2_reg < 0.0 {
            return bad("l2_reg must be non-negative");
        }
        if self.min_child_weight.is_nan() || self.min_child_weight < 0.0 {
            return bad("min_child_weight must be non-negative");
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return bad("train_fraction must lie in (0, 1)");
        }
        Ok(())
    }
}
