//! Exact interventional Shapley values on the raw margin (log-odds) scale.
//!
//! The coalition value is `v(S) = mean_b margin(x_S, b_rest)` over a background
//! set. The margin is a sum of trees and each tree reads only its own split
//! features, so the Shapley value of the ensemble is the sum over trees and
//! background rows of the Shapley value of a game on that tree's features
//! alone. Enumerating coalitions per tree is therefore exact.

use std::fmt::Write as _;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::tree::{DetectorModel, Node};
use super::{Dataset, DetectorError};
use crate::features::{NUM_FEATURES, REGIONS, STATS};

pub const MAX_EXACT_FEATURES: usize = 20;
const MAX_BACKGROUND: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct Attribution {
    /// One value per feature.
    pub phi: Vec<f64>,
    /// Mean margin over the background set.
    pub baseline: f64,
    /// Margin of the explained instance.
    pub margin: f64,
}

/// Draws `min(64, n)` distinct rows with a ChaCha8 generator seeded by `seed`.
pub fn sample_background(data: &Dataset, seed: u64) -> Vec<Vec<f64>> {
    let k = data.len().min(MAX_BACKGROUND);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked = index::sample(&mut rng, data.len(), k).into_vec();
    picked.sort_unstable();
    picked.into_iter().map(|i| data.rows()[i].clone()).collect()
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Shapley weights `|S|! (k - |S| - 1)! / k!` indexed by `|S|`.
fn coalition_weights(k: usize) -> Vec<f64> {
    (0..k).map(|s| factorial(s) * factorial(k - s - 1) / factorial(k)).collect()
}

/// Adds one tree's contribution for a single background row into `phi`.
fn tree_contribution(tree: &Node, x: &[f64], b: &[f64], phi: &mut [f64], scratch: &mut Vec<f64>) {
    let used = tree.features();
    let k = used.len();
    if k == 0 || used.iter().all(|&f| x[f] == b[f]) {
        return;
    }
    scratch.clear();
    for mask in 0u32..(1 << k) {
        let value = tree.predict_with(|f| {
            let j = used.iter().position(|&u| u == f).expect("split feature is in use list");
            if mask & (1 << j) != 0 {
                x[f]
            } else {
                b[f]
            }
        });
        scratch.push(value);
    }
    let weights = coalition_weights(k);
    for (j, &feature) in used.iter().enumerate() {
        let bit = 1u32 << j;
        let mut total = 0.0;
        for mask in 0u32..(1 << k) {
            if mask & bit == 0 {
                let size = mask.count_ones() as usize;
                total += weights[size] * (scratch[(mask | bit) as usize] - scratch[mask as usize]);
            }
        }
        phi[feature] += total;
    }
}

pub fn shapley(
    model: &DetectorModel,
    x: &[f64],
    background: &[Vec<f64>],
) -> Result<Attribution, DetectorError> {
    if model.num_features > MAX_EXACT_FEATURES {
        return Err(DetectorError::TooManyFeatures(model.num_features));
    }
    if background.is_empty() {
        return Err(DetectorError::EmptyBackground);
    }
    let margin = model.margin(x)?;
    let mut baseline = 0.0;
    for b in background {
        baseline += model.margin(b)?;
    }
    baseline /= background.len() as f64;

    let mut phi = vec![0.0; model.num_features];
    let mut scratch = Vec::new();
    for b in background {
        for tree in &model.trees {
            tree_contribution(tree, x, b, &mut phi, &mut scratch);
        }
    }
    let scale = background.len() as f64;
    for p in &mut phi {
        *p /= scale;
    }
    Ok(Attribution { phi, baseline, margin })
}

/// Mean |phi| per feature over a dataset, with per-statistic and per-region
/// totals.
#[derive(Debug, Clone, PartialEq)]
pub struct ImportanceReport {
    /// Indexed like the feature table columns (region-major).
    pub mean_abs_phi: Vec<f64>,
}

impl ImportanceReport {
    /// Feature indices, most important first. Ties keep column order.
    pub fn ranking(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.mean_abs_phi.len()).collect();
        order.sort_by(|&a, &b| self.mean_abs_phi[b].total_cmp(&self.mean_abs_phi[a]));
        order
    }

    /// Sum over regions for each statistic.
    pub fn by_statistic(&self) -> [f64; 5] {
        std::array::from_fn(|s| (0..3).map(|r| self.mean_abs_phi[r * 5 + s]).sum())
    }

    /// Sum over statistics for each region.
    pub fn by_region(&self) -> [f64; 3] {
        std::array::from_fn(|r| self.mean_abs_phi[r * 5..r * 5 + 5].iter().sum())
    }

    /// `feature,region,mean_abs_phi`: the 15 per-region rows, then one
    /// `<stat>,all` row per statistic and one `all,<region>` row per region.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("feature,region,mean_abs_phi\n");
        for (r, region) in REGIONS.iter().enumerate() {
            for (s, stat) in STATS.iter().enumerate() {
                writeln!(out, "{stat},{region},{:.10}", self.mean_abs_phi[r * 5 + s]).unwrap();
            }
        }
        for (stat, v) in STATS.iter().zip(self.by_statistic()) {
            writeln!(out, "{stat},all,{v:.10}").unwrap();
        }
        for (region, v) in REGIONS.iter().zip(self.by_region()) {
            writeln!(out, "all,{region},{v:.10}").unwrap();
        }
        out
    }
}

/// Mean absolute Shapley value of each feature over every row of `data`.
pub fn importance_report(
    model: &DetectorModel,
    data: &Dataset,
    background: &[Vec<f64>],
) -> Result<ImportanceReport, DetectorError> {
    if data.is_empty() {
        return Err(DetectorError::EmptyInput);
    }
    if model.num_features != NUM_FEATURES {
        return Err(DetectorError::Dimension { expected: NUM_FEATURES, got: model.num_features });
    }
    let mut sums = vec![0.0; NUM_FEATURES];
    for row in data.rows() {
        let attribution = shapley(model, row, background)?;
        for (s, p) in sums.iter_mut().zip(&attribution.phi) {
            *s += p.abs();
        }
    }
    let n = data.len() as f64;
    Ok(ImportanceReport { mean_abs_phi: sums.into_iter().map(|s| s / n).collect() })
}
