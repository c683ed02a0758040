//! Debate-pattern features per layer region.
//!
//! Layers are split into lower, middle and upper thirds. For each region we
//! report the number of attack links whose target lies in the region and the
//! mean and population variance of initial and final strengths over every
//! argument in the region.

use std::fmt::Write as _;
use std::ops::Range;

use thiserror::Error;

use crate::grid::DebateGrid;
use crate::qbaf::{EdgeLabel, StrengthMap};
use crate::record::DebateRecord;

pub const REGIONS: [&str; 3] = ["lower", "middle", "upper"];
pub const STATS: [&str; 5] = ["NumAtk", "AvgInit", "AvgFin", "VarInit", "VarFin"];
pub const NUM_FEATURES: usize = REGIONS.len() * STATS.len();

#[derive(Debug, Error, PartialEq)]
pub enum FeatureError {
    #[error("need at least 3 layers to form regions, got {0}")]
    TooFewLayers(usize),
    #[error("region {0} contains no arguments")]
    EmptyRegion(&'static str),
    #[error("no feature vectors")]
    EmptyInput,
    #[error("csv line {line}: {message}")]
    Csv { line: usize, message: String },
}

/// Column names in table order: region-major, then statistic.
pub fn feature_names() -> Vec<String> {
    REGIONS
        .iter()
        .flat_map(|r| STATS.iter().map(move |s| format!("{r}_{s}")))
        .collect()
}

/// Contiguous half-open ranges of 1-based layer indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegionPartition {
    pub lower: Range<usize>,
    pub middle: Range<usize>,
    pub upper: Range<usize>,
}

impl RegionPartition {
    pub fn regions(&self) -> [&Range<usize>; 3] {
        [&self.lower, &self.middle, &self.upper]
    }

    pub fn region_of(&self, layer: usize) -> Option<usize> {
        self.regions().iter().position(|r| r.contains(&layer))
    }

    pub fn sizes(&self) -> [usize; 3] {
        self.regions().map(|r| r.len())
    }
}

/// Cuts at `floor(n/3)` and `floor(2n/3)`; the remainder falls to upper.
pub fn region_partition(num_layers: usize) -> Result<RegionPartition, FeatureError> {
    if num_layers < 3 {
        return Err(FeatureError::TooFewLayers(num_layers));
    }
    let a = 1 + num_layers / 3;
    let b = 1 + 2 * num_layers / 3;
    Ok(RegionPartition { lower: 1..a, middle: a..b, upper: b..num_layers + 1 })
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RegionStats {
    pub num_atk: f64,
    pub avg_init: f64,
    pub avg_fin: f64,
    pub var_init: f64,
    pub var_fin: f64,
}

impl RegionStats {
    fn as_array(&self) -> [f64; 5] {
        [self.num_atk, self.avg_init, self.avg_fin, self.var_init, self.var_fin]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub regions: [RegionStats; 3],
    /// 1 when the model's prediction disagrees with the gold label.
    pub hallucination_label: u8,
}

impl FeatureVector {
    pub fn values(&self) -> [f64; NUM_FEATURES] {
        let mut out = [0.0; NUM_FEATURES];
        for (r, stats) in self.regions.iter().enumerate() {
            out[r * 5..r * 5 + 5].copy_from_slice(&stats.as_array());
        }
        out
    }

    pub fn from_values(values: &[f64], hallucination_label: u8) -> Self {
        assert_eq!(values.len(), NUM_FEATURES);
        let region = |r: usize| {
            let v = &values[r * 5..r * 5 + 5];
            RegionStats { num_atk: v[0], avg_init: v[1], avg_fin: v[2], var_init: v[3], var_fin: v[4] }
        };
        Self { regions: [region(0), region(1), region(2)], hallucination_label }
    }
}

fn mean_and_variance(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var)
}

pub fn extract_features(
    grid: &DebateGrid,
    strengths: &StrengthMap,
    partition: &RegionPartition,
    record: &DebateRecord,
) -> Result<FeatureVector, FeatureError> {
    let qbaf = grid.qbaf();
    let region_of_arg: Vec<Option<usize>> =
        grid.cells().iter().map(|c| partition.region_of(c.layer)).collect();

    let mut init: [Vec<f64>; 3] = Default::default();
    let mut fin: [Vec<f64>; 3] = Default::default();
    for (i, arg) in qbaf.arguments().iter().enumerate() {
        if let Some(r) = region_of_arg[i] {
            init[r].push(arg.tau());
            fin[r].push(strengths.sigma()[i]);
        }
    }

    let mut attacks = [0usize; 3];
    for (&(_, target), label) in qbaf.links().iter().zip(strengths.edge_labels()) {
        if *label == EdgeLabel::Attack {
            if let Some(r) = region_of_arg[target] {
                attacks[r] += 1;
            }
        }
    }

    let mut regions = [RegionStats::default(); 3];
    for r in 0..3 {
        if init[r].is_empty() {
            return Err(FeatureError::EmptyRegion(REGIONS[r]));
        }
        let (avg_init, var_init) = mean_and_variance(&init[r]);
        let (avg_fin, var_fin) = mean_and_variance(&fin[r]);
        regions[r] = RegionStats { num_atk: attacks[r] as f64, avg_init, avg_fin, var_init, var_fin };
    }
    Ok(FeatureVector { regions, hallucination_label: u8::from(record.is_hallucination()) })
}

pub fn csv_header() -> String {
    let mut names = feature_names();
    names.push("label".into());
    names.join(",")
}

/// Header then one row per vector. Numbers use the shortest representation
/// that parses back to the same `f64`.
pub fn export_table(vectors: &[FeatureVector]) -> Result<String, FeatureError> {
    if vectors.is_empty() {
        return Err(FeatureError::EmptyInput);
    }
    let mut out = csv_header();
    out.push('\n');
    for v in vectors {
        for x in v.values() {
            write!(out, "{x},").expect("write to string");
        }
        writeln!(out, "{}", v.hallucination_label).expect("write to string");
    }
    Ok(out)
}

pub fn parse_table(text: &str) -> Result<Vec<FeatureVector>, FeatureError> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or(FeatureError::EmptyInput)?;
    if header.trim() != csv_header() {
        return Err(FeatureError::Csv { line: 1, message: "unexpected header".into() });
    }
    let mut out = Vec::new();
    for (i, line) in lines {
        let err = |message: String| FeatureError::Csv { line: i + 1, message };
        let fields: Vec<&str> = line.trim().split(',').collect();
        if fields.len() != NUM_FEATURES + 1 {
            return Err(err(format!("expected {} columns, got {}", NUM_FEATURES + 1, fields.len())));
        }
        let values = fields[..NUM_FEATURES]
            .iter()
            .map(|f| f.parse::<f64>().map_err(|e| err(format!("{f:?}: {e}"))))
            .collect::<Result<Vec<_>, _>>()?;
        let label = match fields[NUM_FEATURES] {
            "0" => 0,
            "1" => 1,
            other => return Err(err(format!("label must be 0 or 1, got {other:?}"))),
        };
        out.push(FeatureVector::from_values(&values, label));
    }
    if out.is_empty() {
        return Err(FeatureError::EmptyInput);
    }
    Ok(out)
}
