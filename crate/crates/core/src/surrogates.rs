//! Baseline surrogates, the latent-debate surrogate, and the consistency score.

use std::fmt;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::{build_grid, decide, GridError, Topology};
use crate::record::{initial_strength, DebateRecord, Label};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    Random,
    Average,
    Majority,
    TopRight,
    LatentDebate,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Random,
        Method::Average,
        Method::Majority,
        Method::TopRight,
        Method::LatentDebate,
    ];
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// A surrogate's label together with the signed evidence it came from.
/// `label` is `True` iff `score >= 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurrogateVerdict {
    pub method: Method,
    pub label: Label,
    pub score: f64,
}

impl SurrogateVerdict {
    fn from_score(method: Method, score: f64) -> Self {
        Self { method, label: Label::from_sign(score), score }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ConsistencyError {
    #[error("label lists differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("no labels to compare")]
    EmptyInput,
}

/// Initial strengths of every cell, layer-major.
fn taus(record: &DebateRecord) -> impl Iterator<Item = f64> + '_ {
    record
        .p_true
        .iter()
        .flatten()
        .map(|&p| initial_strength(p).expect("validated record"))
}

/// Picks one cell uniformly with a ChaCha8 generator seeded from `seed` and
/// reports that cell's polarity.
pub fn random_baseline(record: &DebateRecord, seed: u64) -> SurrogateVerdict {
    let cells = record.num_layers * record.num_tokens();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pick = rng.gen_range(0..cells);
    let tau = taus(record).nth(pick).expect("pick within grid");
    SurrogateVerdict::from_score(Method::Random, tau)
}

/// Mean initial strength over all cells.
pub fn average_baseline(record: &DebateRecord) -> SurrogateVerdict {
    let (sum, n) = taus(record).fold((0.0, 0usize), |(s, n), t| (s + t, n + 1));
    SurrogateVerdict::from_score(Method::Average, sum / n as f64)
}

/// Vote over cell polarities; ties go to True.
pub fn majority_baseline(record: &DebateRecord) -> SurrogateVerdict {
    let (pos, neg) = taus(record).fold((0i64, 0i64), |(p, n), t| {
        if t >= 0.0 {
            (p + 1, n)
        } else {
            (p, n + 1)
        }
    });
    let score = (pos - neg) as f64 / (pos + neg) as f64;
    SurrogateVerdict::from_score(Method::Majority, score)
}

/// Polarity of the top-right cell, without propagation.
pub fn top_right_baseline(record: &DebateRecord) -> SurrogateVerdict {
    let p = record.p_true_at(record.num_layers, record.num_tokens());
    SurrogateVerdict::from_score(Method::TopRight, initial_strength(p).expect("validated record"))
}

/// Evaluates the debate grid; the score is the top-right final strength.
pub fn latent_debate(
    record: &DebateRecord,
    topology: Topology,
    use_weights: bool,
) -> Result<SurrogateVerdict, GridError> {
    let grid = build_grid(record, topology, use_weights)?;
    let strengths = grid.evaluate();
    let score = strengths.sigma()[grid.top_right()];
    let verdict = SurrogateVerdict { method: Method::LatentDebate, label: decide(&grid, &strengths), score };
    Ok(verdict)
}

/// Fraction of positions where the two label lists agree.
pub fn consistency(surrogate: &[Label], model: &[Label]) -> Result<f64, ConsistencyError> {
    if surrogate.len() != model.len() {
        return Err(ConsistencyError::LengthMismatch(surrogate.len(), model.len()));
    }
    if surrogate.is_empty() {
        return Err(ConsistencyError::EmptyInput);
    }
    let agree = surrogate.iter().zip(model).filter(|(a, b)| a == b).count();
    Ok(agree as f64 / surrogate.len() as f64)
}
