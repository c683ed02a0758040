//! Latent debate: a structured surrogate for a language model's true/false
//! decisions.
//!
//! Per-layer, per-token truth probabilities become arguments in an acyclic
//! quantitative bipolar argumentation framework laid out as a token × layer
//! grid. Evaluating the grid under a tanh-based gradual semantics yields a
//! verdict at the top-right argument, and statistics of the evaluated grid
//! feed a boosted-tree hallucination detector.

pub mod detector;
pub mod features;
pub mod grid;
pub mod pipeline;
pub mod qbaf;
pub mod record;
pub mod render;
pub mod surrogates;

pub use grid::{build_grid, decide, DebateGrid, Topology};
pub use qbaf::{build_qbaf, evaluate, influence, Argument, ArgumentId, EdgeLabel, Qbaf, StrengthMap};
pub use record::{parse_record, DebateRecord, Label};
