//! Token × layer debate grid built from a [`DebateRecord`].
//!
//! Every (layer, token) cell becomes one argument. Within a layer, arguments
//! are linked left to right; the right-most argument of each layer then feeds
//! the right-most argument of the next layer up. The top-right argument
//! carries the surrogate's decision.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::qbaf::{self, Argument, ArgumentId, Qbaf, QbafError, StrengthMap};
use crate::record::{initial_strength, DebateRecord, Label, RecordError};

#[derive(Debug, Error)]
pub enum GridError {
    #[error(transparent)]
    Record(#[from] RecordError),
    #[error(transparent)]
    Qbaf(#[from] QbafError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Topology {
    /// Left-to-right chain per layer plus the right-most vertical chain.
    #[default]
    Simple,
    /// Every earlier token linked to every later token within a layer, plus
    /// the right-most vertical chain.
    Quadratic,
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Topology::Simple => "simple",
            Topology::Quadratic => "quadratic",
        })
    }
}

impl FromStr for Topology {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "simple" => Ok(Topology::Simple),
            "quadratic" => Ok(Topology::Quadratic),
            other => Err(format!("unknown topology {other:?} (expected simple or quadratic)")),
        }
    }
}

/// 1-based grid coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Cell {
    pub layer: usize,
    pub token: usize,
}

pub fn cell_id(cell: Cell) -> ArgumentId {
    ArgumentId(format!("L{}T{}", cell.layer, cell.token))
}

/// A built grid. Argument `i` of the graph sits at `cells[i]`; arguments are
/// stored layer-major (layer 1 first, tokens left to right).
#[derive(Debug, Clone)]
pub struct DebateGrid {
    qbaf: Qbaf,
    cells: Vec<Cell>,
    num_layers: usize,
    num_tokens: usize,
}

impl DebateGrid {
    pub fn qbaf(&self) -> &Qbaf {
        &self.qbaf
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn num_layers(&self) -> usize {
        self.num_layers
    }

    pub fn num_tokens(&self) -> usize {
        self.num_tokens
    }

    pub fn index_of(&self, cell: Cell) -> usize {
        (cell.layer - 1) * self.num_tokens + (cell.token - 1)
    }

    pub fn top_right(&self) -> usize {
        self.index_of(Cell { layer: self.num_layers, token: self.num_tokens })
    }

    pub fn evaluate(&self) -> StrengthMap {
        qbaf::evaluate(&self.qbaf)
    }
}

pub fn build_grid(
    record: &DebateRecord,
    topology: Topology,
    use_weights: bool,
) -> Result<DebateGrid, GridError> {
    record.validate()?;
    let (layers, tokens) = (record.num_layers, record.num_tokens());

    let mut cells = Vec::with_capacity(layers * tokens);
    let mut arguments = Vec::with_capacity(layers * tokens);
    for layer in 1..=layers {
        for (t, token) in record.tokens.iter().enumerate() {
            let cell = Cell { layer, token: t + 1 };
            let tau = initial_strength(record.p_true_at(layer, t + 1))?;
            let weight = if use_weights { token.weight } else { 1.0 };
            arguments.push(Argument::new(cell_id(cell), tau, weight)?);
            cells.push(cell);
        }
    }

    let mut links = Vec::new();
    for layer in 1..=layers {
        let at = |token| cell_id(Cell { layer, token });
        match topology {
            Topology::Simple => {
                for n in 1..tokens {
                    links.push((at(n), at(n + 1)));
                }
            }
            Topology::Quadratic => {
                for i in 1..tokens {
                    for j in i + 1..=tokens {
                        links.push((at(i), at(j)));
                    }
                }
            }
        }
    }
    for layer in 1..layers {
        links.push((
            cell_id(Cell { layer, token: tokens }),
            cell_id(Cell { layer: layer + 1, token: tokens }),
        ));
    }

    let qbaf = qbaf::build_qbaf(arguments, links)?;
    Ok(DebateGrid { qbaf, cells, num_layers: layers, num_tokens: tokens })
}

/// True iff the top-right argument's final strength is non-negative.
pub fn decide(grid: &DebateGrid, strengths: &StrengthMap) -> Label {
    Label::from_sign(strengths.sigma()[grid.top_right()])
}
