//! Acyclic quantitative bipolar argumentation frameworks and their
//! probabilistic gradual semantics.
//!
//! Links are stored unlabeled. Whether a link attacks or supports its target
//! is a function of strengths, so labels are derived after evaluation by
//! [`classify_edges`].
//!
//! Final strengths follow an aggregation step (energy = sum of the parents'
//! final strengths) and an influence step:
//!
//! ```text
//! sigma = tanh(E) + w * tau * (1 - tanh(|E|))
//! ```

use std::collections::{BTreeMap, BinaryHeap, HashMap};
use std::cmp::Reverse;
use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Opaque argument identifier, unique within one [`Qbaf`].
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ArgumentId(pub String);

impl ArgumentId {
    pub fn new(id: impl Into<String>) -> Self {
        Self(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ArgumentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for ArgumentId {
    fn from(s: &str) -> Self {
        Self(s.to_owned())
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QbafError {
    #[error("link graph contains a cycle through argument {0}")]
    Cycle(ArgumentId),
    #[error("duplicate argument id {0}")]
    DuplicateId(ArgumentId),
    #[error("{field} of argument {id} is {value}, outside [{min}, {max}]")]
    Range {
        id: ArgumentId,
        field: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },
    #[error("link references unknown argument {0}")]
    UnknownArgument(ArgumentId),
    #[error("self-link on argument {0}")]
    SelfLink(ArgumentId),
    #[error("duplicate link {0} -> {1}")]
    DuplicateLink(ArgumentId, ArgumentId),
    #[error("parent {parent} of {target} has no strength yet")]
    MissingParentStrength { target: ArgumentId, parent: ArgumentId },
    #[error("evaluation order is not a topological order of the graph")]
    InvalidOrder,
}

/// A single argument: an initial strength in [-1, 1] and a token weight in [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct Argument {
    id: ArgumentId,
    tau: f64,
    weight: f64,
}

impl Argument {
    pub fn new(id: impl Into<ArgumentId>, tau: f64, weight: f64) -> Result<Self, QbafError> {
        let id = id.into();
        if !(-1.0..=1.0).contains(&tau) {
            return Err(QbafError::Range { id, field: "tau", value: tau, min: -1.0, max: 1.0 });
        }
        if !(0.0..=1.0).contains(&weight) {
            return Err(QbafError::Range { id, field: "weight", value: weight, min: 0.0, max: 1.0 });
        }
        Ok(Self { id, tau, weight })
    }

    pub fn id(&self) -> &ArgumentId {
        &self.id
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }
}

impl From<String> for ArgumentId {
    fn from(s: String) -> Self {
        Self(s)
    }
}

/// Validated acyclic argument graph.
///
/// Arguments are addressed by their insertion index; `parents[i]` lists the
/// sources of every link into argument `i`, sorted ascending so that energy
/// sums are independent of evaluation order.
#[derive(Debug, Clone)]
pub struct Qbaf {
    arguments: Vec<Argument>,
    links: Vec<(usize, usize)>,
    parents: Vec<Vec<usize>>,
    index: HashMap<ArgumentId, usize>,
    order: Vec<usize>,
}

impl Qbaf {
    pub fn arguments(&self) -> &[Argument] {
        &self.arguments
    }

    /// Links as `(source, target)` argument indices, in construction order.
    pub fn links(&self) -> &[(usize, usize)] {
        &self.links
    }

    pub fn parents(&self, target: usize) -> &[usize] {
        &self.parents[target]
    }

    pub fn index_of(&self, id: &ArgumentId) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn len(&self) -> usize {
        self.arguments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arguments.is_empty()
    }

    /// Kahn order with ties broken by ascending argument id.
    pub fn topological_order(&self) -> &[usize] {
        &self.order
    }

    /// Checks that `order` is a permutation of the arguments in which every
    /// link's source precedes its target.
    pub fn is_topological_order(&self, order: &[usize]) -> bool {
        if order.len() != self.len() {
            return false;
        }
        let mut position = vec![usize::MAX; self.len()];
        for (pos, &i) in order.iter().enumerate() {
            if i >= self.len() || position[i] != usize::MAX {
                return false;
            }
            position[i] = pos;
        }
        self.links.iter().all(|&(s, t)| position[s] < position[t])
    }
}

/// Validates arguments and links and computes a deterministic topological order.
pub fn build_qbaf<I>(arguments: Vec<Argument>, links: I) -> Result<Qbaf, QbafError>
where
    I: IntoIterator<Item = (ArgumentId, ArgumentId)>,
{
    let mut index = HashMap::with_capacity(arguments.len());
    for (i, arg) in arguments.iter().enumerate() {
        if index.insert(arg.id.clone(), i).is_some() {
            return Err(QbafError::DuplicateId(arg.id.clone()));
        }
    }

    let n = arguments.len();
    let mut parents = vec![Vec::new(); n];
    let mut children = vec![Vec::new(); n];
    let mut resolved = Vec::new();
    for (src, dst) in links {
        let s = *index.get(&src).ok_or_else(|| QbafError::UnknownArgument(src.clone()))?;
        let t = *index.get(&dst).ok_or_else(|| QbafError::UnknownArgument(dst.clone()))?;
        if s == t {
            return Err(QbafError::SelfLink(src));
        }
        if parents[t].contains(&s) {
            return Err(QbafError::DuplicateLink(src, dst));
        }
        parents[t].push(s);
        children[s].push(t);
        resolved.push((s, t));
    }
    for p in &mut parents {
        p.sort_unstable();
    }

    let order = kahn_order(&arguments, &parents, &children)?;
    Ok(Qbaf { arguments, links: resolved, parents, index, order })
}

fn kahn_order(
    arguments: &[Argument],
    parents: &[Vec<usize>],
    children: &[Vec<usize>],
) -> Result<Vec<usize>, QbafError> {
    let mut indegree: Vec<usize> = parents.iter().map(Vec::len).collect();
    let mut ready: BinaryHeap<Reverse<(&ArgumentId, usize)>> = indegree
        .iter()
        .enumerate()
        .filter(|(_, &d)| d == 0)
        .map(|(i, _)| Reverse((&arguments[i].id, i)))
        .collect();
    let mut order = Vec::with_capacity(arguments.len());
    while let Some(Reverse((_, i))) = ready.pop() {
        order.push(i);
        for &c in &children[i] {
            indegree[c] -= 1;
            if indegree[c] == 0 {
                ready.push(Reverse((&arguments[c].id, c)));
            }
        }
    }
    if order.len() != arguments.len() {
        let stuck = indegree.iter().position(|&d| d > 0).expect("unprocessed node");
        return Err(QbafError::Cycle(arguments[stuck].id.clone()));
    }
    Ok(order)
}

/// Sum of the final strengths of every parent of `target`.
///
/// `sigma_so_far` is indexed by argument; parents must already be `Some`.
pub fn aggregate_energy(
    qbaf: &Qbaf,
    target: usize,
    sigma_so_far: &[Option<f64>],
) -> Result<f64, QbafError> {
    qbaf.parents[target].iter().try_fold(0.0, |acc, &p| {
        sigma_so_far
            .get(p)
            .copied()
            .flatten()
            .map(|s| acc + s)
            .ok_or_else(|| QbafError::MissingParentStrength {
                target: qbaf.arguments[target].id.clone(),
                parent: qbaf.arguments[p].id.clone(),
            })
    })
}

/// Influence step. Monotone non-decreasing in `energy`, closed on [-1, 1].
pub fn influence(energy: f64, tau: f64, weight: f64) -> f64 {
    energy.tanh() + weight * tau * (1.0 - energy.abs().tanh())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EdgeLabel {
    Attack,
    Support,
}

impl fmt::Display for EdgeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EdgeLabel::Attack => "attack",
            EdgeLabel::Support => "support",
        })
    }
}

/// Zero counts as positive.
pub fn is_positive(x: f64) -> bool {
    x >= 0.0
}

/// Final strengths (indexed like [`Qbaf::arguments`]) and one label per link
/// (indexed like [`Qbaf::links`]).
#[derive(Debug, Clone, PartialEq)]
pub struct StrengthMap {
    sigma: Vec<f64>,
    edge_labels: Vec<EdgeLabel>,
}

impl StrengthMap {
    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    pub fn edge_labels(&self) -> &[EdgeLabel] {
        &self.edge_labels
    }

    pub fn get(&self, qbaf: &Qbaf, id: &ArgumentId) -> Option<f64> {
        qbaf.index_of(id).map(|i| self.sigma[i])
    }

    /// Strengths keyed by argument id.
    pub fn by_id(&self, qbaf: &Qbaf) -> BTreeMap<ArgumentId, f64> {
        qbaf.arguments
            .iter()
            .zip(&self.sigma)
            .map(|(a, &s)| (a.id.clone(), s))
            .collect()
    }

    pub fn attack_count(&self) -> usize {
        self.edge_labels.iter().filter(|&&l| l == EdgeLabel::Attack).count()
    }
}

/// Labels each link by comparing the source's final strength with the
/// target's initial strength: differing polarity is an attack.
pub fn classify_edges(qbaf: &Qbaf, sigma: &[f64]) -> Vec<EdgeLabel> {
    qbaf.links
        .iter()
        .map(|&(s, t)| {
            if is_positive(sigma[s]) == is_positive(qbaf.arguments[t].tau) {
                EdgeLabel::Support
            } else {
                EdgeLabel::Attack
            }
        })
        .collect()
}

/// Evaluates final strengths in the graph's canonical topological order.
pub fn evaluate(qbaf: &Qbaf) -> StrengthMap {
    evaluate_in_order(qbaf, &qbaf.order).expect("canonical order is topological")
}

/// Evaluates final strengths visiting arguments in `order`, which must be a
/// topological order of `qbaf`.
pub fn evaluate_in_order(qbaf: &Qbaf, order: &[usize]) -> Result<StrengthMap, QbafError> {
    if !qbaf.is_topological_order(order) {
        return Err(QbafError::InvalidOrder);
    }
    let mut partial = vec![None; qbaf.len()];
    for &i in order {
        let energy = aggregate_energy(qbaf, i, &partial)?;
        let arg = &qbaf.arguments[i];
        partial[i] = Some(influence(energy, arg.tau, arg.weight));
    }
    let sigma: Vec<f64> = partial.into_iter().map(|s| s.expect("visited")).collect();
    let edge_labels = classify_edges(qbaf, &sigma);
    Ok(StrengthMap { sigma, edge_labels })
}

fn push_number(out: &mut String, x: f64) {
    if x == 0.0 {
        // keep the sign of negative zero out of the dump
        out.push_str("0.0000000000000000e0");
    } else {
        write!(out, "{x:.16e}").expect("write to string");
    }
}

fn push_json_string(out: &mut String, s: &str) {
    out.push_str(&serde_json::to_string(s).expect("string serializes"));
}

/// Debug dump of a graph and its strengths as JSON.
///
/// Keys appear in a fixed order and every number carries 17 significant digits.
pub fn dump_json(qbaf: &Qbaf, strengths: &StrengthMap) -> String {
    let mut out = String::from("{\"arguments\":[");
    for (i, arg) in qbaf.arguments.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str("{\"id\":");
        push_json_string(&mut out, arg.id.as_str());
        out.push_str(",\"tau\":");
        push_number(&mut out, arg.tau);
        out.push_str(",\"weight\":");
        push_number(&mut out, arg.weight);
        out.push_str(",\"sigma\":");
        push_number(&mut out, strengths.sigma[i]);
        out.push('}');
    }
    out.push_str("],\"links\":[");
    for (k, (&(s, t), label)) in qbaf.links.iter().zip(&strengths.edge_labels).enumerate() {
        if k > 0 {
            out.push(',');
        }
        out.push_str("{\"src\":");
        push_json_string(&mut out, qbaf.arguments[s].id.as_str());
        out.push_str(",\"dst\":");
        push_json_string(&mut out, qbaf.arguments[t].id.as_str());
        write!(out, ",\"label\":\"{label}\"}}").expect("write to string");
    }
    out.push_str("]}");
    out
}
