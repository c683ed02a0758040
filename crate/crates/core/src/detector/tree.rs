use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Dataset, DetectorConfig, DetectorError};

/// Regression tree node. Rows with `x[feature] < threshold` go left.
/// Leaf values are stored already scaled by the learning rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: Box<Node>,
        right: Box<Node>,
    },
    Leaf {
        value: f64,
    },
}

impl Node {
    pub fn predict(&self, x: &[f64]) -> f64 {
        self.predict_with(|f| x[f])
    }

    /// Walks the tree reading features through `lookup`.
    pub fn predict_with(&self, lookup: impl Fn(usize) -> f64) -> f64 {
        let mut node = self;
        loop {
            match node {
                Node::Leaf { value } => return *value,
                Node::Split { feature, threshold, left, right } => {
                    node = if lookup(*feature) < *threshold { left } else { right };
                }
            }
        }
    }

    /// Distinct split features in first-visit (pre-order) order.
    pub fn features(&self) -> Vec<usize> {
        let mut out = Vec::new();
        self.collect_features(&mut out);
        out
    }

    fn collect_features(&self, out: &mut Vec<usize>) {
        if let Node::Split { feature, left, right, .. } = self {
            if !out.contains(feature) {
                out.push(*feature);
            }
            left.collect_features(out);
            right.collect_features(out);
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Node::Leaf { .. } => 0,
            Node::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectorModel {
    pub config: DetectorConfig,
    pub num_features: usize,
    /// Log-odds of the training prevalence.
    pub base_score: f64,
    pub trees: Vec<Node>,
}

impl DetectorModel {
    fn check_dimension(&self, x: &[f64]) -> Result<(), DetectorError> {
        if x.len() != self.num_features {
            return Err(DetectorError::Dimension { expected: self.num_features, got: x.len() });
        }
        Ok(())
    }

    /// Raw score in log-odds.
    pub fn margin(&self, x: &[f64]) -> Result<f64, DetectorError> {
        self.check_dimension(x)?;
        Ok(self.margin_unchecked(x))
    }

    pub(crate) fn margin_unchecked(&self, x: &[f64]) -> f64 {
        self.base_score + self.trees.iter().map(|t| t.predict(x)).sum::<f64>()
    }

    pub fn predict_proba(&self, x: &[f64]) -> Result<f64, DetectorError> {
        self.margin(x).map(sigmoid)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

pub(crate) fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Mean logistic loss of `margins` against `labels`.
pub fn logloss(margins: &[f64], labels: &[u8]) -> f64 {
    let total: f64 = margins
        .iter()
        .zip(labels)
        .map(|(&m, &y)| {
            // log(1 + e^m) - y*m, computed stably
            let softplus = if m > 0.0 { m + (-m).exp().ln_1p() } else { m.exp().ln_1p() };
            softplus - f64::from(y) * m
        })
        .sum();
    total / margins.len() as f64
}

struct Grower<'a> {
    rows: &'a [Vec<f64>],
    grad: &'a [f64],
    hess: &'a [f64],
    features: &'a [usize],
    config: &'a DetectorConfig,
}

struct BestSplit {
    gain: f64,
    feature: usize,
    threshold: f64,
}

impl Grower<'_> {
    fn score(&self, g: f64, h: f64) -> f64 {
        g * g / (h + self.config.l2_reg)
    }

    fn leaf(&self, g: f64, h: f64) -> Node {
        Node::Leaf { value: -g / (h + self.config.l2_reg) * self.config.learning_rate }
    }

    fn find_split(&self, members: &[usize], g_total: f64, h_total: f64) -> Option<BestSplit> {
        let parent = self.score(g_total, h_total);
        let mut best: Option<BestSplit> = None;
        let mut sorted = members.to_vec();
        for &f in self.features {
            sorted.sort_by(|&a, &b| self.rows[a][f].total_cmp(&self.rows[b][f]));
            let (mut gl, mut hl) = (0.0, 0.0);
            for k in 0..sorted.len() - 1 {
                let i = sorted[k];
                gl += self.grad[i];
                hl += self.hess[i];
                let (lo, hi) = (self.rows[i][f], self.rows[sorted[k + 1]][f]);
                if lo == hi {
                    continue;
                }
                let (gr, hr) = (g_total - gl, h_total - hl);
                if hl < self.config.min_child_weight || hr < self.config.min_child_weight {
                    continue;
                }
                let gain = 0.5 * (self.score(gl, hl) + self.score(gr, hr) - parent);
                if gain > 0.0 && best.as_ref().is_none_or(|b| gain > b.gain) {
                    let mut threshold = lo + (hi - lo) / 2.0;
                    if threshold <= lo {
                        threshold = hi;
                    }
                    best = Some(BestSplit { gain, feature: f, threshold });
                }
            }
        }
        best
    }

    fn grow(&self, members: &[usize], depth: usize) -> Node {
        let g: f64 = members.iter().map(|&i| self.grad[i]).sum();
        let h: f64 = members.iter().map(|&i| self.hess[i]).sum();
        if depth >= self.config.max_depth || members.len() < 2 {
            return self.leaf(g, h);
        }
        match self.find_split(members, g, h) {
            None if depth == 0 => Node::Leaf { value: 0.0 },
            None => self.leaf(g, h),
            Some(split) => {
                let (left, right): (Vec<usize>, Vec<usize>) = members
                    .iter()
                    .partition(|&&i| self.rows[i][split.feature] < split.threshold);
                Node::Split {
                    feature: split.feature,
                    threshold: split.threshold,
                    left: Box::new(self.grow(&left, depth + 1)),
                    right: Box::new(self.grow(&right, depth + 1)),
                }
            }
        }
    }
}

fn sample_sorted(rng: &mut ChaCha8Rng, n: usize, ratio: f64) -> Vec<usize> {
    if ratio >= 1.0 {
        return (0..n).collect();
    }
    let k = ((n as f64 * ratio).round() as usize).clamp(1, n);
    let mut picked = index::sample(rng, n, k).into_vec();
    picked.sort_unstable();
    picked
}

/// Fits a boosted ensemble with logistic loss.
///
/// Each round draws a row subsample and a column subsample from a ChaCha8
/// generator seeded by `config.seed`, then grows one tree greedily with
/// second-order gain. A root without any positive-gain split becomes a
/// zero-valued leaf.
pub fn train(data: &Dataset, config: &DetectorConfig) -> Result<DetectorModel, DetectorError> {
    config.validate()?;
    if data.is_empty() {
        return Err(DetectorError::EmptyInput);
    }
    let labels = data.labels();
    let positives = labels.iter().filter(|&&y| y == 1).count();
    if positives == 0 || positives == labels.len() {
        return Err(DetectorError::SingleClass);
    }
    let prevalence = positives as f64 / labels.len() as f64;
    let base_score = (prevalence / (1.0 - prevalence)).ln();

    let n = data.len();
    let mut margins = vec![base_score; n];
    let mut grad = vec![0.0; n];
    let mut hess = vec![0.0; n];
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut trees = Vec::with_capacity(config.num_trees);

    for _ in 0..config.num_trees {
        for i in 0..n {
            let p = sigmoid(margins[i]);
            grad[i] = p - f64::from(labels[i]);
            hess[i] = (p * (1.0 - p)).max(1e-16);
        }
        let members = sample_sorted(&mut rng, n, config.subsample);
        let features = sample_sorted(&mut rng, data.num_features(), config.colsample_per_tree);
        let grower = Grower { rows: data.rows(), grad: &grad, hess: &hess, features: &features, config };
        let tree = grower.grow(&members, 0);
        for (m, row) in margins.iter_mut().zip(data.rows()) {
            *m += tree.predict(row);
        }
        trees.push(tree);
    }

    Ok(DetectorModel { config: config.clone(), num_features: data.num_features(), base_score, trees })
}
