//! Shared fixtures and independent oracles for the integration suites.
#![allow(dead_code)]

use std::collections::HashMap;

use latent_debate::detector::DetectorModel;
use latent_debate::features::FeatureVector;
use latent_debate::record::{DebateRecord, Label, Token};
use latent_debate::{build_qbaf, Argument, ArgumentId, Qbaf};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Map;

pub const MIDDLE_VAR_INIT: usize = 8;

pub fn record(p_true: Vec<Vec<f64>>, weights: &[f64], gold: Label, prediction: Label) -> DebateRecord {
    DebateRecord {
        claim: "synthetic claim".into(),
        gold_label: gold,
        model_prediction: prediction,
        tokens: weights
            .iter()
            .enumerate()
            .map(|(i, &w)| Token { text: format!("tok{i}"), weight: w })
            .collect(),
        num_layers: p_true.len(),
        p_true,
        metadata: Map::new(),
    }
}

pub fn random_record(rng: &mut impl Rng, max_tokens: usize, max_layers: usize) -> DebateRecord {
    let tokens = rng.gen_range(1..=max_tokens);
    let layers = rng.gen_range(1..=max_layers);
    let p_true = (0..layers).map(|_| (0..tokens).map(|_| rng.gen::<f64>()).collect()).collect();
    let weights: Vec<f64> = (0..tokens).map(|_| rng.gen::<f64>()).collect();
    let label = |b: bool| if b { Label::True } else { Label::False };
    record(p_true, &weights, label(rng.gen()), label(rng.gen()))
}

/// Random acyclic graph: links only go from earlier to later positions of a
/// random permutation, and ids are shuffled so id order is unrelated to it.
pub type Nodes = Vec<(String, f64, f64)>;
pub type Links = Vec<(String, String)>;

pub fn random_qbaf(rng: &mut impl Rng, max_nodes: usize) -> (Nodes, Links) {
    let n = rng.gen_range(1..=max_nodes);
    let mut ids: Vec<String> = (0..n).map(|i| format!("arg{i}")).collect();
    ids.shuffle(rng);
    let nodes: Vec<(String, f64, f64)> = ids
        .iter()
        .map(|id| (id.clone(), rng.gen_range(-1.0..=1.0), rng.gen_range(0.0..=1.0)))
        .collect();
    let mut links = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(0.4) {
                links.push((ids[i].clone(), ids[j].clone()));
            }
        }
    }
    (nodes, links)
}

pub fn to_qbaf(nodes: &[(String, f64, f64)], links: &[(String, String)]) -> Qbaf {
    let args = nodes
        .iter()
        .map(|(id, tau, w)| Argument::new(id.as_str(), *tau, *w).unwrap())
        .collect();
    let links = links
        .iter()
        .map(|(s, d)| (ArgumentId::from(s.as_str()), ArgumentId::from(d.as_str())));
    build_qbaf(args, links).unwrap()
}

/// Memoized recursion straight from the definition, independent of the
/// library's ordering and aggregation code.
pub fn recursive_strengths(
    nodes: &[(String, f64, f64)],
    links: &[(String, String)],
) -> HashMap<String, f64> {
    fn sigma(
        id: &str,
        nodes: &HashMap<&str, (f64, f64)>,
        links: &[(String, String)],
        memo: &mut HashMap<String, f64>,
    ) -> f64 {
        if let Some(&s) = memo.get(id) {
            return s;
        }
        let energy: f64 = links
            .iter()
            .filter(|(_, d)| d == id)
            .map(|(s, _)| sigma(s, nodes, links, memo))
            .sum();
        let (tau, w) = nodes[id];
        let s = energy.tanh() + w * tau * (1.0 - energy.abs().tanh());
        memo.insert(id.to_owned(), s);
        s
    }
    let table: HashMap<&str, (f64, f64)> =
        nodes.iter().map(|(id, t, w)| (id.as_str(), (*t, *w))).collect();
    let mut memo = HashMap::new();
    for (id, _, _) in nodes {
        sigma(id, &table, links, &mut memo);
    }
    memo
}

/// Fraction of (positive, negative) pairs ranked correctly, ties counting 1/2.
pub fn pairwise_auroc(scores: &[f64], labels: &[u8]) -> f64 {
    let mut wins = 0.0;
    let mut pairs = 0.0;
    for (i, &li) in labels.iter().enumerate() {
        if li != 1 {
            continue;
        }
        for (j, &lj) in labels.iter().enumerate() {
            if lj != 0 {
                continue;
            }
            pairs += 1.0;
            if scores[i] > scores[j] {
                wins += 1.0;
            } else if scores[i] == scores[j] {
                wins += 0.5;
            }
        }
    }
    wins / pairs
}

/// Interventional Shapley by enumerating every coalition of every feature.
pub fn exhaustive_shapley(model: &DetectorModel, x: &[f64], background: &[Vec<f64>]) -> Vec<f64> {
    let d = x.len();
    let value = |mask: usize| -> f64 {
        background
            .iter()
            .map(|b| {
                let hybrid: Vec<f64> =
                    (0..d).map(|f| if mask & (1 << f) != 0 { x[f] } else { b[f] }).collect();
                model.margin(&hybrid).unwrap()
            })
            .sum::<f64>()
            / background.len() as f64
    };
    let values: Vec<f64> = (0..1usize << d).map(value).collect();
    let fact = |n: usize| (1..=n).map(|k| k as f64).product::<f64>();
    (0..d)
        .map(|i| {
            (0..1usize << d)
                .filter(|m| m & (1 << i) == 0)
                .map(|m| {
                    let s = m.count_ones() as usize;
                    fact(s) * fact(d - s - 1) / fact(d) * (values[m | (1 << i)] - values[m])
                })
                .sum()
        })
        .collect()
}

/// 15 features of plausible ranges; label is 1 iff middle_VarInit exceeds its
/// median, then each label flips with probability 0.1. Everything else is noise.
pub fn injected_signal(n: usize, seed: u64) -> Vec<FeatureVector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows: Vec<[f64; 15]> = (0..n)
        .map(|_| {
            std::array::from_fn(|k| match k % 5 {
                0 => rng.gen_range(0..20) as f64,
                1 | 2 => rng.gen_range(-1.0..1.0),
                _ => rng.gen_range(0.0..1.0),
            })
        })
        .collect();
    let mut signal: Vec<f64> = rows.iter().map(|r| r[MIDDLE_VAR_INIT]).collect();
    signal.sort_by(f64::total_cmp);
    let median = (signal[(n - 1) / 2] + signal[n / 2]) / 2.0;
    rows.iter()
        .map(|r| {
            let clean = r[MIDDLE_VAR_INIT] > median;
            let flipped = rng.gen_bool(0.1);
            FeatureVector::from_values(r, u8::from(clean != flipped))
        })
        .collect()
}

/// Labels independent of the features.
pub fn pure_noise(n: usize, seed: u64) -> Vec<FeatureVector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let row: Vec<f64> = (0..15).map(|_| rng.gen::<f64>()).collect();
            FeatureVector::from_values(&row, u8::from(rng.gen_bool(0.5)))
        })
        .collect()
}
