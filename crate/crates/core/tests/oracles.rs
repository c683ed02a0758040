mod common;

use common::*;
use latent_debate::detector::{self, shapley, Dataset, DetectorConfig};
use latent_debate::grid::{build_grid, Topology};
use latent_debate::qbaf::evaluate;
use latent_debate::record::Label;
use latent_debate::surrogates::{average_baseline, majority_baseline};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn evaluate_matches_recursive_definition() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..300 {
        let (nodes, links) = random_qbaf(&mut rng, 8);
        let q = to_qbaf(&nodes, &links);
        let expected = recursive_strengths(&nodes, &links);
        let got = evaluate(&q).by_id(&q);
        for (id, s) in got {
            assert!((s - expected[id.as_str()]).abs() <= 1e-12);
        }
    }
}

#[test]
fn hand_counted_grid_links() {
    let simple = record(vec![vec![0.5; 2]; 3], &[1.0; 2], Label::True, Label::True);
    let g = build_grid(&simple, Topology::Simple, true).unwrap();
    // per layer 1 horizontal link (3 total) + 2 vertical
    assert_eq!(g.qbaf().links().len(), 3 + 2);

    let quad = record(vec![vec![0.5; 3]; 2], &[1.0; 3], Label::True, Label::True);
    let g = build_grid(&quad, Topology::Quadratic, true).unwrap();
    let names: Vec<(String, String)> = g
        .qbaf()
        .links()
        .iter()
        .map(|&(s, t)| {
            let a = g.qbaf().arguments();
            (a[s].id().to_string(), a[t].id().to_string())
        })
        .collect();
    let expected = [
        ("L1T1", "L1T2"),
        ("L1T1", "L1T3"),
        ("L1T2", "L1T3"),
        ("L2T1", "L2T2"),
        ("L2T1", "L2T3"),
        ("L2T2", "L2T3"),
        ("L1T3", "L2T3"),
    ];
    assert_eq!(names.len(), expected.len());
    for (got, want) in names.iter().zip(expected) {
        assert_eq!((got.0.as_str(), got.1.as_str()), want);
    }
}

#[test]
fn baselines_match_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..300 {
        let r = random_record(&mut rng, 5, 6);
        let mut sum = 0.0;
        let mut count = 0usize;
        let (mut pos, mut neg) = (0i64, 0i64);
        for l in 0..r.num_layers {
            for t in 0..r.num_tokens() {
                let tau = 2.0 * r.p_true[l][t] - 1.0;
                sum += tau;
                count += 1;
                if tau >= 0.0 {
                    pos += 1;
                } else {
                    neg += 1;
                }
            }
        }
        assert_eq!(average_baseline(&r).score, sum / count as f64);
        assert_eq!(majority_baseline(&r).score, (pos - neg) as f64 / count as f64);
        assert_eq!(majority_baseline(&r).label == Label::True, pos >= neg);
    }
}

#[test]
fn auroc_matches_pairwise_count() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..300 {
        let n = rng.gen_range(2..60);
        // coarse scores force plenty of ties
        let scores: Vec<f64> = (0..n).map(|_| rng.gen_range(0..8) as f64 / 8.0).collect();
        let mut labels: Vec<u8> = (0..n).map(|_| rng.gen_range(0..2)).collect();
        labels[0] = 0;
        labels[1] = 1;
        let got = detector::auroc(&scores, &labels).unwrap();
        assert!((got - pairwise_auroc(&scores, &labels)).abs() <= 1e-12);
    }
    // the stated example by hand: pairs (0.8,0.6) (0.8,0.2) (0.4,0.6) (0.4,0.2) -> 3 of 4
    assert_eq!(pairwise_auroc(&[0.8, 0.6, 0.4, 0.2], &[1, 0, 1, 0]), 0.75);
}

#[test]
fn per_tree_shapley_matches_full_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let d = 6;
    let rows: Vec<Vec<f64>> = (0..120).map(|_| (0..d).map(|_| rng.gen::<f64>()).collect()).collect();
    let labels: Vec<u8> = rows.iter().map(|r| u8::from(r[0] + 0.5 * r[3] > 0.8 || rng.gen_bool(0.1))).collect();
    let data = Dataset::new(rows, labels).unwrap();
    let config = DetectorConfig { num_trees: 15, max_depth: 3, ..DetectorConfig::default() };
    let model = detector::train(&data, &config).unwrap();
    let background = detector::sample_background(&data, 1).into_iter().take(10).collect::<Vec<_>>();
    for x in data.rows().iter().take(10) {
        let fast = shapley(&model, x, &background).unwrap();
        let slow = exhaustive_shapley(&model, x, &background);
        for (a, b) in fast.phi.iter().zip(&slow) {
            assert!((a - b).abs() <= 1e-12, "{a} vs {b}");
        }
    }
}

#[test]
fn pure_noise_auroc_near_chance() {
    let vectors = pure_noise(200, 42);
    let data = Dataset::from_vectors(&vectors);
    let config = DetectorConfig::default();
    let (train, test) = detector::split_dataset(&data, &config).unwrap();
    let model = detector::train(&train, &config).unwrap();
    let scores: Vec<f64> = test.rows().iter().map(|r| model.predict_proba(r).unwrap()).collect();
    let auc = detector::auroc(&scores, test.labels()).unwrap();
    assert!((auc - 0.5).abs() <= 0.15, "noise AUROC {auc}");
}
