mod common;

use hyperspar_core::graph::{graph_error, leverages, Graph, WeightedEdge};
use hyperspar_core::offline::{er_sparsify, sampling_probabilities, OfflineSampleConfig};
use hyperspar_core::Rate;
use nalgebra::DMatrix;
use proptest::prelude::*;

#[test]
fn huge_rate_returns_input() {
    let g = common::random_graph(10, 60, 3);
    let out = er_sparsify(&g, &OfflineSampleConfig { rho: Rate::Unbounded, seed: 1 }).unwrap();
    assert_eq!(out, g);
    let out = er_sparsify(&g, &OfflineSampleConfig::new(1e12, 1)).unwrap();
    assert_eq!(out, g);
}

#[test]
fn single_edge_survives_unweighted() {
    let g = Graph::from_edges(2, [WeightedEdge { u: 0, v: 1, w: 3.5 }]).unwrap();
    for rho in [1.0, 1.5, 40.0] {
        assert_eq!(er_sparsify(&g, &OfflineSampleConfig::new(rho, 9)).unwrap(), g);
    }
}

#[test]
fn dense_multigraph_at_rate_twenty() {
    let good = (0..100)
        .filter(|&seed| {
            let g = common::random_graph(8, 200, seed);
            let h = er_sparsify(&g, &OfflineSampleConfig::new(20.0, 1000 + seed)).unwrap();
            graph_error(&g, &h).unwrap() <= 0.5
        })
        .count();
    assert!(good >= 90, "only {good}/100 within 0.5");
}

#[test]
fn sampled_laplacian_is_unbiased() {
    let g = common::random_connected_graph(6, 12, 5);
    let l = g.laplacian();
    let trials = 1000;
    let mut sum = DMatrix::<f64>::zeros(6, 6);
    let mut sq = DMatrix::<f64>::zeros(6, 6);
    for seed in 0..trials {
        let h = er_sparsify(&g, &OfflineSampleConfig::new(1.0, seed)).unwrap().laplacian();
        sum += &h;
        sq += h.component_mul(&h);
    }
    let t = trials as f64;
    let mean = &sum / t;
    for i in 0..6 {
        for j in 0..6 {
            let var = (sq[(i, j)] / t - mean[(i, j)].powi(2)).max(0.0);
            let se = (var / (t - 1.0)).sqrt();
            let diff = (mean[(i, j)] - l[(i, j)]).abs();
            assert!(diff <= 3.0 * se + 1e-9, "entry ({i},{j}): |{}-{}| > 3*{se}", mean[(i, j)], l[(i, j)]);
        }
    }
}

#[test]
fn kept_count_concentrates() {
    let g = common::random_graph(20, 400, 8);
    let expected: f64 = sampling_probabilities(&g, Rate::Finite(3.0)).unwrap().iter().sum();
    let trials = 200;
    let good = (0..trials)
        .filter(|&seed| {
            let kept = er_sparsify(&g, &OfflineSampleConfig::new(3.0, seed)).unwrap().len() as f64;
            (kept - expected).abs() <= 4.0 * expected.sqrt()
        })
        .count();
    assert!(common::fraction(good, trials as usize) >= 0.95);
}

#[test]
fn median_error_decreases_with_rate() {
    let seeds: Vec<u64> = (0..25).collect();
    let graphs: Vec<_> = seeds.iter().map(|&s| common::random_graph(15, 400, 300 + s)).collect();
    let mut prev = f64::INFINITY;
    for rho in [2.0, 5.0, 10.0, 20.0, 40.0] {
        let errs: Vec<f64> = graphs
            .iter()
            .zip(&seeds)
            .map(|(g, &s)| graph_error(g, &er_sparsify(g, &OfflineSampleConfig::new(rho, s)).unwrap()).unwrap())
            .collect();
        let med = common::percentile(&errs, 0.5);
        assert!(med <= prev, "median {med} at rho {rho} exceeds {prev}");
        prev = med;
    }
}

#[test]
fn disconnected_input_uses_component_leverages() {
    let a = common::random_connected_graph(5, 4, 1);
    let b = common::random_connected_graph(4, 3, 2);
    let shifted = b.edges().iter().map(|e| WeightedEdge { u: e.u + 5, v: e.v + 5, w: e.w });
    let g = Graph::from_edges(9, a.edges().iter().copied().chain(shifted)).unwrap();
    let total: f64 = leverages(&g).unwrap().iter().sum();
    assert!((total - 7.0).abs() < 1e-9);
    let probs = sampling_probabilities(&g, Rate::Finite(1.0)).unwrap();
    assert!(probs.iter().all(|&p| p > 0.0 && p <= 1.0));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn output_preserves_order_and_reweights(seed in 0u64..10_000, rho in 0.2f64..8.0) {
        let g = common::random_graph(9, 40, seed);
        let probs = sampling_probabilities(&g, Rate::Finite(rho)).unwrap();
        let lev = leverages(&g).unwrap();
        let out = er_sparsify(&g, &OfflineSampleConfig::new(rho, seed)).unwrap();
        let mut it = out.edges().iter();
        let mut next = it.next();
        for ((e, &p), &l) in g.edges().iter().zip(&probs).zip(&lev) {
            prop_assert!((p - (rho * l).min(1.0)).abs() < 1e-9);
            if let Some(k) = next {
                if k.u == e.u && k.v == e.v && (k.w * p - e.w).abs() < 1e-9 * e.w.max(1.0) {
                    next = it.next();
                }
            }
        }
        prop_assert!(next.is_none(), "output edges are not an ordered reweighted subsequence");
    }
}
