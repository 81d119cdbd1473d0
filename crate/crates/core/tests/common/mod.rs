#![allow(dead_code)]

use hyperspar_core::graph::{Graph, WeightedEdge};
use hyperspar_core::hypergraph::{Hyperedge, Hypergraph};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn pair(rng: &mut impl Rng, n: usize) -> (usize, usize) {
    let u = rng.random_range(0..n);
    let mut v = rng.random_range(0..n);
    while v == u {
        v = rng.random_range(0..n);
    }
    (u, v)
}

/// `m` uniform pairs with `U(1, 10)` weights.
pub fn random_graph(n: usize, m: usize, seed: u64) -> Graph<f64> {
    let mut r = rng(seed);
    let edges = (0..m).map(|_| {
        let (u, v) = pair(&mut r, n);
        WeightedEdge { u, v, w: r.random_range(1.0..10.0) }
    });
    Graph::from_edges(n, edges).unwrap()
}

/// Random spanning tree followed by `extra` uniform edges, shuffled together.
pub fn random_connected_graph(n: usize, extra: usize, seed: u64) -> Graph<f64> {
    let mut r = rng(seed);
    let mut edges: Vec<_> = (1..n)
        .map(|v| WeightedEdge { u: r.random_range(0..v), v, w: r.random_range(1.0..10.0) })
        .collect();
    for _ in 0..extra {
        let (u, v) = pair(&mut r, n);
        edges.push(WeightedEdge { u, v, w: r.random_range(1.0..10.0) });
    }
    for i in (1..edges.len()).rev() {
        edges.swap(i, r.random_range(0..=i));
    }
    Graph::from_edges(n, edges).unwrap()
}

pub fn integer_weight_stream(n: usize, m: usize, max_w: u32, seed: u64) -> Graph<f64> {
    let mut r = rng(seed);
    let edges = (0..m).map(|_| {
        let (u, v) = pair(&mut r, n);
        WeightedEdge { u, v, w: f64::from(r.random_range(1..=max_w)) }
    });
    Graph::from_edges(n, edges).unwrap()
}

/// Hyperedges of size `2..=rank` with `U(1, 10)` weights.
pub fn random_hypergraph(n: usize, rank: usize, m: usize, seed: u64) -> Hypergraph<f64> {
    let mut r = rng(seed);
    let edges = (0..m).map(|_| {
        let k = r.random_range(2..=rank);
        let vs = rand::seq::index::sample(&mut r, n, k).into_vec();
        Hyperedge::new(vs, r.random_range(1.0..10.0)).unwrap()
    });
    Hypergraph::from_edges(n, edges).unwrap()
}

pub fn gaussian_vectors(n: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut r = rng(seed);
    (0..count).map(|_| (0..n).map(|_| r.sample(StandardNormal)).collect()).collect()
}

/// Every vector in `{-1, 0, 1}^n`.
pub fn ternary_vectors(n: usize) -> Vec<Vec<f64>> {
    let total = 3usize.pow(n as u32);
    (0..total)
        .map(|mut k| {
            (0..n)
                .map(|_| {
                    let d = k % 3;
                    k /= 3;
                    d as f64 - 1.0
                })
                .collect()
        })
        .collect()
}

/// Worst relative energy error; vectors with zero exact energy must map to zero.
pub fn worst_energy_error(exact: &Hypergraph<f64>, approx: &Hypergraph<f64>, xs: &[Vec<f64>]) -> f64 {
    hyperspar_core::robust::energy_error(exact, approx, xs)
}

pub fn fraction(passes: usize, total: usize) -> f64 {
    passes as f64 / total as f64
}

pub fn percentile(values: &[f64], q: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let idx = ((v.len() as f64 - 1.0) * q).round() as usize;
    v[idx]
}
