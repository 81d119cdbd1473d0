#![allow(dead_code)]

use hyperspar_core::{Edge64, Graph64, Hyperedge64, Hypergraph64};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn pair(r: &mut impl Rng, n: usize) -> (usize, usize) {
    let u = r.random_range(0..n);
    let mut v = r.random_range(0..n);
    while v == u {
        v = r.random_range(0..n);
    }
    (u, v)
}

pub fn random_graph(n: usize, m: usize, seed: u64) -> Graph64 {
    let mut r = rng(seed);
    let edges: Vec<_> = (0..m)
        .map(|_| {
            let (u, v) = pair(&mut r, n);
            Edge64 { u, v, w: r.random_range(1.0..10.0) }
        })
        .collect();
    Graph64::from_edges(n, edges).unwrap()
}

/// Random spanning tree plus `extra` uniform edges, shuffled.
pub fn random_connected_graph(n: usize, extra: usize, seed: u64) -> Graph64 {
    let mut r = rng(seed);
    let mut edges: Vec<_> = (1..n).map(|v| Edge64 { u: r.random_range(0..v), v, w: r.random_range(1.0..10.0) }).collect();
    for _ in 0..extra {
        let (u, v) = pair(&mut r, n);
        edges.push(Edge64 { u, v, w: r.random_range(1.0..10.0) });
    }
    for i in (1..edges.len()).rev() {
        edges.swap(i, r.random_range(0..=i));
    }
    Graph64::from_edges(n, edges).unwrap()
}

pub fn integer_weight_stream(n: usize, m: usize, max_w: u32, seed: u64) -> Graph64 {
    let mut r = rng(seed);
    let edges: Vec<_> = (0..m)
        .map(|_| {
            let (u, v) = pair(&mut r, n);
            Edge64 { u, v, w: f64::from(r.random_range(1..=max_w)) }
        })
        .collect();
    Graph64::from_edges(n, edges).unwrap()
}

/// Hyperedges of size `2..=rank`.
pub fn random_hypergraph(n: usize, rank: usize, m: usize, seed: u64) -> Hypergraph64 {
    let mut r = rng(seed);
    let edges: Vec<_> = (0..m)
        .map(|_| {
            let k = r.random_range(2..=rank);
            let vs = rand::seq::index::sample(&mut r, n, k).into_vec();
            Hyperedge64::new(vs, r.random_range(1.0..10.0)).unwrap()
        })
        .collect();
    Hypergraph64::from_edges(n, edges).unwrap()
}

pub fn gaussian_vectors(n: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut r = rng(seed);
    (0..count).map(|_| (0..n).map(|_| r.sample(StandardNormal)).collect()).collect()
}

pub fn ternary_vectors(n: usize) -> Vec<Vec<f64>> {
    (0..3usize.pow(n as u32))
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

pub fn laplacian(g: &Graph64) -> DMatrix<f64> {
    let n = g.n();
    let mut l = DMatrix::zeros(n, n);
    for e in g.edges() {
        l[(e.u, e.u)] += e.w;
        l[(e.v, e.v)] += e.w;
        l[(e.u, e.v)] -= e.w;
        l[(e.v, e.u)] -= e.w;
    }
    l
}

/// Grounded inverse: each component drops its smallest vertex and the reduced
/// block is inverted by LU. Differences `G[u,u] + G[v,v] - 2 G[u,v]` are resistances.
pub fn grounded_inverse(l: &DMatrix<f64>) -> DMatrix<f64> {
    let n = l.nrows();
    let mut comp = vec![usize::MAX; n];
    for s in 0..n {
        if comp[s] != usize::MAX {
            continue;
        }
        comp[s] = s;
        let mut stack = vec![s];
        while let Some(u) = stack.pop() {
            for v in 0..n {
                if v != u && l[(u, v)] != 0.0 && comp[v] == usize::MAX {
                    comp[v] = s;
                    stack.push(v);
                }
            }
        }
    }
    let mut out = DMatrix::zeros(n, n);
    for root in (0..n).filter(|&v| comp[v] == v) {
        let rest: Vec<usize> = (0..n).filter(|&v| comp[v] == root && v != root).collect();
        if rest.is_empty() {
            continue;
        }
        let red = DMatrix::from_fn(rest.len(), rest.len(), |i, j| l[(rest[i], rest[j])]);
        let inv = red.lu().try_inverse().unwrap();
        for (i, &a) in rest.iter().enumerate() {
            for (j, &b) in rest.iter().enumerate() {
                out[(a, b)] = inv[(i, j)];
            }
        }
    }
    out
}

pub fn resistance(p: &DMatrix<f64>, u: usize, v: usize) -> f64 {
    p[(u, u)] + p[(v, v)] - 2.0 * p[(u, v)]
}

/// `max |lambda - 1|` over the generalized spectrum of `(L_h, L_g)` on the range of `L_g`.
pub fn spectral_error(g: &Graph64, h: &Graph64) -> f64 {
    let lg = laplacian(g);
    let lh = laplacian(h);
    let eig = lg.symmetric_eigen();
    let scale = eig.eigenvalues.amax().max(1.0);
    let keep: Vec<usize> = (0..g.n()).filter(|&i| eig.eigenvalues[i] > 1e-9 * scale).collect();
    let mut basis = DMatrix::zeros(g.n(), keep.len());
    for (j, &i) in keep.iter().enumerate() {
        let s = eig.eigenvalues[i].sqrt();
        basis.set_column(j, &(eig.eigenvectors.column(i) / s));
    }
    let m = basis.transpose() * lh * &basis;
    let mu = m.symmetric_eigen().eigenvalues;
    mu.iter().map(|x| (x - 1.0).abs()).fold(0.0, f64::max)
}

pub fn energy(h: &Hypergraph64, x: &[f64]) -> f64 {
    h.edges()
        .iter()
        .map(|e| {
            let vals: Vec<f64> = e.vertices().iter().map(|&v| x[v]).collect();
            let hi = vals.iter().cloned().fold(f64::MIN, f64::max);
            let lo = vals.iter().cloned().fold(f64::MAX, f64::min);
            e.w * (hi - lo) * (hi - lo)
        })
        .sum()
}

/// Worst relative energy error; exact zeros must stay zero.
pub fn energy_error(exact: &Hypergraph64, approx: &Hypergraph64, xs: &[Vec<f64>]) -> f64 {
    xs.iter()
        .map(|x| {
            let (a, b) = (energy(exact, x), energy(approx, x));
            if a <= 1e-12 {
                if b <= 1e-12 { 0.0 } else { f64::INFINITY }
            } else {
                (b / a - 1.0).abs()
            }
        })
        .fold(0.0, f64::max)
}

/// Brute-force minimum over every proper cut.
pub fn brute_mincut(g: &Graph64) -> f64 {
    let n = g.n();
    (1u64..1 << (n - 1))
        .map(|mask| g.edges().iter().filter(|e| (mask >> e.u & 1) != (mask >> e.v & 1)).map(|e| e.w).sum::<f64>())
        .fold(f64::INFINITY, f64::min)
}

pub fn connected_without(g: &Graph64, skip: usize, s: usize, t: usize) -> bool {
    let mut adj = vec![Vec::new(); g.n()];
    for (i, e) in g.edges().iter().enumerate() {
        if i != skip {
            adj[e.u].push(e.v);
            adj[e.v].push(e.u);
        }
    }
    let mut seen = vec![false; g.n()];
    let mut stack = vec![s];
    seen[s] = true;
    while let Some(u) = stack.pop() {
        for &v in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                stack.push(v);
            }
        }
    }
    seen[t]
}

pub fn percentile(values: &[f64], q: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v[((v.len() as f64 - 1.0) * q).round() as usize]
}
