//! Global minimum cuts: exact oracles, near-minimum cut enumeration, and the
//! streaming approximation built on the graph sparsifier.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, WeightedEdge};
use crate::merge_reduce::{block_size_for_accuracy, stream_sparsify, tree_height, StreamPipelineConfig, TreeConfig, DEFAULT_C_OFF};
use crate::online::{OnlineConfig, SketchMode, DEFAULT_ALPHA};
use crate::rng::mix_seed;
use crate::scalar::Scalar;

/// Largest vertex count accepted by the exhaustive routines.
pub const MAX_ENUMERATION_N: usize = 20;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cut<T> {
    /// Sorted vertices on one side; nonempty and proper.
    pub side: Vec<usize>,
    pub value: T,
}

/// Aggregated symmetric weight matrix; parallel edges are summed.
fn weight_matrix<T: Scalar>(g: &Graph<T>) -> DMatrix<T> {
    let n = g.n();
    let mut w = DMatrix::zeros(n, n);
    for e in g.edges() {
        w[(e.u, e.v)] += e.w;
        w[(e.v, e.u)] += e.w;
    }
    w
}

/// Total weight of edges with exactly one endpoint in `side`.
pub fn cut_value<T: Scalar>(g: &Graph<T>, side: &[usize]) -> T {
    let mut inside = vec![false; g.n()];
    for &v in side {
        inside[v] = true;
    }
    g.edges().iter().filter(|e| inside[e.u] != inside[e.v]).fold(T::zero(), |s, e| s + e.w)
}

fn side_of_mask(mask: u64, n: usize) -> Vec<usize> {
    (0..n).filter(|&v| mask >> v & 1 == 1).collect()
}

/// Visits every cut `(S, V \ S)` with `n - 1` not in `S`, as a Gray-code walk
/// so each step updates the value in `O(n)`.
fn for_each_cut<T: Scalar>(g: &Graph<T>, mut visit: impl FnMut(u64, T)) -> Result<()> {
    let n = g.n();
    if n > MAX_ENUMERATION_N {
        return Err(Error::Capability(format!("cut enumeration supports n <= {MAX_ENUMERATION_N}, got {n}")));
    }
    if n < 2 {
        return Err(Error::InvalidInput("a cut needs at least two vertices".into()));
    }
    let w = weight_matrix(g);
    let mut mask = 0u64;
    let mut value = T::zero();
    for step in 1u64..(1u64 << (n - 1)) {
        let x = step.trailing_zeros() as usize;
        let entering = mask >> x & 1 == 0;
        let mut to_in = T::zero();
        let mut to_out = T::zero();
        for v in (0..n).filter(|&v| v != x) {
            if mask >> v & 1 == 1 {
                to_in += w[(x, v)];
            } else {
                to_out += w[(x, v)];
            }
        }
        if entering {
            value += to_out - to_in;
        } else {
            value += to_in - to_out;
        }
        mask ^= 1 << x;
        visit(mask, value);
    }
    Ok(())
}

/// Exhaustive minimum cut over all `2^(n-1) - 1` bipartitions.
pub fn brute_force_mincut<T: Scalar>(g: &Graph<T>) -> Result<Cut<T>> {
    let mut best: Option<(u64, T)> = None;
    for_each_cut(g, |mask, value| {
        if best.is_none_or(|(_, b)| value < b) {
            best = Some((mask, value));
        }
    })?;
    let (mask, _) = best.expect("at least one cut");
    let side = side_of_mask(mask, g.n());
    let value = cut_value(g, &side);
    Ok(Cut { side, value })
}

/// Minimum global cut by Stoer-Wagner. A disconnected graph yields a zero cut
/// separating the component of vertex 0.
pub fn exact_mincut<T: Scalar>(g: &Graph<T>) -> Result<Cut<T>> {
    let n = g.n();
    if n < 2 {
        return Err(Error::InvalidInput("a cut needs at least two vertices".into()));
    }
    let comp = g.components();
    if comp.iter().any(|&c| c != 0) {
        let side: Vec<usize> = (0..n).filter(|&v| comp[v] == 0).collect();
        return Ok(Cut { side, value: T::zero() });
    }
    let mut w = weight_matrix(g);
    // merged[v]: original vertices currently contracted into v.
    let mut merged: Vec<Vec<usize>> = (0..n).map(|v| vec![v]).collect();
    let mut active: Vec<usize> = (0..n).collect();
    let mut best: Option<(T, Vec<usize>)> = None;
    while active.len() > 1 {
        let mut key: Vec<T> = vec![T::zero(); n];
        let mut added = vec![false; n];
        let mut prev = active[0];
        let mut last = active[0];
        for round in 0..active.len() {
            let next = *active
                .iter()
                .filter(|&&v| !added[v])
                .max_by(|&&a, &&b| key[a].partial_cmp(&key[b]).expect("finite weights"))
                .expect("unadded vertex remains");
            added[next] = true;
            if round + 1 == active.len() {
                prev = last;
                last = next;
                break;
            }
            last = next;
            for &v in active.iter().filter(|&&v| !added[v]) {
                key[v] += w[(next, v)];
            }
        }
        let phase_value = key[last];
        if best.as_ref().is_none_or(|(b, _)| phase_value < *b) {
            best = Some((phase_value, merged[last].clone()));
        }
        let moved = std::mem::take(&mut merged[last]);
        merged[prev].extend(moved);
        for &v in &active {
            if v != prev && v != last {
                let add = w[(last, v)];
                w[(prev, v)] += add;
                w[(v, prev)] += add;
            }
        }
        active.retain(|&v| v != last);
    }
    let (_, mut side) = best.expect("at least one phase");
    side.sort_unstable();
    let value = cut_value(g, &side);
    Ok(Cut { side, value })
}

/// Every cut of value at most `factor` times the minimum (sides exclude vertex `n-1`).
pub fn enumerate_near_min_cuts<T: Scalar>(g: &Graph<T>, factor: T) -> Result<Vec<Cut<T>>> {
    if factor < T::one() {
        return Err(Error::InvalidInput("factor must be at least one".into()));
    }
    let mut min = None::<T>;
    for_each_cut(g, |_, v| min = Some(min.map_or(v, |m| m.min(v))))?;
    let threshold = factor * min.expect("at least one cut");
    let slack = T::lit(1e-9) * threshold.abs().max(T::one());
    let mut masks = Vec::new();
    for_each_cut(g, |mask, v| {
        if v <= threshold + slack {
            masks.push(mask);
        }
    })?;
    masks.sort_unstable();
    Ok(masks
        .into_iter()
        .map(|m| {
            let side = side_of_mask(m, g.n());
            let value = cut_value(g, &side);
            Cut { side, value }
        })
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MinCutPipelineConfig<T> {
    pub eps: T,
    pub near_factor: T,
    pub stream: StreamPipelineConfig<T>,
}

impl<T: Scalar> MinCutPipelineConfig<T> {
    /// Online stage at accuracy `eps`; the tower block size is chosen so that
    /// `h` levels at `eps' = eps / h` fit a stream of `m` edges.
    pub fn for_accuracy(n: usize, m: usize, eps: T, seed: u64) -> Self {
        let eps_f = eps.as_f64();
        let mut eps_prime = eps_f;
        let mut block = block_size_for_accuracy(n, eps_prime, DEFAULT_C_OFF);
        for _ in 0..8 {
            let h = tree_height(m, block).max(1);
            let next = eps_f / f64::from(h);
            if next >= eps_prime {
                break;
            }
            eps_prime = next;
            block = block_size_for_accuracy(n, eps_prime, DEFAULT_C_OFF);
        }
        let online = OnlineConfig::for_accuracy(eps, m, T::lit(DEFAULT_ALPHA), mix_seed(seed, 1));
        Self {
            eps,
            near_factor: T::lit(4.0),
            stream: StreamPipelineConfig {
                online,
                tree: TreeConfig { block_size: block, rho: None, seed: mix_seed(seed, 2) },
                mode: SketchMode::External,
                budget: None,
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MinCutEstimate<T> {
    pub value: T,
    pub cut: Cut<T>,
    pub candidates: usize,
    pub sparsifier: Graph<T>,
}

/// Sparsifies the stream, enumerates near-minimum cuts of the sparsifier and
/// returns the smallest of them as evaluated on the sparsifier.
pub fn stream_mincut<T: Scalar>(
    n: usize,
    stream: impl IntoIterator<Item = WeightedEdge<T>>,
    cfg: &MinCutPipelineConfig<T>,
) -> Result<MinCutEstimate<T>> {
    if n > MAX_ENUMERATION_N {
        return Err(Error::Capability(format!("cut enumeration supports n <= {MAX_ENUMERATION_N}, got {n}")));
    }
    let sparsifier = stream_sparsify(n, stream, &cfg.stream).graph;
    let candidates = enumerate_near_min_cuts(&sparsifier, cfg.near_factor)?;
    let count = candidates.len();
    let cut = candidates
        .into_iter()
        .min_by(|a, b| a.value.partial_cmp(&b.value).expect("finite cut values"))
        .expect("enumeration contains the minimum");
    Ok(MinCutEstimate { value: cut.value, cut, candidates: count, sparsifier })
}
