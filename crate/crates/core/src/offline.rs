//! Offline effective-resistance sampling: the reduce step of merge-and-reduce.

use crate::error::Result;
use crate::graph::{Graph, LaplacianPinv};
use crate::rng::KeyedUniform;
use crate::scalar::{Rate, Scalar};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OfflineSampleConfig<T> {
    /// Oversampling rate: edge `e` survives with probability `min(1, rho * lev(e))`.
    pub rho: Rate<T>,
    pub seed: u64,
}

impl<T: Scalar> OfflineSampleConfig<T> {
    pub fn new(rho: T, seed: u64) -> Self {
        Self { rho: Rate::Finite(rho), seed }
    }

    /// `rho = target / n`, so the expected output size is at most `target`.
    pub fn for_target_size(target: usize, n: usize, seed: u64) -> Self {
        Self::new(T::from_usize_lossy(target) / T::from_usize_lossy(n.max(1)), seed)
    }
}

/// Keep each edge independently with `p_e = min(1, rho * leverage(e))` and
/// reweight survivors by `1/p_e`. Leverages are computed per component.
pub fn er_sparsify<T: Scalar>(g: &Graph<T>, cfg: &OfflineSampleConfig<T>) -> Result<Graph<T>> {
    er_sparsify_keyed(g, cfg.rho, &mut KeyedUniform::new(cfg.seed, 0))
}

/// Same as [`er_sparsify`] with an explicit keyed draw source; edge `i` uses
/// draw index `i`.
pub fn er_sparsify_keyed<T: Scalar>(
    g: &Graph<T>,
    rho: Rate<T>,
    draws: &mut KeyedUniform,
) -> Result<Graph<T>> {
    let probs = sampling_probabilities(g, rho)?;
    let mut out = Graph::new(g.n());
    for (i, (e, p)) in g.edges().iter().zip(probs).enumerate() {
        if p >= T::one() {
            out.push(*e)?;
        } else if draws.uniform(i as u64) < p.as_f64() {
            out.push(e.reweighted(T::one() / p))?;
        }
    }
    Ok(out)
}

/// Per-edge keep probabilities `min(1, rho * leverage)`.
pub fn sampling_probabilities<T: Scalar>(g: &Graph<T>, rho: Rate<T>) -> Result<Vec<T>> {
    if matches!(rho, Rate::Unbounded) {
        return Ok(vec![T::one(); g.len()]);
    }
    let pinv = LaplacianPinv::from_graph(g)?;
    Ok(g
        .edges()
        .iter()
        .map(|e| {
            let lev = pinv.resistance(e.u, e.v).finite().map_or(T::one(), |r| r * e.w);
            rho.probability(lev)
        })
        .collect())
}
