//! Hypergraphs, their energy, clique expansion, and online hyperedge sampling.

use serde::{Deserialize, Serialize};

use crate::balanced::{get_weight_assignment_gram, BalanceConfig};
use crate::error::{Error, Result};
use crate::graph::{Graph, IncidenceRow, IncrementalPinv, LaplacianPinv, Resistance, WeightedEdge};
use crate::merge_reduce::{MergeReduceTree, Reducer};
use crate::online::{OnlineConfig, OnlineSampler, SketchMode};
use crate::rng::{mix_seed, KeyedUniform};
use crate::scalar::{Rate, Scalar};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hyperedge<T> {
    vertices: Vec<usize>,
    pub w: T,
}

impl<T: Scalar> Hyperedge<T> {
    /// Sorts and deduplicates `vertices`; at least two distinct vertices and a
    /// positive finite weight are required.
    pub fn new(mut vertices: Vec<usize>, w: T) -> Result<Self> {
        vertices.sort_unstable();
        vertices.dedup();
        if vertices.len() < 2 {
            return Err(Error::InvalidInput("hyperedge needs at least two distinct vertices".into()));
        }
        if !(w > T::zero() && w.is_finite()) {
            return Err(Error::InvalidInput(format!("hyperedge weight must be positive and finite, got {w}")));
        }
        Ok(Self { vertices, w })
    }

    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    pub fn size(&self) -> usize {
        self.vertices.len()
    }

    /// All vertex pairs in lexicographic order.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let vs = &self.vertices;
        (0..vs.len()).flat_map(move |i| (i + 1..vs.len()).map(move |j| (vs[i], vs[j])))
    }

    pub fn pair_count(&self) -> usize {
        let k = self.vertices.len();
        k * (k - 1) / 2
    }

    pub fn reweighted(&self, factor: T) -> Self {
        Self { vertices: self.vertices.clone(), w: self.w * factor }
    }

    /// `w * (max x - min x)^2` over the hyperedge.
    pub fn energy(&self, x: &[T]) -> T {
        let (lo, hi) = self
            .vertices
            .iter()
            .fold((x[self.vertices[0]], x[self.vertices[0]]), |(lo, hi), &v| (lo.min(x[v]), hi.max(x[v])));
        let d = hi - lo;
        self.w * d * d
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hypergraph<T> {
    n: usize,
    edges: Vec<Hyperedge<T>>,
}

impl<T: Scalar> Hypergraph<T> {
    pub fn new(n: usize) -> Self {
        Self { n, edges: Vec::new() }
    }

    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = Hyperedge<T>>) -> Result<Self> {
        let mut h = Self::new(n);
        for e in edges {
            h.push(e)?;
        }
        Ok(h)
    }

    pub fn push(&mut self, e: Hyperedge<T>) -> Result<()> {
        if let Some(&v) = e.vertices.last().filter(|&&v| v >= self.n) {
            return Err(Error::InvalidInput(format!("vertex {v} out of range for n = {}", self.n)));
        }
        self.edges.push(e);
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Hyperedge<T>] {
        &self.edges
    }

    pub fn into_edges(self) -> Vec<Hyperedge<T>> {
        self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Largest hyperedge size (zero when empty).
    pub fn rank(&self) -> usize {
        self.edges.iter().map(Hyperedge::size).max().unwrap_or(0)
    }

    pub fn energy(&self, x: &[T]) -> T {
        hyper_energy(self, x)
    }

    pub fn associated_graph(&self) -> Graph<T> {
        associated_graph(self)
    }
}

/// `sum_e w(e) * max_{u,v in e} (x_u - x_v)^2`.
pub fn hyper_energy<T: Scalar>(h: &Hypergraph<T>, x: &[T]) -> T {
    assert_eq!(x.len(), h.n(), "vector length must equal vertex count");
    h.edges().iter().fold(T::zero(), |s, e| s + e.energy(x))
}

/// Clique expansion: every pair of every hyperedge becomes an edge of weight
/// `w(e)`, emitted in hyperedge order then lexicographic pair order.
pub fn associated_graph<T: Scalar>(h: &Hypergraph<T>) -> Graph<T> {
    let edges = h.edges().iter().flat_map(|e| e.pairs().map(move |(u, v)| WeightedEdge { u, v, w: e.w }));
    Graph::from_edges(h.n(), edges).expect("pairs of a valid hyperedge are valid edges")
}

/// Rounds `w` to the nearest power `(1+eps)^k` in log scale.
pub fn quantize_weight<T: Scalar>(w: T, eps: T) -> T {
    assert!(w > T::zero(), "weight must be positive");
    assert!(eps > T::zero() && eps < T::one(), "eps must lie in (0, 1)");
    let base = T::one() + eps;
    let k = (w.ln() / base.ln()).round();
    base.powf(k)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum HyperVariant<T> {
    /// `p = min(1, rho * max r_uv)` with `r_uv` read off the sketch after adding the clique rows.
    Fast,
    /// `p = min(1, 2 rho * max q_uv)` after feeding a balanced split of the weight.
    Balanced(BalanceConfig<T>),
}

/// Default constant in front of both oversampling formulas.
pub const DEFAULT_BETA: f64 = 0.5;

/// `rho = beta * r^4 * ln(m / delta) / eps^2`.
pub fn fast_rho(beta: f64, r: usize, m: usize, delta: f64, eps: f64) -> f64 {
    beta * (r as f64).powi(4) * (m.max(2) as f64 / delta).ln() / (eps * eps)
}

/// `rho = beta * ln(m) * ln(2r) / eps^2`.
pub fn balanced_rho(beta: f64, r: usize, m: usize, eps: f64) -> f64 {
    beta * (m.max(2) as f64).ln() * (2.0 * r as f64).ln() / (eps * eps)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HyperSamplerConfig<T> {
    pub variant: HyperVariant<T>,
    pub rho: Rate<T>,
    /// Row sampler maintaining the sketch of the associated graph.
    pub online: OnlineConfig<T>,
    pub seed: u64,
}

impl<T: Scalar> HyperSamplerConfig<T> {
    /// Sketch rows sampled at accuracy `1/2` for `m_rows` expected rows.
    pub fn new(variant: HyperVariant<T>, rho: Rate<T>, m_rows: usize, seed: u64) -> Self {
        let online = OnlineConfig::for_accuracy(T::lit(0.5), m_rows, T::lit(crate::online::DEFAULT_ALPHA), mix_seed(seed, 1));
        Self { variant, rho, online, seed }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HyperDecision<T> {
    pub index: u64,
    pub probability: T,
    /// The hyperedge reweighted by `1/p` when kept.
    pub kept: Option<Hyperedge<T>>,
}

#[derive(Clone, Debug)]
pub struct HyperSampler<T: Scalar> {
    n: usize,
    cfg: HyperSamplerConfig<T>,
    online: OnlineSampler<T>,
    /// Exact pseudoinverse of the sketch kept by `online`.
    pinv: IncrementalPinv<T>,
    draws: KeyedUniform,
    index: u64,
    kept: Vec<(Hyperedge<T>, T)>,
}

impl<T: Scalar> HyperSampler<T> {
    pub fn new(n: usize, cfg: HyperSamplerConfig<T>) -> Self {
        Self {
            n,
            cfg,
            online: OnlineSampler::new(n, cfg.online, SketchMode::SelfSketch),
            pinv: IncrementalPinv::new(n),
            draws: KeyedUniform::new(cfg.seed, 0x6879),
            index: 0,
            kept: Vec::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn sketch_sampler(&self) -> &OnlineSampler<T> {
        &self.online
    }

    /// `w * R_uv` against the current sketch; infinite across components.
    fn sketch_leverage(&self, u: usize, v: usize, w: T) -> T {
        match self.pinv.resistance(u, v) {
            Resistance::Finite(r) => w * r,
            Resistance::Infinite => T::one() / T::zero(),
        }
    }

    fn feed(&mut self, row: IncidenceRow<T>) {
        if let Some(k) = self.online.process_row(row).kept {
            self.pinv.add(k.u, k.v, k.w);
        }
    }

    pub fn step(&mut self, e: &Hyperedge<T>) -> Result<HyperDecision<T>> {
        if e.vertices().last().is_some_and(|&v| v >= self.n) {
            return Err(Error::InvalidInput("hyperedge vertex outside sampler dimension".into()));
        }
        let score = match self.cfg.variant {
            HyperVariant::Fast => {
                for (u, v) in e.pairs() {
                    self.feed(IncidenceRow { u, v, w: e.w });
                }
                self.max_leverage(e)
            }
            HyperVariant::Balanced(bal) => {
                let z = get_weight_assignment_gram(self.pinv.laplacian(), e, &bal)?;
                for ((u, v), zw) in z.pairs {
                    if zw > T::zero() {
                        self.feed(IncidenceRow { u, v, w: zw });
                    }
                }
                T::lit(2.0) * self.max_leverage(e)
            }
        };
        let p = self.cfg.rho.probability(score);
        let index = self.index;
        self.index += 1;
        let keep = p >= T::one() || self.draws.uniform(index) < p.as_f64();
        let kept = keep.then(|| {
            let factor = T::one() / p;
            self.kept.push((e.clone(), factor));
            e.reweighted(factor)
        });
        Ok(HyperDecision { index, probability: p, kept })
    }

    fn max_leverage(&self, e: &Hyperedge<T>) -> T {
        e.pairs().map(|(u, v)| self.sketch_leverage(u, v, e.w)).fold(T::zero(), |a, b| a.max(b))
    }

    /// Kept hyperedges with their `1/p` factors, in arrival order.
    pub fn kept(&self) -> &[(Hyperedge<T>, T)] {
        &self.kept
    }

    pub fn kept_count(&self) -> usize {
        self.kept.len()
    }

    pub fn sparsifier(&self) -> Hypergraph<T> {
        Hypergraph { n: self.n, edges: self.kept.iter().map(|(e, f)| e.reweighted(*f)).collect() }
    }
}

pub fn hyper_sparsify<T: Scalar>(h: &Hypergraph<T>, cfg: HyperSamplerConfig<T>) -> Result<Hypergraph<T>> {
    let mut s = HyperSampler::new(h.n(), cfg);
    for e in h.edges() {
        s.step(e)?;
    }
    Ok(s.sparsifier())
}

/// Offline reduce step: keep `e` with `p = min(1, rho * max_uv w(e) R_uv)`,
/// resistances taken in the associated graph of the items, reweight by `1/p`.
#[derive(Clone, Copy, Debug)]
pub struct HyperReducer<T> {
    pub n: usize,
    pub rho: Rate<T>,
    pub seed: u64,
}

impl<T: Scalar> HyperReducer<T> {
    pub fn for_block_size(n: usize, block_size: usize, seed: u64) -> Self {
        let rho = T::from_usize_lossy(block_size) / T::from_usize_lossy(n.max(1));
        Self { n, rho: Rate::Finite(rho), seed }
    }
}

pub fn hyper_er_sparsify<T: Scalar>(h: &Hypergraph<T>, rho: Rate<T>, draws: &mut KeyedUniform) -> Hypergraph<T> {
    if matches!(rho, Rate::Unbounded) {
        return h.clone();
    }
    let pinv = LaplacianPinv::from_graph(&h.associated_graph()).expect("associated graph Laplacian");
    let mut out = Hypergraph::new(h.n());
    for (i, e) in h.edges().iter().enumerate() {
        let lev = e
            .pairs()
            .map(|(u, v)| pinv.resistance(u, v).finite().map_or(T::one(), |r| (r * e.w).min(T::one())))
            .fold(T::zero(), |a, b| a.max(b));
        let p = rho.probability(lev);
        if p >= T::one() {
            out.edges.push(e.clone());
        } else if draws.uniform(i as u64) < p.as_f64() {
            out.edges.push(e.reweighted(T::one() / p));
        }
    }
    out
}

impl<T: Scalar> Reducer<Hyperedge<T>> for HyperReducer<T> {
    fn reduce(&mut self, items: Vec<Hyperedge<T>>, key: u64) -> Vec<Hyperedge<T>> {
        let h = Hypergraph { n: self.n, edges: items };
        let mut draws = KeyedUniform::new(mix_seed(self.seed, key), 1);
        hyper_er_sparsify(&h, self.rho, &mut draws).edges
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HyperStreamConfig<T> {
    pub sampler: HyperSamplerConfig<T>,
    pub block_size: usize,
    /// Reducer rate; `None` means `M / n`.
    pub rho: Option<Rate<T>>,
    pub tree_seed: u64,
}

/// Online hyperedge sampler feeding a merge-and-reduce tower of hyperedges.
#[derive(Clone, Debug)]
pub struct HyperStreamSparsifier<T: Scalar> {
    n: usize,
    sampler: HyperSampler<T>,
    tree: MergeReduceTree<Hyperedge<T>, HyperReducer<T>>,
}

impl<T: Scalar> HyperStreamSparsifier<T> {
    pub fn new(n: usize, cfg: &HyperStreamConfig<T>) -> Self {
        let mut reducer = HyperReducer::for_block_size(n, cfg.block_size, cfg.tree_seed);
        if let Some(rho) = cfg.rho {
            reducer.rho = rho;
        }
        Self { n, sampler: HyperSampler::new(n, cfg.sampler), tree: MergeReduceTree::new(cfg.block_size, reducer) }
    }

    pub fn push(&mut self, e: &Hyperedge<T>) -> Result<bool> {
        let d = self.sampler.step(e)?;
        Ok(match d.kept {
            Some(k) => {
                self.tree.push(k);
                true
            }
            None => false,
        })
    }

    pub fn sparsifier(&self) -> Hypergraph<T> {
        Hypergraph { n: self.n, edges: self.tree.items().cloned().collect() }
    }

    pub fn stored(&self) -> usize {
        self.tree.stored()
    }

    pub fn peak_stored(&self) -> usize {
        self.tree.peak_stored()
    }
}
