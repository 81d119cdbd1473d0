//! Merge-and-reduce coreset tower and the streaming graph sparsifier built on it.
//!
//! Items arrive into a buffer of `M` slots. A full buffer becomes a level-1
//! coreset; two coresets at level `k` are concatenated, reduced, and carried to
//! level `k + 1`, exactly like incrementing a binary counter.

use crate::graph::{Graph, WeightedEdge};
use crate::offline::er_sparsify_keyed;
use crate::online::{OnlineConfig, OnlineSampler, SketchMode};
use crate::rng::{mix_seed, KeyedUniform};
use crate::scalar::{Rate, Scalar};

/// Shrinks a multiset of items into a coreset.
pub trait Reducer<I> {
    /// `key` is unique per reduction so randomized reducers draw fresh bits.
    fn reduce(&mut self, items: Vec<I>, key: u64) -> Vec<I>;
}

/// Returns its input; the tower then stores the exact stream.
#[derive(Clone, Copy, Debug, Default)]
pub struct IdentityReducer;

impl<I> Reducer<I> for IdentityReducer {
    fn reduce(&mut self, items: Vec<I>, _key: u64) -> Vec<I> {
        items
    }
}

/// Effective-resistance sampling of the merged edges.
#[derive(Clone, Copy, Debug)]
pub struct ErReducer<T> {
    pub n: usize,
    pub rho: Rate<T>,
    pub seed: u64,
}

impl<T: Scalar> ErReducer<T> {
    /// `rho = M / n`, so a reduced coreset has at most `M` edges in expectation.
    pub fn for_block_size(n: usize, block_size: usize, seed: u64) -> Self {
        let rho = T::from_usize_lossy(block_size) / T::from_usize_lossy(n.max(1));
        Self { n, rho: Rate::Finite(rho), seed }
    }
}

impl<T: Scalar> Reducer<WeightedEdge<T>> for ErReducer<T> {
    fn reduce(&mut self, items: Vec<WeightedEdge<T>>, key: u64) -> Vec<WeightedEdge<T>> {
        let g = Graph::from_edges(self.n, items).expect("tower items are valid edges");
        let mut draws = KeyedUniform::new(mix_seed(self.seed, key), 1);
        er_sparsify_keyed(&g, self.rho, &mut draws)
            .expect("offline sampling of a valid graph")
            .into_edges()
    }
}

/// Block size `M = c_off * n * ln(n) / eps'^2` (at least one item).
pub fn block_size_for_accuracy(n: usize, eps_prime: f64, c_off: f64) -> usize {
    let n = n.max(2) as f64;
    (c_off * n * n.ln() / (eps_prime * eps_prime)).ceil().max(1.0) as usize
}

/// Calibrated default for the constant in [`block_size_for_accuracy`].
pub const DEFAULT_C_OFF: f64 = 0.1;

/// Tree height `ceil(log2(m / M))` for `m` items in blocks of `M` (zero when one block suffices).
pub fn tree_height(m: usize, block_size: usize) -> u32 {
    let blocks = m.div_ceil(block_size.max(1));
    if blocks <= 1 {
        0
    } else {
        usize::BITS - (blocks - 1).leading_zeros()
    }
}

/// Per-level accuracy `eps / h` for an end-to-end target `eps`.
pub fn per_level_accuracy(eps: f64, height: u32) -> f64 {
    eps / f64::from(height.max(1))
}

#[derive(Clone, Debug)]
pub struct MergeReduceTree<I, R> {
    block_size: usize,
    reducer: R,
    /// `levels[k]` holds the coreset at level `k + 1`.
    levels: Vec<Option<Vec<I>>>,
    buffer: Vec<I>,
    pushed: u64,
    reductions: u64,
    peak_stored: usize,
}

impl<I: Clone, R: Reducer<I>> MergeReduceTree<I, R> {
    pub fn new(block_size: usize, reducer: R) -> Self {
        assert!(block_size > 0, "block size must be positive");
        Self {
            block_size,
            reducer,
            levels: Vec::new(),
            buffer: Vec::new(),
            pushed: 0,
            reductions: 0,
            peak_stored: 0,
        }
    }

    pub fn block_size(&self) -> usize {
        self.block_size
    }

    pub fn push(&mut self, item: I) {
        self.buffer.push(item);
        self.pushed += 1;
        if self.buffer.len() == self.block_size {
            let mut carry = std::mem::take(&mut self.buffer);
            let mut k = 0;
            loop {
                if k == self.levels.len() {
                    self.levels.push(None);
                }
                match self.levels[k].take() {
                    None => {
                        self.levels[k] = Some(carry);
                        break;
                    }
                    Some(mut older) => {
                        older.append(&mut carry);
                        carry = self.reducer.reduce(older, self.reductions);
                        self.reductions += 1;
                        k += 1;
                    }
                }
            }
        }
        self.peak_stored = self.peak_stored.max(self.stored());
    }

    /// Items currently held in levels and buffer.
    pub fn stored(&self) -> usize {
        self.buffer.len() + self.levels.iter().flatten().map(Vec::len).sum::<usize>()
    }

    /// Largest [`stored`](Self::stored) value observed after any push.
    pub fn peak_stored(&self) -> usize {
        self.peak_stored
    }

    pub fn pushed(&self) -> u64 {
        self.pushed
    }

    /// Number of reductions so far. It changes exactly when the union of
    /// stored items changes by something other than appending the pushed item.
    pub fn generation(&self) -> u64 {
        self.reductions
    }

    /// Coreset at level `k` (1-based), if occupied.
    pub fn level(&self, k: usize) -> Option<&[I]> {
        k.checked_sub(1).and_then(|i| self.levels.get(i)).and_then(|l| l.as_deref())
    }

    /// Highest level index that has ever been allocated.
    pub fn height(&self) -> usize {
        self.levels.len()
    }

    pub fn buffer(&self) -> &[I] {
        &self.buffer
    }

    /// Levels from lowest to highest, then the buffer.
    pub fn items(&self) -> impl Iterator<Item = &I> {
        self.levels.iter().flatten().flatten().chain(self.buffer.iter())
    }

    pub fn reducer(&self) -> &R {
        &self.reducer
    }
}

impl<T: Scalar, R: Reducer<WeightedEdge<T>>> MergeReduceTree<WeightedEdge<T>, R> {
    /// Union of all coresets and the buffer as a graph on `n` vertices.
    pub fn sparsifier(&self, n: usize) -> Graph<T> {
        Graph::from_edges(n, self.items().copied()).expect("tower items are valid edges")
    }
}

/// Tower parameters for the streaming pipeline.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TreeConfig<T> {
    pub block_size: usize,
    /// Reducer rate; `None` means `M / n`.
    pub rho: Option<Rate<T>>,
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StreamPipelineConfig<T> {
    pub online: OnlineConfig<T>,
    pub tree: TreeConfig<T>,
    /// Working-memory mode reads online scores off the tower output.
    pub mode: SketchMode,
    /// Target stored edges; informational, reported against the peak.
    pub budget: Option<usize>,
}

/// Online sampler feeding a merge-and-reduce tower.
#[derive(Clone, Debug)]
pub struct StreamSparsifier<T: Scalar> {
    n: usize,
    mode: SketchMode,
    online: OnlineSampler<T>,
    tree: MergeReduceTree<WeightedEdge<T>, ErReducer<T>>,
    budget: Option<usize>,
}

impl<T: Scalar> StreamSparsifier<T> {
    pub fn new(n: usize, cfg: &StreamPipelineConfig<T>) -> Self {
        let mut reducer = ErReducer::for_block_size(n, cfg.tree.block_size, cfg.tree.seed);
        if let Some(rho) = cfg.tree.rho {
            reducer.rho = rho;
        }
        Self {
            n,
            mode: cfg.mode,
            online: OnlineSampler::new(n, cfg.online, cfg.mode),
            tree: MergeReduceTree::new(cfg.tree.block_size, reducer),
            budget: cfg.budget,
        }
    }

    /// Returns whether the edge was kept by the online stage.
    pub fn push(&mut self, e: &WeightedEdge<T>) -> bool {
        let decision = self.online.process_edge(e);
        let Some(row) = decision.kept else {
            return false;
        };
        let generation = self.tree.generation();
        self.tree.push(row.edge());
        if self.mode == SketchMode::External {
            if self.tree.generation() == generation {
                self.online.external_add(&row);
            } else {
                let out = self.tree.sparsifier(self.n);
                self.online.external_reset(&out);
            }
        }
        true
    }

    pub fn sparsifier(&self) -> Graph<T> {
        self.tree.sparsifier(self.n)
    }

    pub fn stored(&self) -> usize {
        self.tree.stored()
    }

    pub fn peak_stored(&self) -> usize {
        self.tree.peak_stored()
    }

    pub fn online(&self) -> &OnlineSampler<T> {
        &self.online
    }

    pub fn tree(&self) -> &MergeReduceTree<WeightedEdge<T>, ErReducer<T>> {
        &self.tree
    }

    pub fn budget(&self) -> Option<usize> {
        self.budget
    }
}

/// Result of a full pass over a stream.
#[derive(Clone, Debug, PartialEq)]
pub struct StreamOutput<T> {
    pub graph: Graph<T>,
    pub peak_stored: usize,
    pub online_kept: usize,
}

pub fn stream_sparsify<T: Scalar>(
    n: usize,
    stream: impl IntoIterator<Item = WeightedEdge<T>>,
    cfg: &StreamPipelineConfig<T>,
) -> StreamOutput<T> {
    let mut s = StreamSparsifier::new(n, cfg);
    for e in stream {
        s.push(&e);
    }
    StreamOutput { graph: s.sparsifier(), peak_stored: s.peak_stored(), online_kept: s.online.kept_count() }
}
