//! Sliding-window sparsification with reversed-stream online coresets.
//!
//! New items are prepended to `C_0`. When `C_0` holds `M` items, the levels
//! `C_0, C_1, ..., C_{i-1}` (newest first) are replayed through an online
//! coreset into the first empty level `C_i`, and the lower levels are cleared.
//! Because the online coreset is valid for every prefix of its input, and the
//! input is the stream reversed, every suffix of the real stream is covered.

use crate::error::{Error, Result};
use crate::hypergraph::{HyperSampler, HyperSamplerConfig, Hyperedge, Hypergraph};
use crate::rng::mix_seed;
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub struct StoredItem<T> {
    /// The hyperedge with its original weight.
    pub edge: Hyperedge<T>,
    /// Original stream index.
    pub index: u64,
    /// Cumulative reweighting from every coreset pass.
    pub factor: T,
}

impl<T: Scalar> StoredItem<T> {
    pub fn weighted(&self) -> Hyperedge<T> {
        self.edge.reweighted(self.factor)
    }
}

/// How a full block is compressed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CoresetRoutine<T> {
    /// Keep everything.
    Identity,
    /// Online hyperedge sampling over the reversed items; seeds vary per pass.
    Online(HyperSamplerConfig<T>),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum QueryMode {
    /// Items whose original index is inside the window.
    #[default]
    Filtered,
    /// Whole levels `C_0..C_i` for the smallest `i` whose levels span the window.
    LevelUnion,
}

#[derive(Clone, Debug)]
pub struct SlidingWindow<T: Scalar> {
    n: usize,
    block_size: usize,
    routine: CoresetRoutine<T>,
    /// Newest first.
    c0: Vec<StoredItem<T>>,
    /// `levels[k]` is `C_{k+1}` along with the number of raw items it summarizes.
    levels: Vec<Option<(Vec<StoredItem<T>>, u64)>>,
    next_index: u64,
    passes: u64,
}

impl<T: Scalar> SlidingWindow<T> {
    pub fn new(n: usize, block_size: usize, routine: CoresetRoutine<T>) -> Self {
        assert!(block_size > 0, "block size must be positive");
        Self { n, block_size, routine, c0: Vec::new(), levels: Vec::new(), next_index: 0, passes: 0 }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn pushed(&self) -> u64 {
        self.next_index
    }

    /// Pushes the next item; its index is the number of items pushed before it.
    pub fn push(&mut self, e: Hyperedge<T>) -> Result<()> {
        let t = self.next_index;
        self.push_at(e, t)
    }

    /// Pushes with an explicit index, which must exceed all earlier ones.
    pub fn push_at(&mut self, e: Hyperedge<T>, t: u64) -> Result<()> {
        if t < self.next_index {
            return Err(Error::InvalidInput(format!("index {t} is not increasing")));
        }
        if e.vertices().last().is_some_and(|&v| v >= self.n) {
            return Err(Error::InvalidInput("hyperedge vertex out of range".into()));
        }
        self.next_index = t + 1;
        self.c0.insert(0, StoredItem { edge: e, index: t, factor: T::one() });
        if self.c0.len() == self.block_size {
            self.flush()?;
        }
        Ok(())
    }

    fn flush(&mut self) -> Result<()> {
        let i = self.levels.iter().position(Option::is_none).unwrap_or(self.levels.len());
        if i == self.levels.len() {
            self.levels.push(None);
        }
        let mut span = self.c0.len() as u64;
        let mut stream = std::mem::take(&mut self.c0);
        for level in &mut self.levels[..i] {
            let (items, s) = level.take().expect("levels below the first empty one are full");
            stream.extend(items);
            span += s;
        }
        let coreset = match self.routine {
            CoresetRoutine::Identity => stream,
            CoresetRoutine::Online(mut cfg) => {
                cfg.seed = mix_seed(cfg.seed, self.passes);
                cfg.online.seed = mix_seed(cfg.online.seed, self.passes);
                let mut sampler = HyperSampler::new(self.n, cfg);
                let mut kept = Vec::new();
                for item in stream {
                    let d = sampler.step(&item.weighted())?;
                    if d.kept.is_some() {
                        let factor = item.factor / d.probability;
                        kept.push(StoredItem { factor, ..item });
                    }
                }
                kept
            }
        };
        self.passes += 1;
        self.levels[i] = Some((coreset, span));
        Ok(())
    }

    /// `C_0` (newest first).
    pub fn c0(&self) -> &[StoredItem<T>] {
        &self.c0
    }

    /// `C_k` for `k >= 1`.
    pub fn level(&self, k: usize) -> Option<&[StoredItem<T>]> {
        if k == 0 {
            return Some(&self.c0);
        }
        self.levels.get(k - 1).and_then(|l| l.as_ref()).map(|(items, _)| items.as_slice())
    }

    /// Number of allocated levels above `C_0`.
    pub fn level_count(&self) -> usize {
        self.levels.len()
    }

    pub fn stored(&self) -> usize {
        self.c0.len() + self.levels.iter().flatten().map(|(items, _)| items.len()).sum::<usize>()
    }

    /// All stored items, newest level first.
    pub fn stored_items(&self) -> impl Iterator<Item = &StoredItem<T>> {
        self.c0.iter().chain(self.levels.iter().flatten().flat_map(|(items, _)| items.iter()))
    }

    pub fn query(&self, window: u64) -> Hypergraph<T> {
        self.query_with(window, QueryMode::Filtered)
    }

    /// Sparsifier of the last `window` items, in arrival order.
    pub fn query_with(&self, window: u64, mode: QueryMode) -> Hypergraph<T> {
        assert!(window >= 1, "window must be at least one");
        let mut items: Vec<&StoredItem<T>> = match mode {
            QueryMode::Filtered => {
                let start = self.next_index.saturating_sub(window);
                self.stored_items().filter(|it| it.index >= start).collect()
            }
            QueryMode::LevelUnion => {
                let mut out: Vec<&StoredItem<T>> = self.c0.iter().collect();
                let mut covered = self.c0.len() as u64;
                for (items, span) in self.levels.iter().flatten() {
                    if covered >= window {
                        break;
                    }
                    out.extend(items.iter());
                    covered += span;
                }
                out
            }
        };
        items.sort_by_key(|it| it.index);
        Hypergraph::from_edges(self.n, items.into_iter().map(StoredItem::weighted)).expect("stored items are in range")
    }
}
