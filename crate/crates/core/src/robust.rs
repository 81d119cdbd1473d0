//! Adversarially robust sparsification by lazy output switching.
//!
//! The wrapper runs an ordinary streaming sparsifier but exposes a frozen
//! snapshot, replacing it only when some Laplacian eigenvalue of the current
//! snapshot has drifted by more than a `(1 + eps/8)` factor from the exposed
//! one. The exposed output therefore changes a bounded number of times, which
//! limits what an adaptive adversary can learn.

use std::io::Write;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::graph::{graph_error, Graph, WeightedEdge};
use crate::hypergraph::{
    HyperSamplerConfig, HyperStreamConfig, HyperStreamSparsifier, HyperVariant, Hyperedge, Hypergraph,
};
use crate::merge_reduce::{block_size_for_accuracy, StreamPipelineConfig, StreamSparsifier, TreeConfig, DEFAULT_C_OFF};
use crate::online::{OnlineConfig, SketchMode, DEFAULT_ALPHA};
use crate::rng::mix_seed;
use crate::scalar::{Rate, Scalar};

/// Sorted Laplacian eigenvalues.
pub fn laplacian_spectrum<T: Scalar>(l: &DMatrix<T>) -> Vec<T> {
    let mut ev: Vec<T> = SymmetricEigen::new(l.clone()).eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));
    ev
}

/// True when every eigenvalue of `next` is within a factor `gate` of `base`.
/// Eigenvalues below `zero_tol * max` count as zero, and a zero becoming
/// nonzero (or the reverse) is a violation.
pub fn within_gate<T: Scalar>(base: &[T], next: &[T], gate: T) -> bool {
    let top = base.iter().chain(next).fold(T::zero(), |a, &b| a.max(b.abs()));
    let zero = T::lit(1e-9) * top.max(T::one());
    base.iter().zip(next).all(|(&b, &x)| {
        let (bz, xz) = (b.abs() <= zero, x.abs() <= zero);
        match (bz, xz) {
            (true, true) => true,
            (false, false) => x <= b * gate && b <= x * gate,
            _ => false,
        }
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RobustConfig<T> {
    pub eps: T,
    /// Inner streaming sparsifier, normally built at `eps / 8`.
    pub inner: StreamPipelineConfig<T>,
    /// Failure probability budget of the inner sparsifier. Informational.
    pub delta_prime: T,
}

impl<T: Scalar> RobustConfig<T> {
    /// Gate `1 + eps/8` and an inner sparsifier at `eps/8` for a stream of `m` edges.
    pub fn for_accuracy(n: usize, m: usize, eps: T, seed: u64) -> Self {
        let inner_eps = eps / T::lit(8.0);
        let online = OnlineConfig::for_accuracy(inner_eps, m, T::lit(DEFAULT_ALPHA), mix_seed(seed, 11));
        let block = block_size_for_accuracy(n, inner_eps.as_f64(), DEFAULT_C_OFF);
        Self {
            eps,
            inner: StreamPipelineConfig {
                online,
                tree: TreeConfig { block_size: block, rho: None, seed: mix_seed(seed, 12) },
                mode: SketchMode::External,
                budget: None,
            },
            delta_prime: T::lit(0.01),
        }
    }

    pub fn gate(&self) -> T {
        T::one() + self.eps / T::lit(8.0)
    }
}

/// Switches the exposed graph only on eigenvalue gate violations.
#[derive(Clone, Debug)]
pub struct RobustGraphWrapper<T: Scalar> {
    n: usize,
    gate: T,
    inner: StreamSparsifier<T>,
    exposed: Graph<T>,
    exposed_spectrum: Vec<T>,
    switch_count: usize,
    last_switched: bool,
}

impl<T: Scalar> RobustGraphWrapper<T> {
    pub fn new(n: usize, cfg: &RobustConfig<T>) -> Self {
        Self {
            n,
            gate: cfg.gate(),
            inner: StreamSparsifier::new(n, &cfg.inner),
            exposed: Graph::new(n),
            exposed_spectrum: vec![T::zero(); n],
            switch_count: 0,
            last_switched: false,
        }
    }

    pub fn step(&mut self, e: &WeightedEdge<T>) -> &Graph<T> {
        self.inner.push(e);
        let snapshot = self.inner.sparsifier();
        let spectrum = laplacian_spectrum(&snapshot.laplacian());
        self.last_switched = !within_gate(&self.exposed_spectrum, &spectrum, self.gate);
        if self.last_switched {
            self.exposed = snapshot;
            self.exposed_spectrum = spectrum;
            self.switch_count += 1;
        }
        &self.exposed
    }

    pub fn exposed(&self) -> &Graph<T> {
        &self.exposed
    }

    pub fn exposed_spectrum(&self) -> &[T] {
        &self.exposed_spectrum
    }

    pub fn switch_count(&self) -> usize {
        self.switch_count
    }

    /// Whether the most recent step replaced the exposed output.
    pub fn switched(&self) -> bool {
        self.last_switched
    }

    pub fn inner(&self) -> &StreamSparsifier<T> {
        &self.inner
    }

    pub fn n(&self) -> usize {
        self.n
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RobustHyperConfig<T> {
    pub eps: T,
    /// Rank bound `r` used for the gate accuracy `eps / (8 r^2)`.
    pub rank: usize,
    /// Gate wrapper on the associated graph.
    pub graph: RobustConfig<T>,
    /// Hypergraph streaming sparsifier, normally at `eps / 8`.
    pub inner: HyperStreamConfig<T>,
}

impl<T: Scalar> RobustHyperConfig<T> {
    pub fn for_accuracy(n: usize, m: usize, rank: usize, eps: T, seed: u64) -> Self {
        let r2 = T::from_usize_lossy(rank * rank);
        let graph_eps = eps / (T::lit(8.0) * r2);
        let pairs = m * rank * (rank.max(2) - 1) / 2;
        let graph = RobustConfig::for_accuracy(n, pairs, graph_eps, mix_seed(seed, 21));
        let inner_eps = (eps / T::lit(8.0)).as_f64();
        let rho = crate::hypergraph::fast_rho(crate::hypergraph::DEFAULT_BETA, rank, m, 0.01, inner_eps);
        let sampler = HyperSamplerConfig::new(HyperVariant::Fast, Rate::Finite(T::lit(rho)), pairs, mix_seed(seed, 22));
        let block = block_size_for_accuracy(n, inner_eps, DEFAULT_C_OFF);
        Self {
            eps,
            rank,
            graph,
            inner: HyperStreamConfig { sampler, block_size: block, rho: None, tree_seed: mix_seed(seed, 23) },
        }
    }
}

/// Exposes the hypergraph sparsifier's snapshot exactly when the associated
/// graph wrapper switches.
#[derive(Clone, Debug)]
pub struct RobustHyperWrapper<T: Scalar> {
    graph: RobustGraphWrapper<T>,
    inner: HyperStreamSparsifier<T>,
    exposed: Hypergraph<T>,
    switch_count: usize,
    last_switched: bool,
}

impl<T: Scalar> RobustHyperWrapper<T> {
    pub fn new(n: usize, cfg: &RobustHyperConfig<T>) -> Self {
        Self {
            graph: RobustGraphWrapper::new(n, &cfg.graph),
            inner: HyperStreamSparsifier::new(n, &cfg.inner),
            exposed: Hypergraph::new(n),
            switch_count: 0,
            last_switched: false,
        }
    }

    pub fn step(&mut self, e: &Hyperedge<T>) -> crate::error::Result<&Hypergraph<T>> {
        let before = self.graph.switch_count();
        for (u, v) in e.pairs() {
            self.graph.step(&WeightedEdge { u, v, w: e.w });
        }
        self.inner.push(e)?;
        self.last_switched = self.graph.switch_count() != before;
        if self.last_switched {
            self.exposed = self.inner.sparsifier();
            self.switch_count += 1;
        }
        Ok(&self.exposed)
    }

    pub fn exposed(&self) -> &Hypergraph<T> {
        &self.exposed
    }

    pub fn switch_count(&self) -> usize {
        self.switch_count
    }

    pub fn switched(&self) -> bool {
        self.last_switched
    }

    pub fn graph_wrapper(&self) -> &RobustGraphWrapper<T> {
        &self.graph
    }
}

/// Produces the next input from the outputs exposed so far.
pub trait Adversary<I, O> {
    fn next(&mut self, round: usize, exposed: &O) -> I;
}

/// Ignores the exposed output: uniform random pairs with `U(1, 10)` weights.
#[derive(Clone, Debug)]
pub struct ObliviousEdges {
    n: usize,
    rng: ChaCha8Rng,
}

impl ObliviousEdges {
    pub fn new(n: usize, seed: u64) -> Self {
        assert!(n >= 2);
        Self { n, rng: ChaCha8Rng::seed_from_u64(seed) }
    }
}

fn random_pair(rng: &mut ChaCha8Rng, n: usize) -> (usize, usize) {
    let u = rng.random_range(0..n);
    let mut v = rng.random_range(0..n);
    while v == u {
        v = rng.random_range(0..n);
    }
    (u, v)
}

impl<T: Scalar> Adversary<WeightedEdge<T>, Graph<T>> for ObliviousEdges {
    fn next(&mut self, _round: usize, _exposed: &Graph<T>) -> WeightedEdge<T> {
        let (u, v) = random_pair(&mut self.rng, self.n);
        WeightedEdge { u, v, w: T::lit(self.rng.random_range(1.0..10.0)) }
    }
}

/// Inserts an edge on the pair the exposed sparsifier currently weights least,
/// ties broken uniformly at random, with a `U(1, 10)` weight.
#[derive(Clone, Debug)]
pub struct MinExposedWeight {
    rng: ChaCha8Rng,
}

impl MinExposedWeight {
    pub fn new(seed: u64) -> Self {
        Self { rng: ChaCha8Rng::seed_from_u64(seed) }
    }
}

impl<T: Scalar> Adversary<WeightedEdge<T>, Graph<T>> for MinExposedWeight {
    fn next(&mut self, _round: usize, exposed: &Graph<T>) -> WeightedEdge<T> {
        let n = exposed.n();
        let mut w = DMatrix::<f64>::zeros(n, n);
        for e in exposed.edges() {
            w[(e.u, e.v)] += e.w.as_f64();
            w[(e.v, e.u)] += e.w.as_f64();
        }
        let mut best = f64::INFINITY;
        let mut ties = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                let x = w[(u, v)];
                if x < best {
                    best = x;
                    ties.clear();
                }
                if x == best {
                    ties.push((u, v));
                }
            }
        }
        let (u, v) = ties[self.rng.random_range(0..ties.len())];
        WeightedEdge { u, v, w: T::lit(self.rng.random_range(1.0..10.0)) }
    }
}

/// Random hyperedges of size `2..=rank` with `U(1, 10)` weights.
#[derive(Clone, Debug)]
pub struct ObliviousHyperedges {
    n: usize,
    rank: usize,
    rng: ChaCha8Rng,
}

impl ObliviousHyperedges {
    pub fn new(n: usize, rank: usize, seed: u64) -> Self {
        assert!(rank >= 2 && rank <= n);
        Self { n, rank, rng: ChaCha8Rng::seed_from_u64(seed) }
    }
}

pub fn random_hyperedge<T: Scalar>(rng: &mut impl Rng, n: usize, rank: usize) -> Hyperedge<T> {
    let k = rng.random_range(2..=rank);
    let vs = rand::seq::index::sample(rng, n, k).into_vec();
    Hyperedge::new(vs, T::lit(rng.random_range(1.0..10.0))).expect("distinct vertices, positive weight")
}

impl<T: Scalar> Adversary<Hyperedge<T>, Hypergraph<T>> for ObliviousHyperedges {
    fn next(&mut self, _round: usize, _exposed: &Hypergraph<T>) -> Hyperedge<T> {
        random_hyperedge(&mut self.rng, self.n, self.rank)
    }
}

/// Inserts the `rank`-subset whose pairs carry the least exposed associated
/// weight, with a `U(1, 10)` weight.
#[derive(Clone, Debug)]
pub struct MinExposedHyperWeight {
    rank: usize,
    rng: ChaCha8Rng,
}

impl MinExposedHyperWeight {
    pub fn new(rank: usize, seed: u64) -> Self {
        assert!(rank >= 2);
        Self { rank, rng: ChaCha8Rng::seed_from_u64(seed) }
    }
}

impl<T: Scalar> Adversary<Hyperedge<T>, Hypergraph<T>> for MinExposedHyperWeight {
    fn next(&mut self, _round: usize, exposed: &Hypergraph<T>) -> Hyperedge<T> {
        let n = exposed.n();
        let mut w = DMatrix::<f64>::zeros(n, n);
        for e in exposed.edges() {
            for (u, v) in e.pairs() {
                w[(u, v)] += e.w.as_f64();
                w[(v, u)] += e.w.as_f64();
            }
        }
        let k = self.rank.min(n);
        let mut best = f64::INFINITY;
        let mut ties: Vec<Vec<usize>> = Vec::new();
        let mut subset: Vec<usize> = (0..k).collect();
        loop {
            let mut total = 0.0;
            for i in 0..k {
                for j in i + 1..k {
                    total += w[(subset[i], subset[j])];
                }
            }
            if total < best {
                best = total;
                ties.clear();
            }
            if total == best {
                ties.push(subset.clone());
            }
            // Next k-subset in lexicographic order.
            let Some(i) = (0..k).rev().find(|&i| subset[i] < n - k + i) else {
                break;
            };
            subset[i] += 1;
            for j in i + 1..k {
                subset[j] = subset[j - 1] + 1;
            }
        }
        let vs = ties.swap_remove(self.rng.random_range(0..ties.len()));
        Hyperedge::new(vs, T::lit(self.rng.random_range(1.0..10.0))).expect("distinct vertices")
    }
}

/// A robust algorithm as seen by the game harness.
pub trait GamePlayer<I, O> {
    fn play(&mut self, input: &I) -> crate::error::Result<&O>;
    fn switched(&self) -> bool;
    fn switch_count(&self) -> usize;
}

impl<T: Scalar> GamePlayer<WeightedEdge<T>, Graph<T>> for RobustGraphWrapper<T> {
    fn play(&mut self, input: &WeightedEdge<T>) -> crate::error::Result<&Graph<T>> {
        Ok(self.step(input))
    }
    fn switched(&self) -> bool {
        self.switched()
    }
    fn switch_count(&self) -> usize {
        self.switch_count()
    }
}

impl<T: Scalar> GamePlayer<Hyperedge<T>, Hypergraph<T>> for RobustHyperWrapper<T> {
    fn play(&mut self, input: &Hyperedge<T>) -> crate::error::Result<&Hypergraph<T>> {
        self.step(input)
    }
    fn switched(&self) -> bool {
        self.switched()
    }
    fn switch_count(&self) -> usize {
        self.switch_count()
    }
}

/// Tracks the true prefix and scores an exposed output against it.
pub trait Referee<I, O> {
    fn observe(&mut self, input: &I);
    /// Approximation error of `exposed` for the prefix observed so far.
    fn error(&mut self, exposed: &O) -> f64;
}

/// Two-sided spectral error against the exact prefix graph.
#[derive(Clone, Debug)]
pub struct SpectralReferee<T> {
    prefix: Graph<T>,
}

impl<T: Scalar> SpectralReferee<T> {
    pub fn new(n: usize) -> Self {
        Self { prefix: Graph::new(n) }
    }
}

impl<T: Scalar> Referee<WeightedEdge<T>, Graph<T>> for SpectralReferee<T> {
    fn observe(&mut self, input: &WeightedEdge<T>) {
        self.prefix.push(*input).expect("adversary inputs are valid edges");
    }

    fn error(&mut self, exposed: &Graph<T>) -> f64 {
        graph_error(&self.prefix, exposed).map_or(f64::INFINITY, |e| e.as_f64())
    }
}

/// Worst relative energy error over a fixed set of random probe vectors.
#[derive(Clone, Debug)]
pub struct EnergyReferee<T> {
    prefix: Hypergraph<T>,
    probes: Vec<Vec<T>>,
}

impl<T: Scalar> EnergyReferee<T> {
    pub fn new(n: usize, probes: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let probes = (0..probes)
            .map(|_| {
                (0..n)
                    .map(|_| T::lit(rand_distr::Distribution::sample(&rand_distr::StandardNormal, &mut rng)))
                    .collect()
            })
            .collect();
        Self { prefix: Hypergraph::new(n), probes }
    }
}

/// `max |Q_approx(x) - Q(x)| / Q(x)` over the probes with `Q(x) > 0`; a probe
/// with `Q(x) = 0` counts as exact only if the approximation is zero too.
pub fn energy_error<T: Scalar>(exact: &Hypergraph<T>, approx: &Hypergraph<T>, probes: &[Vec<T>]) -> f64 {
    probes.iter().fold(0.0, |worst, x| {
        let q = exact.energy(x).as_f64();
        let a = approx.energy(x).as_f64();
        let err = if q > 0.0 {
            (a - q).abs() / q
        } else if a.abs() <= 1e-12 {
            0.0
        } else {
            f64::INFINITY
        };
        worst.max(err)
    })
}

impl<T: Scalar> Referee<Hyperedge<T>, Hypergraph<T>> for EnergyReferee<T> {
    fn observe(&mut self, input: &Hyperedge<T>) {
        self.prefix.push(input.clone()).expect("adversary inputs are in range");
    }

    fn error(&mut self, exposed: &Hypergraph<T>) -> f64 {
        energy_error(&self.prefix, exposed, &self.probes)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord<I> {
    pub round: usize,
    pub action: I,
    pub switched: bool,
    pub error: f64,
    pub valid: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Transcript<I> {
    pub rounds: Vec<RoundRecord<I>>,
    pub switch_count: usize,
}

impl<I: Serialize> Transcript<I> {
    pub fn all_valid(&self) -> bool {
        self.rounds.iter().all(|r| r.valid)
    }

    /// One JSON object per round.
    pub fn write_jsonl(&self, mut out: impl Write) -> std::io::Result<()> {
        for r in &self.rounds {
            serde_json::to_writer(&mut out, r)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}

/// Runs `rounds` rounds of the adversary game starting from the output
/// `initial` (normally empty). A round is valid when the referee's error for
/// the exposed output is at most `eps`.
pub fn play_game<I, O, A, P, R>(
    adversary: &mut A,
    player: &mut P,
    referee: &mut R,
    initial: O,
    rounds: usize,
    eps: f64,
) -> crate::error::Result<Transcript<I>>
where
    A: Adversary<I, O>,
    P: GamePlayer<I, O>,
    R: Referee<I, O>,
    O: Clone,
{
    let mut records = Vec::with_capacity(rounds);
    let mut exposed = initial;
    for round in 0..rounds {
        let action = adversary.next(round, &exposed);
        referee.observe(&action);
        exposed = player.play(&action)?.clone();
        let error = referee.error(&exposed);
        records.push(RoundRecord { round, action, switched: player.switched(), error, valid: error <= eps });
    }
    Ok(Transcript { rounds: records, switch_count: player.switch_count() })
}
