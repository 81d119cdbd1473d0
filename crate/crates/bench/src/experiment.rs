//! Budget-matched comparison of the batched online sampler, plain
//! merge-and-reduce, and the online-then-merge-and-reduce streaming pipeline.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use hyperspar_core::graph::{graph_error, LaplacianPinv};
use hyperspar_core::merge_reduce::{ErReducer, MergeReduceTree, StreamPipelineConfig, StreamSparsifier, TreeConfig};
use hyperspar_core::online::{OnlineConfig, SketchMode};
use hyperspar_core::rng::{mix_seed, KeyedUniform};
use hyperspar_core::{Graph64, Rate};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Online,
    MergeReduce,
    Streaming,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Online, Method::MergeReduce, Method::Streaming];

    pub fn name(self) -> &'static str {
        match self {
            Method::Online => "online",
            Method::MergeReduce => "merge_reduce",
            Method::Streaming => "streaming",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "online" => Ok(Method::Online),
            "merge_reduce" | "merge-reduce" => Ok(Method::MergeReduce),
            "streaming" => Ok(Method::Streaming),
            _ => Err(format!("unknown method {s:?}")),
        }
    }
}

/// Constant factors of the three methods.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    /// Online baseline: keep with probability `min(1, c_ol * w R)`.
    pub c_ol: f64,
    /// Offline coreset constant; `c_off * n * ln n` is the intended coreset budget.
    pub c_off: f64,
    /// Online front end of the streaming pipeline.
    pub c_ol_str: f64,
}

impl Constants {
    pub const fn new(c_ol: f64, c_off: f64, c_ol_str: f64) -> Self {
        Self { c_ol, c_off, c_ol_str }
    }

    /// `c_off * n * ln n`.
    pub fn offline_budget(&self, n: usize) -> f64 {
        let n = n as f64;
        self.c_off * n * n.ln()
    }
}

/// Synthetic graph, `n = 100`, `m = 50000`.
pub const SYNTHETIC_TABLE: [(usize, Constants); 6] = [
    (500, Constants::new(0.001, 1.1, 2.0)),
    (1000, Constants::new(0.01, 2.2, 2.5)),
    (1500, Constants::new(0.15, 3.3, 5.5)),
    (2000, Constants::new(0.35, 4.4, 8.0)),
    (2500, Constants::new(0.55, 5.5, 11.5)),
    (3000, Constants::new(0.75, 6.6, 15.0)),
];

/// Facebook ego graph of user 107, `n = 1034`, `m = 53498`.
pub const FACEBOOK_TABLE: [(usize, Constants); 4] = [
    (5000, Constants::new(0.05, 0.69, 0.8)),
    (7500, Constants::new(0.105, 1.0, 0.8)),
    (10000, Constants::new(0.145, 1.333, 1.0)),
    (12500, Constants::new(0.185, 1.667, 1.4)),
];

/// Synthetic graph with `n = 100` and budget 1500, keyed by `m`.
pub const M_SWEEP_TABLE: [(usize, Constants); 10] = [
    (10_000, Constants::new(0.3, 3.3, 15.0)),
    (20_000, Constants::new(0.2, 3.3, 7.0)),
    (30_000, Constants::new(0.15, 3.3, 5.5)),
    (40_000, Constants::new(0.1, 3.3, 4.8)),
    (50_000, Constants::new(0.08, 3.3, 4.3)),
    (60_000, Constants::new(0.05, 3.3, 4.05)),
    (70_000, Constants::new(0.04, 3.3, 3.75)),
    (80_000, Constants::new(0.02, 3.3, 3.75)),
    (90_000, Constants::new(0.005, 3.3, 3.7)),
    (100_000, Constants::new(0.002, 3.3, 3.2)),
];

pub fn lookup(table: &[(usize, Constants)], key: usize) -> Option<Constants> {
    table.iter().find(|(k, _)| *k == key).map(|(_, c)| *c)
}

/// Table entry with the nearest key.
pub fn nearest(table: &[(usize, Constants)], key: usize) -> Constants {
    table.iter().min_by_key(|(k, _)| k.abs_diff(key)).expect("nonempty table").1
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub budgets: Vec<usize>,
    /// Constants for each budget, same order as `budgets`.
    pub constants: Vec<Constants>,
    pub methods: Vec<Method>,
    pub trials: usize,
    /// Edges per reference-Laplacian refresh in the online baseline.
    pub batch_size: usize,
    /// Accepted distance of the mean stored count from the budget.
    pub tolerance: usize,
    /// Probe runs per candidate when tuning the online constant.
    pub online_probes: usize,
    /// Probe runs per candidate when tuning a block size.
    pub tree_probes: usize,
    /// Sweep bounds for the online constant.
    pub sweep: (f64, f64),
    pub seed: u64,
}

impl ExperimentConfig {
    /// Defaults with constants taken from `table` (nearest budget when absent).
    pub fn from_table(budgets: Vec<usize>, table: &[(usize, Constants)]) -> Self {
        let constants = budgets.iter().map(|&b| nearest(table, b)).collect();
        Self::with_constants(budgets, constants)
    }

    pub fn with_constants(budgets: Vec<usize>, constants: Vec<Constants>) -> Self {
        Self {
            budgets,
            constants,
            methods: Method::ALL.to_vec(),
            trials: 5,
            batch_size: 100,
            tolerance: 200,
            online_probes: 10,
            tree_probes: 3,
            sweep: (1e-4, 1e2),
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.trials == 0 {
            return Err("trials must be at least one".into());
        }
        if self.budgets.is_empty() || self.budgets.contains(&0) {
            return Err("budgets must be nonempty and positive".into());
        }
        if self.constants.len() != self.budgets.len() {
            return Err("one constant set per budget is required".into());
        }
        if self.batch_size == 0 {
            return Err("batch size must be positive".into());
        }
        if self.methods.is_empty() {
            return Err("no methods selected".into());
        }
        if !(self.sweep.0 > 0.0 && self.sweep.0 < self.sweep.1) {
            return Err("invalid sweep bounds".into());
        }
        Ok(())
    }
}

/// One seeded repetition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRow {
    pub method: Method,
    pub budget: usize,
    pub trial: usize,
    pub stored_edges: usize,
    pub error: f64,
    pub seconds: f64,
}

/// Arithmetic means over the trials of one method and budget.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub method: Method,
    pub budget: usize,
    pub stored_edges: f64,
    pub error: f64,
    pub seconds: f64,
}

/// The tuned knob: the online constant, or the block size for tree methods.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tuning {
    pub method: Method,
    pub budget: usize,
    pub parameter: f64,
    /// Mean stored count over the probe runs at `parameter`.
    pub probe_mean: f64,
    pub feasible: bool,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Report {
    pub trials: Vec<TrialRow>,
    pub summary: Vec<ResultRow>,
    pub tuning: Vec<Tuning>,
}

impl Report {
    pub fn result(&self, method: Method, budget: usize) -> Option<&ResultRow> {
        self.summary.iter().find(|r| r.method == method && r.budget == budget)
    }

    pub fn tuning_for(&self, method: Method, budget: usize) -> Option<&Tuning> {
        self.tuning.iter().find(|t| t.method == method && t.budget == budget)
    }

    pub fn infeasible(&self) -> impl Iterator<Item = &Tuning> {
        self.tuning.iter().filter(|t| !t.feasible)
    }
}

/// Leverage `w R_uv` of each edge against the graph of all edges in earlier
/// batches; infinite when the endpoints are not yet connected.
pub fn batched_online_scores(g: &Graph64, batch: usize) -> Vec<f64> {
    let n = g.n();
    let mut prefix = Graph64::new(n);
    let mut scores = Vec::with_capacity(g.len());
    for chunk in g.edges().chunks(batch.max(1)) {
        let pinv = LaplacianPinv::from_graph(&prefix).expect("prefix Laplacian");
        for e in chunk {
            scores.push(pinv.resistance(e.u, e.v).finite().map_or(f64::INFINITY, |r| r * e.w));
        }
        for e in chunk {
            prefix.push(*e).expect("edges of g are valid");
        }
    }
    scores
}

const ONLINE_STREAM: u64 = 0x6f6e;

fn online_keep_probability(score: f64, c: f64) -> f64 {
    if score.is_infinite() {
        1.0
    } else {
        (c * score).min(1.0)
    }
}

/// Number of edges the online baseline keeps for precomputed scores.
pub fn online_kept_count(scores: &[f64], c: f64, seed: u64) -> usize {
    let mut draws = KeyedUniform::new(seed, ONLINE_STREAM);
    scores
        .iter()
        .enumerate()
        .filter(|&(i, &s)| draws.uniform(i as u64) < online_keep_probability(s, c))
        .count()
}

/// The online baseline's reweighted sample.
pub fn online_sample(g: &Graph64, scores: &[f64], c: f64, seed: u64) -> Graph64 {
    let mut draws = KeyedUniform::new(seed, ONLINE_STREAM);
    let kept = g.edges().iter().zip(scores).enumerate().filter_map(|(i, (e, &s))| {
        let p = online_keep_probability(s, c);
        (draws.uniform(i as u64) < p).then(|| e.reweighted(1.0 / p))
    });
    Graph64::from_edges(g.n(), kept.collect::<Vec<_>>()).expect("subgraph of g")
}

/// Reducer rate `rho = M / n`: a reduced coreset holds about `M` edges.
pub fn reducer_rate(block: usize, n: usize) -> f64 {
    block as f64 / n.max(1) as f64
}

/// Returns the final coreset union and the peak number of resident edges.
pub fn run_merge_reduce(g: &Graph64, block: usize, rho: f64, seed: u64) -> (Graph64, usize) {
    let reducer = ErReducer { n: g.n(), rho: Rate::Finite(rho), seed };
    let mut t = MergeReduceTree::new(block, reducer);
    for e in g.edges() {
        t.push(*e);
    }
    (t.sparsifier(g.n()), t.peak_stored())
}

pub fn streaming_config(c_ol_str: f64, block: usize, rho: f64, budget: usize, seed: u64) -> StreamPipelineConfig<f64> {
    StreamPipelineConfig {
        online: OnlineConfig::new(c_ol_str, mix_seed(seed, 1)),
        tree: TreeConfig { block_size: block, rho: Some(Rate::Finite(rho)), seed: mix_seed(seed, 2) },
        mode: SketchMode::External,
        budget: Some(budget),
    }
}

pub fn run_streaming(g: &Graph64, c_ol_str: f64, block: usize, rho: f64, budget: usize, seed: u64) -> (Graph64, usize) {
    let mut s = StreamSparsifier::new(g.n(), &streaming_config(c_ol_str, block, rho, budget, seed));
    for e in g.edges() {
        s.push(e);
    }
    (s.sparsifier(), s.peak_stored())
}

fn error_of(g: &Graph64, h: &Graph64) -> f64 {
    graph_error(g, h).unwrap_or(f64::INFINITY)
}

fn within(mean: f64, budget: usize, tol: usize) -> bool {
    (mean - budget as f64).abs() <= tol as f64
}

/// Log-scale bisection for a knob whose stored count grows with it.
fn tune_constant(start: f64, bounds: (f64, f64), budget: usize, tol: usize, mut probe: impl FnMut(f64) -> f64) -> (f64, f64, bool) {
    let target = budget as f64;
    let (mut lo, mut hi) = bounds;
    let mut x = start.clamp(lo, hi);
    let mut best = (x, f64::NAN);
    for _ in 0..60 {
        let mean = probe(x);
        if best.1.is_nan() || (mean - target).abs() < (best.1 - target).abs() {
            best = (x, mean);
        }
        if within(mean, budget, tol) {
            return (x, mean, true);
        }
        if mean < target {
            lo = x;
        } else {
            hi = x;
        }
        if hi / lo < 1.0 + 1e-9 {
            break;
        }
        x = (lo * hi).sqrt();
    }
    (best.0, best.1, false)
}

/// Integer bisection on the block size; aims for the middle of the band and
/// keeps the closest candidate seen.
fn tune_block(budget: usize, tol: usize, mut probe: impl FnMut(usize) -> f64) -> (usize, f64, bool) {
    let target = budget as f64;
    let (mut lo, mut hi) = (1usize, budget.max(1));
    let mut best: Option<(usize, f64)> = None;
    while lo <= hi {
        let mid = lo + (hi - lo) / 2;
        let mean = probe(mid);
        if best.is_none_or(|(_, b)| (mean - target).abs() < (b - target).abs()) {
            best = Some((mid, mean));
        }
        if (mean - target).abs() <= tol as f64 / 2.0 {
            break;
        }
        if mean < target {
            lo = mid + 1;
        } else if mid == 1 {
            break;
        } else {
            hi = mid - 1;
        }
    }
    let (block, mean) = best.expect("at least one probe");
    (block, mean, within(mean, budget, tol))
}

fn mean(xs: impl IntoIterator<Item = f64>) -> f64 {
    let (s, k) = xs.into_iter().fold((0.0, 0usize), |(s, k), x| (s + x, k + 1));
    s / k.max(1) as f64
}

fn probe_seed(seed: u64, i: usize) -> u64 {
    mix_seed(seed, 0x7072_6f62_0000 + i as u64)
}

/// Block size for a tree method whose mean peak over `probes` seeded runs is
/// closest to `budget`.
pub fn tune_tree_block(g: &Graph64, method: Method, c_ol_str: f64, budget: usize, tolerance: usize, probes: usize, seed: u64) -> Tuning {
    let peak = |b: usize, s: u64| match method {
        Method::Streaming => run_streaming(g, c_ol_str, b, reducer_rate(b, g.n()), budget, s).1,
        _ => run_merge_reduce(g, b, reducer_rate(b, g.n()), s).1,
    };
    let (b, m, ok) = tune_block(budget, tolerance, |b| mean((0..probes.max(1)).map(|i| peak(b, probe_seed(seed, i)) as f64)));
    Tuning { method, budget, parameter: b as f64, probe_mean: m, feasible: ok }
}

pub fn trial_seed(seed: u64, trial: usize) -> u64 {
    mix_seed(seed, trial as u64)
}

/// Tunes each method to each budget, then runs the seeded trials.
pub fn run_experiment(g: &Graph64, cfg: &ExperimentConfig) -> Result<Report, String> {
    cfg.validate()?;
    let mut report = Report::default();
    let scores_started = Instant::now();
    let scores = cfg.methods.contains(&Method::Online).then(|| batched_online_scores(g, cfg.batch_size));
    let score_seconds = scores_started.elapsed().as_secs_f64();

    for (&budget, constants) in cfg.budgets.iter().zip(&cfg.constants) {
        for &method in &cfg.methods {
            let tuning = match method {
                Method::Online => {
                    let scores = scores.as_deref().expect("scores computed");
                    let (c, m, ok) = tune_constant(constants.c_ol, cfg.sweep, budget, cfg.tolerance, |c| {
                        mean((0..cfg.online_probes).map(|i| online_kept_count(scores, c, probe_seed(cfg.seed, i)) as f64))
                    });
                    Tuning { method, budget, parameter: c, probe_mean: m, feasible: ok }
                }
                Method::MergeReduce | Method::Streaming => {
                    tune_tree_block(g, method, constants.c_ol_str, budget, cfg.tolerance, cfg.tree_probes, cfg.seed)
                }
            };

            let block = tuning.parameter as usize;
            let start = report.trials.len();
            for trial in 0..cfg.trials {
                let seed = trial_seed(cfg.seed, trial);
                let t0 = Instant::now();
                let (h, stored) = match method {
                    Method::Online => {
                        // Scores are shared across trials; charge their cost to every trial.
                        let h = online_sample(g, scores.as_deref().expect("scores computed"), tuning.parameter, seed);
                        let k = h.len();
                        (h, k)
                    }
                    Method::MergeReduce => run_merge_reduce(g, block, reducer_rate(block, g.n()), seed),
                    Method::Streaming => run_streaming(g, constants.c_ol_str, block, reducer_rate(block, g.n()), budget, seed),
                };
                let mut seconds = t0.elapsed().as_secs_f64();
                if method == Method::Online {
                    seconds += score_seconds;
                }
                report.trials.push(TrialRow { method, budget, trial, stored_edges: stored, error: error_of(g, &h), seconds });
            }
            let rows = &report.trials[start..];
            report.summary.push(ResultRow {
                method,
                budget,
                stored_edges: mean(rows.iter().map(|r| r.stored_edges as f64)),
                error: mean(rows.iter().map(|r| r.error)),
                seconds: mean(rows.iter().map(|r| r.seconds)),
            });
            report.tuning.push(tuning);
        }
    }
    Ok(report)
}

/// Aggregates trial rows into per-method, per-budget means (sorted by method, then budget).
pub fn summarize(trials: &[TrialRow]) -> Vec<ResultRow> {
    let mut keys: Vec<(Method, usize)> = trials.iter().map(|r| (r.method, r.budget)).collect();
    keys.sort_unstable();
    keys.dedup();
    keys.into_iter()
        .map(|(method, budget)| {
            let rows: Vec<&TrialRow> = trials.iter().filter(|r| r.method == method && r.budget == budget).collect();
            ResultRow {
                method,
                budget,
                stored_edges: mean(rows.iter().map(|r| r.stored_edges as f64)),
                error: mean(rows.iter().map(|r| r.error)),
                seconds: mean(rows.iter().map(|r| r.seconds)),
            }
        })
        .collect()
}
