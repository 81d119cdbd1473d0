//! Online row sampling with ridge leverage probabilities.
//!
//! Each arriving incidence row `a` is scored as `a^T (M^T M + lambda I)^{-1} a`
//! against the current sketch `M` and kept with probability `min(1, c * score)`,
//! reweighted by `1/sqrt(p)`. The inverse is maintained with rank-one updates
//! and refreshed from the Gram matrix periodically.

use nalgebra::{Cholesky, DMatrix, DVector};

use crate::graph::{add_edge_to_laplacian, Graph, IncidenceRow, LaplacianPinv, SpectralSketch, WeightedEdge};
use crate::rng::KeyedUniform;
use crate::scalar::{Rate, Scalar};

/// How the ridge parameter is chosen.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LambdaPolicy<T> {
    Fixed(T),
    /// `lambda = eps * w_min / n^2` with `w_min` the smallest row weight seen so far.
    Adaptive { eps: T },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OnlineConfig<T> {
    /// Probability multiplier `c`.
    pub c: Rate<T>,
    pub lambda: LambdaPolicy<T>,
    pub seed: u64,
}

/// Default multiplier constant in `c = alpha * ln(max(m, 2)) / eps^2`.
pub const DEFAULT_ALPHA: f64 = 4.0;

impl<T: Scalar> OnlineConfig<T> {
    pub fn new(c: T, seed: u64) -> Self {
        Self { c: Rate::Finite(c), lambda: LambdaPolicy::Adaptive { eps: T::one() }, seed }
    }

    /// `c = alpha * ln(max(m, 2)) / eps^2`, with adaptive ridge `lambda` at the same `eps`.
    pub fn for_accuracy(eps: T, m: usize, alpha: T, seed: u64) -> Self {
        let m = T::from_usize_lossy(m.max(2));
        Self {
            c: Rate::Finite(alpha * m.ln() / (eps * eps)),
            lambda: LambdaPolicy::Adaptive { eps },
            seed,
        }
    }

    pub fn with_lambda(mut self, lambda: LambdaPolicy<T>) -> Self {
        self.lambda = lambda;
        self
    }
}

/// Where the sampler reads its spectral approximation from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SketchMode {
    /// Kept rows form the sketch (row sampling as usually stated).
    SelfSketch,
    /// The caller feeds the sketch through [`OnlineSampler::external_add`] and
    /// [`OnlineSampler::external_reset`]; kept rows are handed back, not retained.
    External,
}

/// `(G + lambda I)^{-1}` for a Laplacian-like Gram matrix `G`, kept current
/// under row insertions.
#[derive(Clone, Debug)]
pub struct RidgeInverse<T: Scalar> {
    lambda: T,
    gram: DMatrix<T>,
    inv: DMatrix<T>,
    since_refresh: usize,
    refresh_every: usize,
}

impl<T: Scalar> RidgeInverse<T> {
    pub fn new(n: usize, lambda: T) -> Self {
        assert!(lambda > T::zero(), "ridge lambda must be positive");
        Self {
            lambda,
            gram: DMatrix::zeros(n, n),
            inv: DMatrix::identity(n, n) / lambda,
            since_refresh: 0,
            refresh_every: (4 * n).max(64),
        }
    }

    pub fn lambda(&self) -> T {
        self.lambda
    }

    pub fn gram(&self) -> &DMatrix<T> {
        &self.gram
    }

    pub fn score(&self, row: &IncidenceRow<T>) -> T {
        row.quadratic_form(&self.inv)
    }

    /// Sherman-Morrison update for `G += a a^T`.
    pub fn add(&mut self, row: &IncidenceRow<T>) {
        add_edge_to_laplacian(&mut self.gram, row.u, row.v, row.weight());
        let (u, v, w) = (row.u, row.v, row.w);
        let xa: DVector<T> = self.inv.column(u) - self.inv.column(v);
        let denom = T::one() + w * (xa[u] - xa[v]);
        self.inv.ger(-w / denom, &xa, &xa, T::one());
        self.since_refresh += 1;
        if self.since_refresh >= self.refresh_every {
            self.refresh();
        }
    }

    pub fn set_gram(&mut self, gram: DMatrix<T>) {
        self.gram = gram;
        self.refresh();
    }

    pub fn set_lambda(&mut self, lambda: T) {
        self.lambda = lambda;
        self.refresh();
    }

    pub fn refresh(&mut self) {
        let n = self.gram.nrows();
        let mut m = self.gram.clone();
        for i in 0..n {
            m[(i, i)] += self.lambda;
        }
        self.inv = match Cholesky::new(m.clone()) {
            Some(ch) => ch.inverse(),
            None => m.try_inverse().expect("ridge-regularized Gram matrix is invertible"),
        };
        self.since_refresh = 0;
    }
}

/// Outcome of feeding one row to the sampler.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RowDecision<T> {
    pub index: u64,
    /// Ridge leverage score against the sketch before this row.
    pub score: T,
    pub probability: T,
    /// The row `a / sqrt(p)` when sampled.
    pub kept: Option<IncidenceRow<T>>,
}

impl<T: Scalar> RowDecision<T> {
    pub fn is_kept(&self) -> bool {
        self.kept.is_some()
    }

    pub fn kept_edge(&self) -> Option<WeightedEdge<T>> {
        self.kept.map(|r| r.edge())
    }
}

#[derive(Clone, Debug)]
pub struct OnlineSampler<T: Scalar> {
    n: usize,
    cfg: OnlineConfig<T>,
    mode: SketchMode,
    ridge: RidgeInverse<T>,
    sketch: SpectralSketch<T>,
    draws: KeyedUniform,
    index: u64,
    score_sum: T,
    kept_count: usize,
    w_min: Option<T>,
}

impl<T: Scalar> OnlineSampler<T> {
    pub fn new(n: usize, cfg: OnlineConfig<T>, mode: SketchMode) -> Self {
        let lambda = match cfg.lambda {
            LambdaPolicy::Fixed(l) => l,
            LambdaPolicy::Adaptive { eps } => eps / T::from_usize_lossy((n * n).max(1)),
        };
        Self {
            n,
            cfg,
            mode,
            ridge: RidgeInverse::new(n, lambda),
            sketch: SpectralSketch::new(n),
            draws: KeyedUniform::new(cfg.seed, 0x6f6e),
            index: 0,
            score_sum: T::zero(),
            kept_count: 0,
            w_min: None,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn config(&self) -> &OnlineConfig<T> {
        &self.cfg
    }

    pub fn mode(&self) -> SketchMode {
        self.mode
    }

    pub fn lambda(&self) -> T {
        self.ridge.lambda()
    }

    pub fn score_sum(&self) -> T {
        self.score_sum
    }

    pub fn kept_count(&self) -> usize {
        self.kept_count
    }

    pub fn rows_seen(&self) -> u64 {
        self.index
    }

    pub fn sketch(&self) -> &SpectralSketch<T> {
        &self.sketch
    }

    /// Gram matrix of the sketch the scores are computed against.
    pub fn gram(&self) -> &DMatrix<T> {
        self.ridge.gram()
    }

    /// Current ridge score of `row` without consuming it.
    pub fn peek_score(&self, row: &IncidenceRow<T>) -> T {
        self.ridge.score(row)
    }

    fn observe_weight(&mut self, w: T) {
        let LambdaPolicy::Adaptive { eps } = self.cfg.lambda else {
            return;
        };
        if self.w_min.is_some_and(|m| m <= w) {
            return;
        }
        self.w_min = Some(w);
        let lambda = eps * w / T::from_usize_lossy((self.n * self.n).max(1));
        self.ridge.set_lambda(lambda);
    }

    pub fn process_row(&mut self, row: IncidenceRow<T>) -> RowDecision<T> {
        assert!(row.u < self.n && row.v < self.n, "row outside sampler dimension");
        self.observe_weight(row.weight());
        let score = self.ridge.score(&row);
        let p = self.cfg.c.probability(score);
        let index = self.index;
        self.index += 1;
        self.score_sum += score;

        let keep = p >= T::one() || self.draws.uniform(index) < p.as_f64();
        let kept = keep.then(|| row.reweighted(p));
        if let Some(r) = kept {
            self.kept_count += 1;
            if self.mode == SketchMode::SelfSketch {
                self.sketch.push(r);
                self.ridge.add(&r);
            }
        }
        RowDecision { index, score, probability: p, kept }
    }

    pub fn process_edge(&mut self, e: &WeightedEdge<T>) -> RowDecision<T> {
        self.process_row(e.row())
    }

    /// Adds a row to the external sketch.
    pub fn external_add(&mut self, row: &IncidenceRow<T>) {
        debug_assert_eq!(self.mode, SketchMode::External);
        self.ridge.add(row);
    }

    /// Replaces the external sketch by the Laplacian of `g`.
    pub fn external_reset(&mut self, g: &Graph<T>) {
        debug_assert_eq!(self.mode, SketchMode::External);
        self.ridge.set_gram(g.laplacian());
    }

    /// Reweighted sampled edges in arrival order. Non-destructive; in external
    /// mode nothing is retained and the result is empty.
    pub fn finalize(&self) -> Graph<T> {
        self.sketch.to_graph()
    }
}

/// Exact online leverage `a_i (A_i^T A_i)^+ a_i^T` of every edge against the
/// full prefix including itself. Always in `(0, 1]`.
pub fn exact_online_leverages<T: Scalar>(g: &Graph<T>) -> Vec<T> {
    let n = g.n();
    let mut l = DMatrix::zeros(n, n);
    let mut prefix = Vec::with_capacity(g.len());
    let mut out = Vec::with_capacity(g.len());
    for e in g.edges() {
        add_edge_to_laplacian(&mut l, e.u, e.v, e.w);
        prefix.push((e.u, e.v));
        let comp = crate::graph::components(n, prefix.iter().copied());
        let pinv = LaplacianPinv::from_parts(l.clone(), comp).expect("prefix Laplacian");
        let r = pinv.resistance(e.u, e.v).finite().expect("edge connects its endpoints");
        out.push((e.w * r).min(T::one()));
    }
    out
}
