//! Balanced weight assignment of a hyperedge over its clique pairs, and the
//! spanning-tree potential used to track its progress.
//!
//! A hyperedge's weight is split among its pairs as `z_uv`. With every pair
//! added to the base graph at weight `z_uv`, the ratio `q_uv` is the
//! effective resistance between `u` and `v`. The assignment is balanced when
//! `gamma * min_{z>0} q >= max q`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::graph::{add_edge_to_laplacian, Graph, LaplacianPinv, Resistance, SpectralSketch};
use crate::hypergraph::Hyperedge;
use crate::scalar::Scalar;

/// Which weight bounds a shift.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum CapRule {
    /// `lambda = min(z_donor, (gamma-1)/(2 gamma q_max))`. Keeps `z >= 0` and `sum z = w`.
    #[default]
    Donor,
    /// `lambda = min(z_recipient, ...)`, with the donor clamped at zero.
    Recipient,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BalanceConfig<T> {
    pub gamma: T,
    /// Shift cap; `None` means `10^4` times the number of pairs.
    pub max_iters: Option<usize>,
    pub cap: CapRule,
}

impl<T: Scalar> Default for BalanceConfig<T> {
    fn default() -> Self {
        Self { gamma: T::lit(2.0), max_iters: None, cap: CapRule::Donor }
    }
}

impl<T: Scalar> BalanceConfig<T> {
    pub fn with_gamma(gamma: T) -> Self {
        assert!(gamma > T::one(), "gamma must exceed one");
        Self { gamma, ..Self::default() }
    }

    fn iteration_cap(&self, pairs: usize) -> usize {
        self.max_iters.unwrap_or(10_000 * pairs.max(1))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct WeightAssignment<T> {
    /// Lexicographic pairs of the hyperedge with their weights.
    pub pairs: Vec<((usize, usize), T)>,
    /// Shifts performed.
    pub iterations: usize,
}

impl<T: Scalar> WeightAssignment<T> {
    pub fn weights(&self) -> Vec<T> {
        self.pairs.iter().map(|&(_, z)| z).collect()
    }

    pub fn total(&self) -> T {
        self.pairs.iter().fold(T::zero(), |s, &(_, z)| s + z)
    }
}

/// Effective resistances `q_uv` for each pair in the base graph augmented by
/// the pairs at weights `z`. Pairs in different components map to infinity.
pub fn pair_resistances<T: Scalar>(base: &DMatrix<T>, pairs: &[(usize, usize)], z: &[T]) -> Vec<T> {
    let n = base.nrows();
    let mut l = base.clone();
    for (&(u, v), &w) in pairs.iter().zip(z) {
        if w > T::zero() {
            add_edge_to_laplacian(&mut l, u, v, w);
        }
    }
    let comp = laplacian_components(&l);
    let pinv = LaplacianPinv::from_parts(l, comp).expect("augmented Laplacian is symmetric");
    debug_assert!(pairs.iter().all(|&(u, v)| u < n && v < n));
    pairs
        .iter()
        .map(|&(u, v)| match pinv.resistance(u, v) {
            Resistance::Finite(r) => r,
            Resistance::Infinite => T::one() / T::zero(),
        })
        .collect()
}

/// Connected components read off the off-diagonal support of a Laplacian.
pub fn laplacian_components<T: Scalar>(l: &DMatrix<T>) -> Vec<usize> {
    let n = l.nrows();
    let links = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).filter(|&(i, j)| l[(i, j)] != T::zero());
    crate::graph::components(n, links)
}

fn extremes<T: Scalar>(q: &[T], z: &[T]) -> (usize, Option<usize>) {
    let mut imax = 0;
    let mut imin: Option<usize> = None;
    for i in 0..q.len() {
        if q[i] > q[imax] {
            imax = i;
        }
        if z[i] > T::zero() && imin.is_none_or(|j| q[i] < q[j]) {
            imin = Some(i);
        }
    }
    (imax, imin)
}

fn balanced_ratios<T: Scalar>(q: &[T], z: &[T], gamma: T) -> bool {
    let (imax, imin) = extremes(q, z);
    match imin {
        Some(i) => gamma * q[i] >= q[imax],
        None => false,
    }
}

/// Balance check against a base Laplacian.
pub fn is_balanced_gram<T: Scalar>(base: &DMatrix<T>, e: &Hyperedge<T>, z: &[T], gamma: T) -> bool {
    let pairs: Vec<_> = e.pairs().collect();
    assert_eq!(pairs.len(), z.len(), "assignment must cover every pair");
    balanced_ratios(&pair_resistances(base, &pairs, z), z, gamma)
}

pub fn is_balanced<T: Scalar>(sketch: &SpectralSketch<T>, e: &Hyperedge<T>, z: &WeightAssignment<T>, gamma: T) -> bool {
    is_balanced_gram(&sketch.gram(), e, &z.weights(), gamma)
}

pub fn get_weight_assignment<T: Scalar>(
    sketch: &SpectralSketch<T>,
    e: &Hyperedge<T>,
    cfg: &BalanceConfig<T>,
) -> Result<WeightAssignment<T>> {
    get_weight_assignment_gram(&sketch.gram(), e, cfg)
}

pub fn get_weight_assignment_gram<T: Scalar>(
    base: &DMatrix<T>,
    e: &Hyperedge<T>,
    cfg: &BalanceConfig<T>,
) -> Result<WeightAssignment<T>> {
    balance_observed(base, e, cfg, |_| {})
}

/// [`get_weight_assignment_gram`] calling `observe` with the weights after every shift.
pub fn balance_observed<T: Scalar>(
    base: &DMatrix<T>,
    e: &Hyperedge<T>,
    cfg: &BalanceConfig<T>,
    mut observe: impl FnMut(&[T]),
) -> Result<WeightAssignment<T>> {
    if e.vertices().iter().any(|&v| v >= base.nrows()) {
        return Err(Error::InvalidInput("hyperedge vertex outside sketch dimension".into()));
    }
    let pairs: Vec<_> = e.pairs().collect();
    let w = e.w;
    let mut z = vec![w / T::from_usize_lossy(pairs.len()); pairs.len()];
    let gamma = cfg.gamma;
    let step_cap = (gamma - T::one()) / (T::lit(2.0) * gamma);
    let max_iters = cfg.iteration_cap(pairs.len());

    for it in 0..=max_iters {
        let q = pair_resistances(base, &pairs, &z);
        let (imax, imin) = extremes(&q, &z);
        let Some(imin) = imin.filter(|&i| gamma * q[i] < q[imax]) else {
            if imin.is_none() {
                break;
            }
            let total = z.iter().fold(T::zero(), |s, &x| s + x);
            if total > T::zero() {
                for x in &mut z {
                    *x = *x * w / total;
                }
            }
            return Ok(WeightAssignment { pairs: pairs.into_iter().zip(z).collect(), iterations: it });
        };
        if it == max_iters {
            break;
        }
        let bound = step_cap / q[imax];
        match cfg.cap {
            CapRule::Donor => {
                let lambda = z[imin].min(bound);
                z[imin] -= lambda;
                z[imax] += lambda;
            }
            CapRule::Recipient => {
                let lambda = z[imax].min(bound);
                z[imin] = (z[imin] - lambda).max(T::zero());
                z[imax] += lambda;
            }
        }
        observe(&z);
    }
    Err(Error::NonTermination { iterations: max_iters, last: z.iter().map(|x| x.as_f64()).collect() })
}

/// `log` of the weighted spanning-tree count, by the matrix-tree theorem.
/// Disconnected graphs give negative infinity.
pub fn st_potential<T: Scalar>(g: &Graph<T>) -> T {
    st_potential_laplacian(&g.laplacian())
}

pub fn st_potential_laplacian<T: Scalar>(l: &DMatrix<T>) -> T {
    let n = l.nrows();
    let neg_inf = -T::one() / T::zero();
    if n <= 1 {
        return T::zero();
    }
    let comp = laplacian_components(l);
    if comp.iter().any(|&c| c != comp[0]) {
        return neg_inf;
    }
    let minor = l.view((1, 1), (n - 1, n - 1)).into_owned();
    match minor.cholesky() {
        Some(ch) => {
            let two = T::lit(2.0);
            ch.l().diagonal().iter().fold(T::zero(), |s, &d| s + two * d.ln())
        }
        None => neg_inf,
    }
}
