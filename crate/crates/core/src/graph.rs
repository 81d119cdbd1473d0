//! Weighted multigraphs, Laplacians, pseudoinverse solves, effective
//! resistances, (ridge) leverage scores and the spectral error metric.
//!
//! Everything is dense: the intended scale is a few thousand vertices at most,
//! where O(n^3) factorizations are cheap and exact enough to act as oracles.

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A stream item: an undirected edge with a positive weight.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightedEdge<T> {
    pub u: usize,
    pub v: usize,
    pub w: T,
}

impl<T: Scalar> WeightedEdge<T> {
    pub fn new(u: usize, v: usize, w: T) -> Result<Self> {
        let e = Self { u, v, w };
        e.validate()?;
        Ok(e)
    }

    fn validate(&self) -> Result<()> {
        if self.u == self.v {
            return Err(Error::InvalidInput(format!("self loop at vertex {}", self.u)));
        }
        if !(self.w > T::zero()) || !self.w.is_finite() {
            return Err(Error::InvalidInput(format!(
                "edge ({}, {}) has non-positive weight {}",
                self.u, self.v, self.w
            )));
        }
        Ok(())
    }

    /// Same endpoints, weight multiplied by `factor`.
    pub fn reweighted(&self, factor: T) -> Self {
        Self { u: self.u, v: self.v, w: self.w * factor }
    }

    pub fn row(&self) -> IncidenceRow<T> {
        IncidenceRow { u: self.u, v: self.v, w: self.w }
    }
}

/// Weighted multigraph on vertices `0..n`. Edge order is arrival order and
/// parallel edges are kept as separate entries.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Graph<T> {
    n: usize,
    edges: Vec<WeightedEdge<T>>,
}

impl<T: Scalar> Graph<T> {
    pub fn new(n: usize) -> Self {
        Self { n, edges: Vec::new() }
    }

    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = WeightedEdge<T>>) -> Result<Self> {
        let mut g = Self::new(n);
        for e in edges {
            g.push(e)?;
        }
        Ok(g)
    }

    pub fn push(&mut self, e: WeightedEdge<T>) -> Result<()> {
        e.validate()?;
        if e.u >= self.n || e.v >= self.n {
            return Err(Error::InvalidInput(format!(
                "edge ({}, {}) out of range for n = {}",
                e.u, e.v, self.n
            )));
        }
        self.edges.push(e);
        Ok(())
    }

    pub fn add_edge(&mut self, u: usize, v: usize, w: T) -> Result<()> {
        self.push(WeightedEdge { u, v, w })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[WeightedEdge<T>] {
        &self.edges
    }

    pub fn into_edges(self) -> Vec<WeightedEdge<T>> {
        self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn total_weight(&self) -> T {
        self.edges.iter().fold(T::zero(), |acc, e| acc + e.w)
    }

    pub fn min_weight(&self) -> Option<T> {
        self.edges.iter().map(|e| e.w).reduce(|a, b| a.min(b))
    }

    pub fn laplacian(&self) -> DMatrix<T> {
        laplacian(self)
    }

    /// Component label per vertex (labels are dense, in order of first vertex).
    pub fn components(&self) -> Vec<usize> {
        components(self.n, self.edges.iter().map(|e| (e.u, e.v)))
    }

    pub fn is_connected(&self) -> bool {
        self.n <= 1 || self.components().iter().all(|&c| c == 0)
    }
}

/// Incidence row `sqrt(w) * (chi_u - chi_v)`. The squared scale is stored so
/// that reweighting by `1/p` round-trips exactly.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IncidenceRow<T> {
    pub u: usize,
    pub v: usize,
    pub w: T,
}

impl<T: Scalar> IncidenceRow<T> {
    /// Squared norm over two, i.e. the weight of the edge this row encodes.
    pub fn weight(&self) -> T {
        self.w
    }

    pub fn scale(&self) -> T {
        self.w.sqrt()
    }

    /// The row multiplied by `1/sqrt(p)`.
    pub fn reweighted(&self, p: T) -> Self {
        Self { u: self.u, v: self.v, w: self.w / p }
    }

    pub fn edge(&self) -> WeightedEdge<T> {
        WeightedEdge { u: self.u, v: self.v, w: self.w }
    }

    pub fn dense(&self, n: usize) -> DVector<T> {
        let mut a = DVector::zeros(n);
        let s = self.scale();
        a[self.u] = s;
        a[self.v] = -s;
        a
    }

    /// `a^T X a` for a symmetric matrix `X`, touching only four entries.
    pub fn quadratic_form(&self, x: &DMatrix<T>) -> T {
        let (u, v) = (self.u, self.v);
        self.weight() * (x[(u, u)] + x[(v, v)] - x[(u, v)] - x[(v, u)])
    }
}

/// Running set of reweighted incidence rows; its Gram matrix approximates a
/// Laplacian.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SpectralSketch<T> {
    n: usize,
    rows: Vec<IncidenceRow<T>>,
}

impl<T: Scalar> SpectralSketch<T> {
    pub fn new(n: usize) -> Self {
        Self { n, rows: Vec::new() }
    }

    pub fn from_graph(g: &Graph<T>) -> Self {
        Self { n: g.n(), rows: g.edges().iter().map(|e| e.row()).collect() }
    }

    pub fn push(&mut self, row: IncidenceRow<T>) {
        assert!(row.u < self.n && row.v < self.n, "row outside sketch dimension");
        self.rows.push(row);
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rows(&self) -> &[IncidenceRow<T>] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// `M^T M`.
    pub fn gram(&self) -> DMatrix<T> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for r in &self.rows {
            add_edge_to_laplacian(&mut m, r.u, r.v, r.weight());
        }
        m
    }

    pub fn to_graph(&self) -> Graph<T> {
        Graph { n: self.n, edges: self.rows.iter().map(|r| r.edge()).collect() }
    }
}

/// Numerical knobs for pseudoinversion and ridge scores.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverConfig<T> {
    /// Eigenvalues at or below `eig_tol * lambda_max` are treated as zero.
    pub eig_tol: T,
    pub ridge_lambda: T,
}

impl<T: Scalar> Default for SolverConfig<T> {
    fn default() -> Self {
        Self { eig_tol: default_eig_tol(), ridge_lambda: T::zero() }
    }
}

/// Relative eigenvalue cutoff: 1e-10 in double precision, looser for `f32`.
pub fn default_eig_tol<T: Scalar>() -> T {
    let eps = T::default_epsilon() * T::lit(1e4);
    eps.max(T::lit(1e-10))
}

pub fn add_edge_to_laplacian<T: Scalar>(l: &mut DMatrix<T>, u: usize, v: usize, w: T) {
    l[(u, u)] += w;
    l[(v, v)] += w;
    l[(u, v)] -= w;
    l[(v, u)] -= w;
}

pub fn laplacian<T: Scalar>(g: &Graph<T>) -> DMatrix<T> {
    laplacian_of(g.n(), g.edges())
}

pub fn laplacian_of<T: Scalar>(n: usize, edges: &[WeightedEdge<T>]) -> DMatrix<T> {
    let mut l = DMatrix::zeros(n, n);
    for e in edges {
        add_edge_to_laplacian(&mut l, e.u, e.v, e.w);
    }
    l
}

/// Union-find connected components over vertex pairs.
pub fn components(n: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Vec<usize> {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for (u, v) in pairs {
        let (a, b) = (find(&mut parent, u), find(&mut parent, v));
        if a != b {
            parent[a.max(b)] = a.min(b);
        }
    }
    let mut label = vec![usize::MAX; n];
    let mut next = 0;
    let mut out = vec![0; n];
    for x in 0..n {
        let r = find(&mut parent, x);
        if label[r] == usize::MAX {
            label[r] = next;
            next += 1;
        }
        out[x] = label[r];
    }
    out
}

fn check_symmetric<T: Scalar>(m: &DMatrix<T>) -> Result<()> {
    if !m.is_square() {
        return Err(Error::InvalidInput(format!("matrix is {}x{}", m.nrows(), m.ncols())));
    }
    let scale = m.amax().max(T::one());
    let tol = T::lit(1e-9).max(T::default_epsilon() * T::lit(1e3)) * scale;
    for i in 0..m.nrows() {
        for j in (i + 1)..m.ncols() {
            if (m[(i, j)] - m[(j, i)]).abs() > tol {
                return Err(Error::InvalidInput("matrix is not symmetric".into()));
            }
        }
    }
    Ok(())
}

/// Moore-Penrose pseudoinverse of a symmetric PSD matrix by eigendecomposition.
pub fn pseudo_inverse<T: Scalar>(l: &DMatrix<T>, cfg: &SolverConfig<T>) -> Result<DMatrix<T>> {
    check_symmetric(l)?;
    let n = l.nrows();
    if n == 0 {
        return Ok(DMatrix::zeros(0, 0));
    }
    let eig = SymmetricEigen::new(l.clone());
    let lmax = eig.eigenvalues.amax();
    let cutoff = cfg.eig_tol * lmax;
    let mut out = DMatrix::zeros(n, n);
    if lmax <= T::zero() {
        return Ok(out);
    }
    for (k, &lam) in eig.eigenvalues.iter().enumerate() {
        if lam > cutoff {
            let col = eig.eigenvectors.column(k);
            out.ger(T::one() / lam, &col, &col, T::one());
        }
    }
    Ok(out)
}

/// `L^+ b`, dropping eigenvalues at or below `eig_tol * lambda_max`.
pub fn pseudo_solve<T: Scalar>(
    l: &DMatrix<T>,
    b: &DVector<T>,
    cfg: &SolverConfig<T>,
) -> Result<DVector<T>> {
    if b.len() != l.nrows() {
        return Err(Error::InvalidInput(format!(
            "rhs has length {} but matrix has {} rows",
            b.len(),
            l.nrows()
        )));
    }
    Ok(pseudo_inverse(l, cfg)? * b)
}

/// Effective resistance between two vertices; infinite across components.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Resistance<T> {
    Finite(T),
    Infinite,
}

impl<T: Scalar> Resistance<T> {
    pub fn finite(self) -> Option<T> {
        match self {
            Resistance::Finite(r) => Some(r),
            Resistance::Infinite => None,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Resistance::Infinite)
    }

    pub fn scaled(self, w: T) -> Self {
        match self {
            Resistance::Finite(r) => Resistance::Finite(r * w),
            Resistance::Infinite => Resistance::Infinite,
        }
    }
}

/// Exact Laplacian pseudoinverse assembled per connected component: each
/// component block is inverted after grounding with `J/k`, which is exact for
/// connected Laplacians and needs only a Cholesky factorization.
#[derive(Clone, Debug)]
pub struct LaplacianPinv<T: Scalar> {
    component: Vec<usize>,
    pinv: DMatrix<T>,
}

impl<T: Scalar> LaplacianPinv<T> {
    pub fn from_graph(g: &Graph<T>) -> Result<Self> {
        let comp = g.components();
        Self::from_parts(g.laplacian(), comp)
    }

    /// `l` must be a graph Laplacian whose connectivity is `component`.
    pub fn from_parts(l: DMatrix<T>, component: Vec<usize>) -> Result<Self> {
        let n = l.nrows();
        let ncomp = component.iter().copied().max().map_or(0, |c| c + 1);
        let mut members: Vec<Vec<usize>> = vec![Vec::new(); ncomp];
        for (x, &c) in component.iter().enumerate() {
            members[c].push(x);
        }
        let mut pinv = DMatrix::zeros(n, n);
        for verts in members.iter().filter(|m| m.len() > 1) {
            let k = verts.len();
            let shift = T::one() / T::from_usize_lossy(k);
            let mut block = DMatrix::from_fn(k, k, |i, j| l[(verts[i], verts[j])] + shift);
            block = match Cholesky::new(block.clone()) {
                Some(ch) => ch.inverse(),
                None => block
                    .try_inverse()
                    .ok_or_else(|| Error::InvalidInput("component Laplacian is singular".into()))?,
            };
            for i in 0..k {
                for j in 0..k {
                    pinv[(verts[i], verts[j])] = block[(i, j)] - shift;
                }
            }
        }
        Ok(Self { component, pinv })
    }

    pub fn matrix(&self) -> &DMatrix<T> {
        &self.pinv
    }

    pub fn same_component(&self, u: usize, v: usize) -> bool {
        self.component[u] == self.component[v]
    }

    pub fn resistance(&self, u: usize, v: usize) -> Resistance<T> {
        if u == v {
            return Resistance::Finite(T::zero());
        }
        if !self.same_component(u, v) {
            return Resistance::Infinite;
        }
        let p = &self.pinv;
        let r = p[(u, u)] + p[(v, v)] - p[(u, v)] - p[(v, u)];
        Resistance::Finite(r.max(T::zero()))
    }
}

/// Laplacian pseudoinverse kept exact under edge insertions. An edge inside a
/// component is a rank-one update in the image, handled by Sherman-Morrison;
/// an edge joining two components triggers a rebuild.
#[derive(Clone, Debug)]
pub struct IncrementalPinv<T: Scalar> {
    l: DMatrix<T>,
    inner: LaplacianPinv<T>,
    since_refresh: usize,
    refresh_every: usize,
}

impl<T: Scalar> IncrementalPinv<T> {
    pub fn new(n: usize) -> Self {
        Self {
            l: DMatrix::zeros(n, n),
            inner: LaplacianPinv { component: (0..n).collect(), pinv: DMatrix::zeros(n, n) },
            since_refresh: 0,
            refresh_every: (4 * n).max(64),
        }
    }

    pub fn laplacian(&self) -> &DMatrix<T> {
        &self.l
    }

    pub fn resistance(&self, u: usize, v: usize) -> Resistance<T> {
        self.inner.resistance(u, v)
    }

    pub fn add(&mut self, u: usize, v: usize, w: T) {
        add_edge_to_laplacian(&mut self.l, u, v, w);
        let comp = &mut self.inner.component;
        let (cu, cv) = (comp[u], comp[v]);
        if cu != cv {
            let (keep, drop) = (cu.min(cv), cu.max(cv));
            comp.iter_mut().filter(|c| **c == drop).for_each(|c| *c = keep);
            self.refresh();
            return;
        }
        let p = &mut self.inner.pinv;
        let x: DVector<T> = p.column(u) - p.column(v);
        let denom = T::one() + w * (x[u] - x[v]);
        p.ger(-w / denom, &x, &x, T::one());
        self.since_refresh += 1;
        if self.since_refresh >= self.refresh_every {
            self.refresh();
        }
    }

    pub fn refresh(&mut self) {
        let comp = std::mem::take(&mut self.inner.component);
        self.inner = LaplacianPinv::from_parts(self.l.clone(), comp).expect("Laplacian of inserted edges");
        self.since_refresh = 0;
    }
}

fn check_vertex<T: Scalar>(g: &Graph<T>, x: usize) -> Result<()> {
    if x >= g.n() {
        return Err(Error::InvalidInput(format!("vertex {x} out of range for n = {}", g.n())));
    }
    Ok(())
}

/// `(chi_u - chi_v)^T L^+ (chi_u - chi_v)`.
pub fn effective_resistance<T: Scalar>(g: &Graph<T>, u: usize, v: usize) -> Result<Resistance<T>> {
    check_vertex(g, u)?;
    check_vertex(g, v)?;
    Ok(LaplacianPinv::from_graph(g)?.resistance(u, v))
}

/// `w(e)` times the effective resistance of its endpoints in `g`.
pub fn leverage<T: Scalar>(g: &Graph<T>, e: &WeightedEdge<T>) -> Result<Resistance<T>> {
    Ok(effective_resistance(g, e.u, e.v)?.scaled(e.w))
}

/// Leverage score of every edge of `g`, in edge order.
pub fn leverages<T: Scalar>(g: &Graph<T>) -> Result<Vec<T>> {
    let pinv = LaplacianPinv::from_graph(g)?;
    Ok(g
        .edges()
        .iter()
        .map(|e| {
            let r = pinv.resistance(e.u, e.v).finite().expect("edge endpoints are connected");
            (e.w * r).min(T::one())
        })
        .collect())
}

/// Ridge leverage `a^T (M^T M + lambda I)^{-1} a`. With `lambda = 0` the
/// pseudoinverse is used and the row must lie in the image of the Gram matrix.
pub fn ridge_leverage<T: Scalar>(
    sketch: &SpectralSketch<T>,
    row: &IncidenceRow<T>,
    lambda: T,
) -> Result<T> {
    let n = sketch.n();
    if row.u >= n || row.v >= n {
        return Err(Error::InvalidInput("row outside sketch dimension".into()));
    }
    if lambda < T::zero() {
        return Err(Error::InvalidInput("ridge lambda must be non-negative".into()));
    }
    if lambda == T::zero() {
        let g = sketch.to_graph();
        let pinv = LaplacianPinv::from_graph(&g)?;
        return match pinv.resistance(row.u, row.v) {
            Resistance::Finite(r) => Ok(row.weight() * r),
            Resistance::Infinite => Err(Error::SingularRidge { u: row.u, v: row.v }),
        };
    }
    let mut m = sketch.gram();
    for i in 0..n {
        m[(i, i)] += lambda;
    }
    let ch = Cholesky::new(m).ok_or_else(|| Error::InvalidInput("ridge system not PD".into()))?;
    let a = row.dense(n);
    let x = ch.solve(&a);
    Ok(a.dot(&x))
}

/// Which side of the generalized spectrum the error metric reports.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum ErrorSide {
    /// Largest magnitude eigenvalue of the pencil: over- and under-estimation.
    #[default]
    TwoSided,
    /// Largest eigenvalue only: `max x^T (L - L_hat) x / x^T L x`.
    Under,
}

/// Multiplicative spectral error of `l_hat` relative to `l`, restricted to the
/// image of `l` (two-sided).
pub fn rayleigh_error<T: Scalar>(l: &DMatrix<T>, l_hat: &DMatrix<T>) -> Result<T> {
    rayleigh_error_sided(l, l_hat, ErrorSide::TwoSided)
}

pub fn rayleigh_error_sided<T: Scalar>(
    l: &DMatrix<T>,
    l_hat: &DMatrix<T>,
    side: ErrorSide,
) -> Result<T> {
    check_symmetric(l)?;
    check_symmetric(l_hat)?;
    if l.shape() != l_hat.shape() {
        return Err(Error::InvalidInput("matrices differ in shape".into()));
    }
    let tol = default_eig_tol::<T>();
    let eig = SymmetricEigen::new(l.clone());
    let lmax = eig.eigenvalues.amax();
    let scale = lmax.max(l_hat.amax());
    let image: Vec<usize> =
        (0..l.nrows()).filter(|&k| eig.eigenvalues[k] > tol * lmax && lmax > T::zero()).collect();
    let kernel: Vec<usize> = (0..l.nrows()).filter(|k| !image.contains(k)).collect();

    // x^T L_hat x must vanish on ker(L) (L_hat is PSD, so checking the
    // compressed block suffices).
    if !kernel.is_empty() && scale > T::zero() {
        let u0 = eig.eigenvectors.select_columns(&kernel);
        let leak = (u0.transpose() * l_hat * &u0).amax();
        let ktol = T::lit(1e-8).max(T::default_epsilon() * T::lit(1e5));
        if leak > ktol * scale {
            return Err(Error::IncomparableKernels);
        }
    }
    if image.is_empty() {
        return Ok(T::zero());
    }
    let ur = eig.eigenvectors.select_columns(&image);
    let inv_sqrt: Vec<T> = image.iter().map(|&k| T::one() / eig.eigenvalues[k].sqrt()).collect();
    let mut d = ur.transpose() * (l - l_hat) * &ur;
    for i in 0..d.nrows() {
        for j in 0..d.ncols() {
            d[(i, j)] *= inv_sqrt[i] * inv_sqrt[j];
        }
    }
    // Symmetrize away round-off before the eigensolve.
    let d = (&d + d.transpose()) * T::lit(0.5);
    let ev = SymmetricEigen::new(d).eigenvalues;
    Ok(match side {
        ErrorSide::TwoSided => ev.amax(),
        ErrorSide::Under => ev.iter().copied().fold(T::zero(), |a, b| a.max(b)),
    })
}

/// Convenience: spectral error of graph `approx` against `exact`.
pub fn graph_error<T: Scalar>(exact: &Graph<T>, approx: &Graph<T>) -> Result<T> {
    rayleigh_error(&exact.laplacian(), &approx.laplacian())
}
