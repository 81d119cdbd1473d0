//! Plain-text formats.
//!
//! Edge list: one `u v w` per line. Hyperedge list: one `w k v1 .. vk` per
//! line. In both, blank lines and lines starting with `#` are skipped, and the
//! vertex count is one more than the largest index seen.

use std::io::{BufRead, Write};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::graph::{Graph, WeightedEdge};
use crate::hypergraph::{Hyperedge, Hypergraph};
use crate::scalar::Scalar;

fn field<F: FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<F> {
    let tok = tok.ok_or_else(|| Error::Parse { line, msg: format!("missing {what}") })?;
    tok.parse().map_err(|_| Error::Parse { line, msg: format!("bad {what} {tok:?}") })
}

fn weight<T: Scalar>(tok: Option<&str>, line: usize) -> Result<T> {
    let w: f64 = field(tok, line, "weight")?;
    T::from_f64(w).ok_or_else(|| Error::Parse { line, msg: format!("weight {w} not representable") })
}

/// Content lines with their 1-based line numbers.
fn content_lines(r: impl BufRead) -> impl Iterator<Item = Result<(usize, String)>> {
    r.lines().enumerate().filter_map(|(i, l)| match l {
        Err(e) => Some(Err(e.into())),
        Ok(l) => {
            let t = l.trim();
            (!t.is_empty() && !t.starts_with('#')).then(|| Ok((i + 1, t.to_string())))
        }
    })
}

pub fn read_edge_list<T: Scalar>(r: impl BufRead) -> Result<Graph<T>> {
    let mut edges = Vec::new();
    let mut n = 0;
    for item in content_lines(r) {
        let (line, text) = item?;
        let mut toks = text.split_whitespace();
        let u: usize = field(toks.next(), line, "vertex")?;
        let v: usize = field(toks.next(), line, "vertex")?;
        let w = weight(toks.next(), line)?;
        if toks.next().is_some() {
            return Err(Error::Parse { line, msg: "trailing fields".into() });
        }
        let e = WeightedEdge::new(u, v, w).map_err(|e| Error::Parse { line, msg: e.to_string() })?;
        n = n.max(u + 1).max(v + 1);
        edges.push(e);
    }
    Graph::from_edges(n, edges)
}

pub fn write_edge_list<T: Scalar>(g: &Graph<T>, mut w: impl Write) -> Result<()> {
    for e in g.edges() {
        writeln!(w, "{} {} {}", e.u, e.v, e.w)?;
    }
    Ok(())
}

pub fn read_hyperedge_list<T: Scalar>(r: impl BufRead) -> Result<Hypergraph<T>> {
    let mut edges = Vec::new();
    let mut n = 0;
    for item in content_lines(r) {
        let (line, text) = item?;
        let mut toks = text.split_whitespace();
        let w = weight(toks.next(), line)?;
        let k: usize = field(toks.next(), line, "size")?;
        let vs = (0..k).map(|_| field::<usize>(toks.next(), line, "vertex")).collect::<Result<Vec<_>>>()?;
        if toks.next().is_some() {
            return Err(Error::Parse { line, msg: format!("more than {k} vertices") });
        }
        let e = Hyperedge::new(vs, w).map_err(|e| Error::Parse { line, msg: e.to_string() })?;
        n = n.max(e.vertices().last().map_or(0, |&v| v + 1));
        edges.push(e);
    }
    Hypergraph::from_edges(n, edges)
}

pub fn write_hyperedge_list<T: Scalar>(h: &Hypergraph<T>, mut w: impl Write) -> Result<()> {
    for e in h.edges() {
        write!(w, "{} {}", e.w, e.size())?;
        for v in e.vertices() {
            write!(w, " {v}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}
