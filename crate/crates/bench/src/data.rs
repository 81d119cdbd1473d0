//! Benchmark inputs: the synthetic generator and the SNAP pair reader.

use std::collections::HashMap;
use std::io::BufRead;
use std::path::Path;

use hyperspar_core::{Error, Graph64, WeightedEdge};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Weight distribution for generated and ingested edges.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum WeightKind {
    /// Continuous `U(1, 10)`.
    #[default]
    Uniform,
    /// Integers drawn uniformly from `1..=10`.
    Integer,
}

fn draw_weight(rng: &mut ChaCha8Rng, kind: WeightKind) -> f64 {
    match kind {
        WeightKind::Uniform => rng.random_range(1.0..=10.0),
        WeightKind::Integer => f64::from(rng.random_range(1u32..=10)),
    }
}

/// `m` edges with uniform endpoints (resampled until distinct) and `U(1, 10)` weights.
pub fn gen_synthetic(n: usize, m: usize, seed: u64) -> Graph64 {
    gen_synthetic_with(n, m, seed, WeightKind::Uniform)
}

pub fn gen_synthetic_with(n: usize, m: usize, seed: u64, weights: WeightKind) -> Graph64 {
    assert!(n >= 2, "need at least two vertices");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let edges = (0..m).map(|_| {
        let u = rng.random_range(0..n);
        let mut v = rng.random_range(0..n);
        while v == u {
            v = rng.random_range(0..n);
        }
        WeightedEdge { u, v, w: draw_weight(&mut rng, weights) }
    });
    Graph64::from_edges(n, edges.collect::<Vec<_>>()).expect("generated edges are in range")
}

/// Reads whitespace-separated vertex label pairs. Labels are remapped to
/// `0..n` in order of first appearance and each edge gets a seeded `U(1, 10)` weight.
pub fn load_snap(r: impl BufRead, seed: u64) -> Result<Graph64, Error> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ids: HashMap<String, usize> = HashMap::new();
    let mut edges = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        let text = line.trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        let lineno = i + 1;
        let toks: Vec<&str> = text.split_whitespace().collect();
        if toks.len() != 2 {
            return Err(Error::Parse { line: lineno, msg: format!("expected two labels, found {}", toks.len()) });
        }
        let mut id = |t: &str| {
            let next = ids.len();
            *ids.entry(t.to_string()).or_insert(next)
        };
        let (u, v) = (id(toks[0]), id(toks[1]));
        if u == v {
            return Err(Error::Parse { line: lineno, msg: format!("self-loop on {}", toks[0]) });
        }
        edges.push(WeightedEdge { u, v, w: draw_weight(&mut rng, WeightKind::Uniform) });
    }
    if edges.is_empty() {
        return Err(Error::EmptyGraph);
    }
    Graph64::from_edges(ids.len(), edges)
}

pub fn load_snap_path(path: &Path, seed: u64) -> Result<Graph64, Error> {
    let f = std::fs::File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    load_snap(std::io::BufReader::new(f), seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_in_range() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..1000 {
            let w = draw_weight(&mut rng, WeightKind::Uniform);
            assert!((1.0..=10.0).contains(&w));
            let k = draw_weight(&mut rng, WeightKind::Integer);
            assert!(k.fract() == 0.0 && (1.0..=10.0).contains(&k));
        }
    }

    #[test]
    fn snap_weights_depend_on_seed() {
        let a = load_snap("0 1\n".as_bytes(), 1).unwrap();
        let b = load_snap("0 1\n".as_bytes(), 2).unwrap();
        assert_ne!(a.edges()[0].w, b.edges()[0].w);
    }
}
