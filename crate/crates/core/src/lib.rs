//! Streaming spectral sparsification for graphs and hypergraphs.
//!
//! Every numeric type is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix the common double-precision instantiations.

pub mod balanced;
pub mod error;
pub mod graph;
pub mod hypergraph;
pub mod io;
pub mod merge_reduce;
pub mod mincut;
pub mod offline;
pub mod online;
pub mod rng;
pub mod robust;
pub mod scalar;
pub mod sliding_window;

pub use error::{Error, Result};
pub use graph::{Graph, IncidenceRow, SpectralSketch, WeightedEdge};
pub use hypergraph::{Hyperedge, Hypergraph};
pub use scalar::{Rate, Scalar};

pub type Graph64 = Graph<f64>;
pub type Graph32 = Graph<f32>;
pub type Edge64 = WeightedEdge<f64>;
pub type Edge32 = WeightedEdge<f32>;
pub type Hypergraph64 = Hypergraph<f64>;
pub type Hypergraph32 = Hypergraph<f32>;
pub type Hyperedge64 = Hyperedge<f64>;
pub type Hyperedge32 = Hyperedge<f32>;
pub type Sketch64 = SpectralSketch<f64>;
pub type Sketch32 = SpectralSketch<f32>;
pub type OnlineSampler64 = online::OnlineSampler<f64>;
pub type StreamSparsifier64 = merge_reduce::StreamSparsifier<f64>;
pub type HyperSampler64 = hypergraph::HyperSampler<f64>;
