//! Benchmark harness for the hyperspar sparsifiers.

pub mod data;
pub mod experiment;
pub mod report;

pub use data::{gen_synthetic, gen_synthetic_with, load_snap, load_snap_path, WeightKind};
pub use experiment::{run_experiment, Constants, ExperimentConfig, Method, Report, ResultRow, TrialRow, Tuning};
pub use report::Format;
