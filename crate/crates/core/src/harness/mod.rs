//! Monte Carlo reproduction harness: population generation, the
//! replication loop, kernel density estimation and the naive-vs-stochrep
//! benchmark.

mod benchmark;
mod experiment;
mod kde;
mod population;
pub mod svg;

pub use benchmark::{benchmark, benchmark_with, BenchmarkReport};
pub use experiment::{
    run_experiment, ExperimentConfig, ExperimentResult, ExperimentSummary, KdeGrid, Method,
    PhaseTiming,
};
pub use kde::{epanechnikov, kde_epanechnikov, silverman_bandwidth, trapezoid, KdeEstimate};
pub use population::{block_average_projection, generate_population, Population};

pub use crate::stats::{ks_statistic, Reference};
