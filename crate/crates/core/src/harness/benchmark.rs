use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::experiment::ExperimentConfig;
use super::population::generate_population;
use crate::error::Result;
use crate::product::{sample_product_naive, ProductSpec, StochRepSampler};
use crate::rng::{tag, RngStream};

/// Naive vs. stochastic-representation timing at one `(n, k, r)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub n: usize,
    pub k: usize,
    pub r: usize,
    pub master_seed: u64,
    pub stochrep_draws: usize,
    pub naive_draws: usize,
    pub stochrep_setup_secs: f64,
    pub stochrep_per_draw_secs: f64,
    pub naive_per_draw_secs: f64,
    pub speedup: f64,
    /// Largest single buffer the stochrep path keeps: the `k × r` eigenvector
    /// block (or a `p × k` cache matrix if larger).
    pub stochrep_largest_allocation_bytes: usize,
    /// The naive path materializes `A`, a `k × k` matrix.
    pub naive_largest_allocation_bytes: usize,
}

impl BenchmarkReport {
    /// Report with every wall-clock field zeroed, for reproducibility checks.
    pub fn without_timings(&self) -> Self {
        Self {
            stochrep_setup_secs: 0.0,
            stochrep_per_draw_secs: 0.0,
            naive_per_draw_secs: 0.0,
            speedup: 0.0,
            ..self.clone()
        }
    }
}

pub fn benchmark(cfg: &ExperimentConfig, n_draws: usize) -> Result<BenchmarkReport> {
    benchmark_with(cfg, n_draws, n_draws)
}

/// Times both samplers sequentially on the calling thread.
pub fn benchmark_with(
    cfg: &ExperimentConfig,
    stochrep_draws: usize,
    naive_draws: usize,
) -> Result<BenchmarkReport> {
    cfg.validate()?;
    let r = cfg.rank();
    let base = RngStream::new(cfg.master_seed, 0);
    let pop = generate_population(cfg.k, r, &base.substream(tag::POPULATION, 0))?;
    let spec = ProductSpec::scalar(pop.gaussian(cfg.kappa())?, cfg.n, pop.m.clone())?;

    let t = Instant::now();
    let sampler = StochRepSampler::new(spec.clone())?;
    let stochrep_setup_secs = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let mut sink = 0.0;
    for i in 0..stochrep_draws as u64 {
        sink += sampler.draw_scalar(&base.substream(tag::REPLICATION, i))?;
    }
    let stochrep_per_draw_secs = t.elapsed().as_secs_f64() / stochrep_draws.max(1) as f64;

    let t = Instant::now();
    for i in 0..naive_draws as u64 {
        sink += sample_product_naive(&spec, &base.substream(tag::REPLICATION, i))?[0];
    }
    let naive_per_draw_secs = t.elapsed().as_secs_f64() / naive_draws.max(1) as f64;
    std::hint::black_box(sink);

    let f64_bytes = std::mem::size_of::<f64>();
    Ok(BenchmarkReport {
        n: cfg.n,
        k: cfg.k,
        r,
        master_seed: cfg.master_seed,
        stochrep_draws,
        naive_draws,
        stochrep_setup_secs,
        stochrep_per_draw_secs,
        naive_per_draw_secs,
        speedup: naive_per_draw_secs / stochrep_per_draw_secs,
        stochrep_largest_allocation_bytes: cfg.k * r * f64_bytes,
        naive_largest_allocation_bytes: cfg.k * cfg.k * f64_bytes,
    })
}
