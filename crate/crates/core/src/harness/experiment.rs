use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::kde::{kde_epanechnikov, KdeEstimate};
use super::population::generate_population;
use crate::asymptotics::{sigma2, AsymptoticParams, ScalarStandardizer};
use crate::error::{Error, Result};
use crate::product::{sample_product_naive, ProductSpec, StochRepSampler};
use crate::rng::{tag, RngStream};
use crate::stats::{ks_statistic, normal_pdf, Reference};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    #[default]
    Stochrep,
    Naive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KdeGrid {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl Default for KdeGrid {
    fn default() -> Self {
        Self {
            lo: -4.0,
            hi: 4.0,
            points: 401,
        }
    }
}

impl KdeGrid {
    pub fn abscissae(&self) -> Vec<f64> {
        let step = (self.hi - self.lo) / (self.points - 1) as f64;
        (0..self.points).map(|i| self.lo + step * i as f64).collect()
    }
}

fn default_reps() -> usize {
    10_000
}

/// One Monte Carlo experiment. `kappa` defaults to `1/n`, `r = round(c·n)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub n: usize,
    pub k: usize,
    pub c: f64,
    #[serde(default)]
    pub kappa: Option<f64>,
    #[serde(default = "default_reps")]
    pub n_reps: usize,
    pub master_seed: u64,
    #[serde(default)]
    pub kde_grid: KdeGrid,
    #[serde(default)]
    pub method: Method,
}

impl ExperimentConfig {
    pub fn new(n: usize, k: usize, c: f64, master_seed: u64) -> Self {
        Self {
            n,
            k,
            c,
            kappa: None,
            n_reps: default_reps(),
            master_seed,
            kde_grid: KdeGrid::default(),
            method: Method::Stochrep,
        }
    }

    pub fn rank(&self) -> usize {
        (self.c * self.n as f64).round() as usize
    }

    pub fn kappa(&self) -> f64 {
        self.kappa.unwrap_or(1.0 / self.n as f64)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidParameter("n must be >= 1".into()));
        }
        if !(self.c > 0.0) || !self.c.is_finite() {
            return Err(Error::ZeroConcentration(self.c));
        }
        let r = self.rank();
        if r < 1 || r >= self.k {
            return Err(Error::InvalidParameter(format!(
                "r = round(c*n) = {r} must satisfy 1 <= r < k = {}",
                self.k
            )));
        }
        if self.n_reps < 100 {
            return Err(Error::InvalidParameter(format!(
                "n_reps = {} must be at least 100",
                self.n_reps
            )));
        }
        let kappa = self.kappa();
        if !(kappa > 0.0) || !kappa.is_finite() {
            return Err(Error::InvalidParameter(format!("kappa must be positive, got {kappa}")));
        }
        let g = &self.kde_grid;
        if g.points < 2 || !(g.hi > g.lo) {
            return Err(Error::InvalidParameter("KDE grid needs lo < hi and >= 2 points".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct PhaseTiming {
    pub population_secs: f64,
    pub sampling_secs: f64,
    pub analysis_secs: f64,
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub rank: usize,
    pub sigma2: f64,
    pub standardized_samples: Vec<f64>,
    pub kde: KdeEstimate,
    pub ks_vs_normal: f64,
    pub sup_density_gap: f64,
    pub clamp_events: u64,
    pub timing: PhaseTiming,
}

/// Deterministic part of a result, plus optional timings.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentSummary {
    pub config: ExperimentConfig,
    pub r: usize,
    pub kappa: f64,
    pub sigma2: f64,
    pub bandwidth: f64,
    pub ks_vs_normal: f64,
    pub sup_density_gap: f64,
    pub clamp_events: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing: Option<PhaseTiming>,
}

impl ExperimentResult {
    pub fn summary(&self, with_timing: bool) -> ExperimentSummary {
        ExperimentSummary {
            config: self.config.clone(),
            r: self.rank,
            kappa: self.config.kappa(),
            sigma2: self.sigma2,
            bandwidth: self.kde.bandwidth,
            ks_vs_normal: self.ks_vs_normal,
            sup_density_gap: self.sup_density_gap,
            clamp_events: self.clamp_events,
            timing: with_timing.then_some(self.timing),
        }
    }

    /// Standard normal density on the KDE grid.
    pub fn normal_density(&self) -> Vec<f64> {
        self.kde.grid.iter().map(|&x| normal_pdf(x)).collect()
    }
}

/// Draws one population, then `n_reps` standardized replications of
/// `mᵀAz` (replication `i` on its own substream), and compares them with
/// the standard normal.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    let r = cfg.rank();
    let kappa = cfg.kappa();
    let base = RngStream::new(cfg.master_seed, 0);

    let t0 = Instant::now();
    let pop = generate_population(cfg.k, r, &base.substream(tag::POPULATION, 0))?;
    let gaussian = pop.gaussian(kappa)?;
    let spec = ProductSpec::scalar(gaussian.clone(), cfg.n, pop.m.clone())?;
    let params = AsymptoticParams::from_rank(r, cfg.n, kappa)?;
    let standardizer = ScalarStandardizer::new(&pop.m, &gaussian, cfg.n, Some(params))?;
    let population_secs = t0.elapsed().as_secs_f64();

    let t1 = Instant::now();
    let (raw, clamp_events) = match cfg.method {
        Method::Stochrep => {
            let sampler = StochRepSampler::new(spec)?;
            let raw = (0..cfg.n_reps as u64)
                .into_par_iter()
                .map(|i| sampler.draw_scalar(&base.substream(tag::REPLICATION, i)))
                .collect::<Result<Vec<f64>>>()?;
            (raw, sampler.clamp_events())
        }
        Method::Naive => {
            let raw = (0..cfg.n_reps as u64)
                .into_par_iter()
                .map(|i| {
                    sample_product_naive(&spec, &base.substream(tag::REPLICATION, i)).map(|v| v[0])
                })
                .collect::<Result<Vec<f64>>>()?;
            (raw, 0)
        }
    };
    let sampling_secs = t1.elapsed().as_secs_f64();

    let t2 = Instant::now();
    let standardized: Vec<f64> = raw.iter().map(|&x| standardizer.apply(x)).collect();
    let kde = kde_epanechnikov(&standardized, &cfg.kde_grid.abscissae(), None)?;
    let ks_vs_normal = ks_statistic(&standardized, Reference::StdNormal)?;
    let sup_density_gap = kde
        .grid
        .iter()
        .zip(&kde.density)
        .map(|(&x, &d)| (d - normal_pdf(x)).abs())
        .fold(0.0, f64::max);
    let analysis_secs = t2.elapsed().as_secs_f64();

    Ok(ExperimentResult {
        config: cfg.clone(),
        rank: r,
        sigma2: sigma2(&pop.m, &gaussian, &params)?,
        standardized_samples: standardized,
        kde,
        ks_vs_normal,
        sup_density_gap,
        clamp_events,
        timing: PhaseTiming {
            population_secs,
            sampling_secs,
            analysis_secs,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_invariants() {
        let ok = ExperimentConfig::new(20, 15, 0.5, 1);
        assert!(ok.validate().is_ok());
        assert_eq!(ok.rank(), 10);
        assert_eq!(ok.kappa(), 0.05);
        // r = 250 >= k = 200
        assert!(ExperimentConfig::new(500, 200, 0.5, 1).validate().is_err());
        let mut few = ok.clone();
        few.n_reps = 99;
        assert!(few.validate().is_err());
        assert!(ExperimentConfig::new(20, 15, 0.0, 1).validate().is_err());
    }

    #[test]
    fn config_json_defaults() {
        let cfg: ExperimentConfig =
            serde_json::from_str(r#"{"n": 50, "k": 60, "c": 0.5, "master_seed": 3}"#).unwrap();
        assert_eq!(cfg, ExperimentConfig::new(50, 60, 0.5, 3));
    }

    #[test]
    fn small_experiment_runs() {
        let mut cfg = ExperimentConfig::new(40, 30, 0.5, 11);
        cfg.n_reps = 500;
        let res = run_experiment(&cfg).unwrap();
        assert_eq!(res.standardized_samples.len(), 500);
        assert!((0.0..=1.0).contains(&res.ks_vs_normal));
        assert!(res.kde.density.iter().all(|&d| d >= 0.0));
        assert_eq!(res.rank, 20);
    }
}
