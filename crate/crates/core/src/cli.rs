//! `wishart-product` command line.
//!
//! Every subcommand is stochastic and requires an explicit `--seed`; there
//! is no clock-based default. Exit status: 0 on success, 2 on usage
//! errors, 1 on runtime errors (the error name goes to stderr).

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde_json::json;

use crate::asymptotics::{
    omega_matrix, sigma2, validate_assumptions, AsymptoticParams, DEFAULT_COHERENCE_BOUND,
};
use crate::charfn::{cf_product, empirical_cf, CfQuadratureConfig};
use crate::error::{Error, Result};
use crate::harness::{
    benchmark_with, block_average_projection, generate_population, run_experiment,
    svg::density_overlay, ExperimentConfig, Method,
};
use crate::io::{csv_row, fmt_f64, matrix_from_csv, vectors_from_csv, write_atomic};
use crate::product::{
    naive_many, sample_az_naive, ProductSpec, StochRepSampler, DEFAULT_NAIVE_LIMIT,
};
use crate::rng::{tag, RngStream};
use crate::samplers::{
    sample_chi2, sample_singular_normal, sample_singular_wishart, GaussianSpec, WishartSpec,
};
use crate::spectral::{spectral_decompose, RankTolerance};

#[derive(Debug, Parser)]
#[command(
    name = "wishart-product",
    version,
    about = "Samplers, characteristic function and asymptotics for singular Wishart x singular Gaussian products"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOptions,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalOptions {
    /// Master seed (required: every subcommand is stochastic)
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads, 0 = all cores
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
    /// Print progress and timings to stderr (repeatable)
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    /// Directory that relative output paths are resolved against
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw chi-square scalars, singular normal vectors or singular Wishart matrices
    Sample(SampleArgs),
    /// Draw M A z (or m'Az for p = 1) by the naive or stochastic-representation sampler
    SampleProduct(SampleProductArgs),
    /// Evaluate the characteristic function of Az at u-vectors read from CSV
    Charfn(CharfnArgs),
    /// Print sigma^2 (p = 1) or Omega and the assumption report as JSON
    Asymptotics(AsymptoticsArgs),
    /// Run the Monte Carlo experiment and write KDE / summary / SVG files
    Figure(FigureArgs),
    /// Time naive vs. stochastic-representation sampling
    Benchmark(BenchmarkArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Dist {
    Chi2,
    Normal,
    Wishart,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SamplerMethod {
    Naive,
    Stochrep,
}

/// Population flags shared by several subcommands.
#[derive(Debug, Args)]
pub struct PopulationArgs {
    /// Wishart degrees of freedom
    #[arg(long)]
    pub n: usize,
    /// Dimension k (ignored when --sigma is given)
    #[arg(long)]
    pub k: Option<usize>,
    /// Rank r of Sigma (ignored when --sigma is given)
    #[arg(long)]
    pub r: Option<usize>,
    /// Scale kappa of z ~ N(mu, kappa Sigma); defaults to 1/n
    #[arg(long)]
    pub kappa: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    /// Distribution to draw from
    #[arg(long, value_enum)]
    pub dist: Dist,
    #[command(flatten)]
    pub population: PopulationArgs,
    /// Covariance matrix CSV (k x k); replaces the generated population covariance
    #[arg(long)]
    pub sigma: Option<PathBuf>,
    /// Mean vector CSV (one row); defaults to the generated population mean
    #[arg(long)]
    pub mu: Option<PathBuf>,
    /// Stream index under the master seed
    #[arg(long, default_value_t = 0)]
    pub stream: u64,
    /// Number of draws (one per CSV row)
    #[arg(long, default_value_t = 1)]
    pub n_draws: usize,
    /// Output CSV (stdout when absent)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SampleProductArgs {
    /// Sampler
    #[arg(long, value_enum, default_value = "stochrep")]
    pub method: SamplerMethod,
    #[command(flatten)]
    pub population: PopulationArgs,
    /// Rows of the projection M (block averages; p = 1 uses m = 1/k)
    #[arg(long, default_value_t = 1)]
    pub p: usize,
    /// Number of draws
    #[arg(long, default_value_t = 1000)]
    pub n_draws: usize,
    /// Output CSV (stdout when absent)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CharfnArgs {
    /// CSV of u-vectors, one per row
    #[arg(long)]
    pub u: PathBuf,
    #[command(flatten)]
    pub population: PopulationArgs,
    /// Covariance matrix CSV (k x k); replaces the generated population covariance
    #[arg(long)]
    pub sigma: Option<PathBuf>,
    /// Mean vector CSV (one row)
    #[arg(long)]
    pub mu: Option<PathBuf>,
    /// Add an empirical CF column from this many naive draws of Az
    #[arg(long)]
    pub empirical: Option<usize>,
    /// Quadrature tolerance
    #[arg(long, default_value_t = 1e-8)]
    pub rel_tol: f64,
    /// Truncated chi-square tail mass
    #[arg(long, default_value_t = 1e-12)]
    pub tail_mass: f64,
    /// Output CSV (stdout when absent)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AsymptoticsArgs {
    #[command(flatten)]
    pub population: PopulationArgs,
    /// Rows of the projection M (p = 1 gives sigma^2 for m = 1/k)
    #[arg(long, default_value_t = 1)]
    pub p: usize,
    /// Concentration c; defaults to r/n
    #[arg(long)]
    pub c: Option<f64>,
    /// Coherence bound L2 for warnings
    #[arg(long, default_value_t = DEFAULT_COHERENCE_BOUND)]
    pub coherence_bound: f64,
    /// Output JSON (stdout when absent)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// JSON file with ExperimentConfig fields; flags below override it
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Wishart degrees of freedom / sample size
    #[arg(long)]
    pub n: Option<usize>,
    /// Dimension
    #[arg(long)]
    pub k: Option<usize>,
    /// Concentration; r = round(c n)
    #[arg(long)]
    pub c: Option<f64>,
    /// Scale kappa; defaults to 1/n
    #[arg(long)]
    pub kappa: Option<f64>,
}

#[derive(Debug, Args)]
pub struct FigureArgs {
    #[command(flatten)]
    pub experiment: ExperimentArgs,
    /// Replications N
    #[arg(long)]
    pub reps: Option<usize>,
    /// Sampler
    #[arg(long, value_enum)]
    pub method: Option<SamplerMethod>,
    /// Prefix of <prefix>_kde.csv, <prefix>_summary.json and <prefix>.svg
    #[arg(long, default_value = "figure")]
    pub out_prefix: String,
    /// Skip the SVG overlay
    #[arg(long)]
    pub no_svg: bool,
    /// Include wall-clock timings in the summary (breaks byte-reproducibility)
    #[arg(long)]
    pub timings: bool,
}

#[derive(Debug, Args)]
pub struct BenchmarkArgs {
    #[command(flatten)]
    pub experiment: ExperimentArgs,
    /// Stochastic-representation draws to time
    #[arg(long, default_value_t = 100)]
    pub draws: usize,
    /// Naive draws to time (defaults to --draws)
    #[arg(long)]
    pub naive_draws: Option<usize>,
    /// Output JSON report
    #[arg(long, default_value = "benchmark.json")]
    pub out: PathBuf,
}

/// Parses `argv` and runs the command; returns the process exit status.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let Some(seed) = cli.global.seed else {
        let e = Cli::command().error(
            ErrorKind::MissingRequiredArgument,
            "the argument '--seed <SEED>' is required for every subcommand",
        );
        let _ = e.print();
        return e.exit_code();
    };
    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(cli.global.threads)
        .build()
    {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: InvalidParameter: {e}");
            return 1;
        }
    };
    let ctx = Context {
        seed,
        out_dir: cli.global.out_dir.clone(),
        verbose: cli.global.verbose,
    };
    match pool.install(|| dispatch(&cli.command, &ctx)) {
        Ok(()) => 0,
        Err(Usage(msg)) => {
            let e = Cli::command().error(ErrorKind::MissingRequiredArgument, msg);
            let _ = e.print();
            e.exit_code()
        }
        Err(Runtime(e)) => {
            eprintln!("error: {}: {e}", e.name());
            1
        }
    }
}

enum Failure {
    Usage(String),
    Runtime(Error),
}
use Failure::{Runtime, Usage};

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Runtime(e)
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Runtime(e.into())
    }
}

struct Context {
    seed: u64,
    out_dir: Option<PathBuf>,
    verbose: u8,
}

impl Context {
    fn resolve(&self, path: &Path) -> PathBuf {
        match &self.out_dir {
            Some(dir) if path.is_relative() => dir.join(path),
            _ => path.to_path_buf(),
        }
    }

    fn emit(&self, out: Option<&PathBuf>, contents: &str) -> Result<()> {
        match out {
            Some(path) => write_atomic(&self.resolve(path), contents.as_bytes()),
            None => {
                print!("{contents}");
                Ok(())
            }
        }
    }

    fn log(&self, msg: impl AsRef<str>) {
        if self.verbose > 0 {
            eprintln!("{}", msg.as_ref());
        }
    }
}

fn dispatch(cmd: &Command, ctx: &Context) -> std::result::Result<(), Failure> {
    match cmd {
        Command::Sample(a) => cmd_sample(a, ctx),
        Command::SampleProduct(a) => cmd_sample_product(a, ctx),
        Command::Charfn(a) => cmd_charfn(a, ctx),
        Command::Asymptotics(a) => cmd_asymptotics(a, ctx),
        Command::Figure(a) => cmd_figure(a, ctx),
        Command::Benchmark(a) => cmd_benchmark(a, ctx),
    }
}

fn read(path: &Path) -> Result<String> {
    Ok(std::fs::read_to_string(path)?)
}

/// Gaussian law from files or from a generated population.
fn gaussian_for(
    pop: &PopulationArgs,
    sigma_file: Option<&PathBuf>,
    mu_file: Option<&PathBuf>,
    ctx: &Context,
) -> std::result::Result<(GaussianSpec, DVector<f64>), Failure> {
    let kappa = pop.kappa.unwrap_or(1.0 / pop.n.max(1) as f64);
    let (sigma, mu, m) = match sigma_file {
        Some(path) => {
            let s = matrix_from_csv(&read(path)?)?;
            let sigma = spectral_decompose(&s, RankTolerance::default())?;
            let k = sigma.k();
            let mu = match mu_file {
                Some(p) => {
                    let rows = vectors_from_csv(&read(p)?)?;
                    rows.into_iter()
                        .next()
                        .ok_or_else(|| Error::Parse("mean file has no rows".into()))?
                }
                None => DVector::zeros(k),
            };
            (sigma, mu, DVector::from_element(k, 1.0 / k as f64))
        }
        None => {
            let (Some(k), Some(r)) = (pop.k, pop.r) else {
                return Err(Usage("--k and --r are required unless --sigma is given".into()));
            };
            let p = generate_population(k, r, &RngStream::new(ctx.seed, 0).substream(tag::POPULATION, 0))?;
            let mu = match mu_file {
                Some(path) => vectors_from_csv(&read(path)?)?
                    .into_iter()
                    .next()
                    .ok_or_else(|| Error::Parse("mean file has no rows".into()))?,
                None => p.mu,
            };
            (p.sigma, mu, p.m)
        }
    };
    Ok((GaussianSpec::new(mu, kappa, sigma)?, m))
}

fn header(prefix: &str, count: usize) -> String {
    (1..=count).map(|i| format!("{prefix}{i}")).collect::<Vec<_>>().join(",")
}

fn rows_to_csv(head: &str, rows: &[Vec<f64>]) -> String {
    let mut out = String::with_capacity(rows.len() * 32);
    out.push_str(head);
    out.push('\n');
    for row in rows {
        out.push_str(&csv_row(row));
        out.push('\n');
    }
    out
}

fn cmd_sample(a: &SampleArgs, ctx: &Context) -> std::result::Result<(), Failure> {
    let base = RngStream::new(ctx.seed, a.stream);
    let n = a.population.n;
    let rows: Vec<Vec<f64>> = match a.dist {
        Dist::Chi2 => (0..a.n_draws as u64)
            .into_par_iter()
            .map(|i| sample_chi2(n, &mut base.substream(tag::DRAW, i).rng()).map(|x| vec![x]))
            .collect::<Result<_>>()?,
        Dist::Normal => {
            let (g, _) = gaussian_for(&a.population, a.sigma.as_ref(), a.mu.as_ref(), ctx)?;
            (0..a.n_draws as u64)
                .into_par_iter()
                .map(|i| sample_singular_normal(&g, &mut base.substream(tag::DRAW, i).rng()).as_slice().to_vec())
                .collect()
        }
        Dist::Wishart => {
            let (g, _) = gaussian_for(&a.population, a.sigma.as_ref(), a.mu.as_ref(), ctx)?;
            let spec = WishartSpec::new(n, g.sigma().clone())?;
            (0..a.n_draws as u64)
                .into_par_iter()
                .map(|i| {
                    let m = sample_singular_wishart(&spec, &mut base.substream(tag::DRAW, i).rng());
                    m.transpose().as_slice().to_vec()
                })
                .collect()
        }
    };
    let width = rows.first().map_or(1, Vec::len);
    let head = match a.dist {
        Dist::Chi2 => "x".to_string(),
        Dist::Normal => header("z", width),
        Dist::Wishart => header("a", width),
    };
    ctx.emit(a.out.as_ref(), &rows_to_csv(&head, &rows))?;
    Ok(())
}

fn product_spec(a: &PopulationArgs, p: usize, ctx: &Context) -> std::result::Result<ProductSpec, Failure> {
    let (g, m) = gaussian_for(a, None, None, ctx)?;
    Ok(if p == 1 {
        ProductSpec::scalar(g, a.n, m)?
    } else {
        let mm = block_average_projection(p, g.k())?;
        ProductSpec::vector(g, a.n, mm)?
    })
}

fn cmd_sample_product(a: &SampleProductArgs, ctx: &Context) -> std::result::Result<(), Failure> {
    let spec = product_spec(&a.population, a.p, ctx)?;
    let base = RngStream::new(ctx.seed, 1);
    let draws = match a.method {
        SamplerMethod::Stochrep => {
            let sampler = StochRepSampler::new(spec)?;
            let d = sampler.draw_many(&base, a.n_draws)?;
            ctx.log(format!("clamp events: {}", sampler.clamp_events()));
            d
        }
        SamplerMethod::Naive => naive_many(&spec, &base, a.n_draws, DEFAULT_NAIVE_LIMIT)?,
    };
    let rows: Vec<Vec<f64>> = draws.iter().map(|d| d.as_slice().to_vec()).collect();
    ctx.emit(a.out.as_ref(), &rows_to_csv(&header("x", a.p), &rows))?;
    Ok(())
}

fn cmd_charfn(a: &CharfnArgs, ctx: &Context) -> std::result::Result<(), Failure> {
    let (g, _) = gaussian_for(&a.population, a.sigma.as_ref(), a.mu.as_ref(), ctx)?;
    let us = vectors_from_csv(&read(&a.u)?)?;
    let cfg = CfQuadratureConfig {
        rel_tol: a.rel_tol,
        tail_mass: a.tail_mass,
        ..Default::default()
    };
    let n = a.population.n;
    let values = us
        .par_iter()
        .map(|u| cf_product(u, &g, n, &cfg))
        .collect::<Result<Vec<_>>>()?;
    let empirical = match a.empirical {
        Some(count) => {
            let base = RngStream::new(ctx.seed, 2);
            let samples = (0..count as u64)
                .into_par_iter()
                .map(|i| sample_az_naive(&g, n, &base.substream(tag::DRAW, i), DEFAULT_NAIVE_LIMIT))
                .collect::<Result<Vec<_>>>()?;
            Some(us.iter().map(|u| empirical_cf(&samples, u)).collect::<Result<Vec<_>>>()?)
        }
        None => None,
    };
    let mut head = header("u", g.k());
    head.push_str(",re,im,est_error");
    if empirical.is_some() {
        head.push_str(",empirical_re,empirical_im");
    }
    let rows: Vec<Vec<f64>> = us
        .iter()
        .enumerate()
        .map(|(i, u)| {
            let mut row = u.as_slice().to_vec();
            row.extend([values[i].value.re, values[i].value.im, values[i].error]);
            if let Some(e) = &empirical {
                row.extend([e[i].re, e[i].im]);
            }
            row
        })
        .collect();
    ctx.emit(a.out.as_ref(), &rows_to_csv(&head, &rows))?;
    Ok(())
}

fn cmd_asymptotics(a: &AsymptoticsArgs, ctx: &Context) -> std::result::Result<(), Failure> {
    let (g, m) = gaussian_for(&a.population, None, None, ctx)?;
    let n = a.population.n;
    let params = match a.c {
        Some(c) => AsymptoticParams::new(c, g.kappa())?,
        None => AsymptoticParams::for_spec(&g, n)?,
    };
    let mm: DMatrix<f64> = if a.p == 1 {
        DMatrix::from_row_slice(1, m.len(), m.as_slice())
    } else {
        block_average_projection(a.p, g.k())?
    };
    let report = validate_assumptions(&g, &mm, a.coherence_bound)?;
    let mut doc = json!({
        "n": n,
        "k": g.k(),
        "r": g.sigma().rank(),
        "p": a.p,
        "kappa": g.kappa(),
        "c": params.c,
        "assumptions": report,
    });
    if a.p == 1 {
        doc["sigma2"] = json!(sigma2(&m, &g, &params)?);
    } else {
        let omega = omega_matrix(&mm, &g, &params)?;
        let rows: Vec<Vec<f64>> = omega.row_iter().map(|r| r.iter().copied().collect()).collect();
        doc["omega"] = json!(rows);
    }
    let mut text = serde_json::to_string_pretty(&doc)?;
    text.push('\n');
    ctx.emit(a.out.as_ref(), &text)?;
    Ok(())
}

fn experiment_config(a: &ExperimentArgs, ctx: &Context) -> std::result::Result<ExperimentConfig, Failure> {
    let mut cfg = match &a.config {
        Some(path) => {
            let mut cfg: ExperimentConfig = serde_json::from_str(&read(path)?)?;
            cfg.master_seed = ctx.seed;
            cfg
        }
        None => {
            let (Some(n), Some(k), Some(c)) = (a.n, a.k, a.c) else {
                return Err(Usage("--n, --k and --c are required unless --config is given".into()));
            };
            ExperimentConfig::new(n, k, c, ctx.seed)
        }
    };
    if let Some(n) = a.n {
        cfg.n = n;
    }
    if let Some(k) = a.k {
        cfg.k = k;
    }
    if let Some(c) = a.c {
        cfg.c = c;
    }
    if a.kappa.is_some() {
        cfg.kappa = a.kappa;
    }
    Ok(cfg)
}

fn cmd_figure(a: &FigureArgs, ctx: &Context) -> std::result::Result<(), Failure> {
    let mut cfg = experiment_config(&a.experiment, ctx)?;
    if let Some(reps) = a.reps {
        cfg.n_reps = reps;
    }
    if let Some(m) = a.method {
        cfg.method = match m {
            SamplerMethod::Naive => Method::Naive,
            SamplerMethod::Stochrep => Method::Stochrep,
        };
    }
    let res = run_experiment(&cfg)?;
    ctx.log(format!(
        "ks = {:.5}, sup gap = {:.5}, timings = {:?}",
        res.ks_vs_normal, res.sup_density_gap, res.timing
    ));
    let normal = res.normal_density();
    let mut kde_csv = String::from("grid,kde_density,normal_density\n");
    for ((x, d), f) in res.kde.grid.iter().zip(&res.kde.density).zip(&normal) {
        kde_csv.push_str(&format!("{},{},{}\n", fmt_f64(*x), fmt_f64(*d), fmt_f64(*f)));
    }
    let prefix = &a.out_prefix;
    write_atomic(&ctx.resolve(Path::new(&format!("{prefix}_kde.csv"))), kde_csv.as_bytes())?;
    let mut summary = serde_json::to_string_pretty(&res.summary(a.timings))?;
    summary.push('\n');
    write_atomic(
        &ctx.resolve(Path::new(&format!("{prefix}_summary.json"))),
        summary.as_bytes(),
    )?;
    if !a.no_svg {
        let title = format!("n={}, c={}, k={}", cfg.n, cfg.c, cfg.k);
        let svg = density_overlay(&res.kde.grid, &res.kde.density, &normal, &title);
        write_atomic(&ctx.resolve(Path::new(&format!("{prefix}.svg"))), svg.as_bytes())?;
    }
    Ok(())
}

fn cmd_benchmark(a: &BenchmarkArgs, ctx: &Context) -> std::result::Result<(), Failure> {
    let mut cfg = experiment_config(&a.experiment, ctx)?;
    cfg.n_reps = cfg.n_reps.max(100);
    let report = benchmark_with(&cfg, a.draws, a.naive_draws.unwrap_or(a.draws))?;
    ctx.log(format!("speedup: {:.1}x", report.speedup));
    let mut text = serde_json::to_string_pretty(&report)?;
    text.push('\n');
    write_atomic(&ctx.resolve(&a.out), text.as_bytes())?;
    Ok(())
}
