// Limiting variance of m'Az, the assumption report, and a check of the
// standardized draws against N(0, 1).
//
// cargo run --release --example asymptotic_variance

use nalgebra::DMatrix;
use wishart_product::asymptotics::{
    sigma2, standardize_scalar, validate_assumptions, AsymptoticParams, DEFAULT_COHERENCE_BOUND,
};
use wishart_product::harness::generate_population;
use wishart_product::product::{ProductSpec, StochRepSampler};
use wishart_product::rng::tag;
use wishart_product::stats::{ks_statistic, Reference};
use wishart_product::RngStream;

pub fn run_example() -> wishart_product::Result<()> {
    let (n, k, r) = (200, 150, 100);
    let kappa = 1.0 / n as f64;
    let pop = generate_population(k, r, &RngStream::new(5, 0).substream(tag::POPULATION, 0))?;
    let gaussian = pop.gaussian(kappa)?;
    let params = AsymptoticParams::for_spec(&gaussian, n)?;
    println!("c = {:.3}, sigma^2 = {:.6}", params.c, sigma2(&pop.m, &gaussian, &params)?);

    let row = DMatrix::from_row_slice(1, k, pop.m.as_slice());
    let report = validate_assumptions(&gaussian, &row, DEFAULT_COHERENCE_BOUND)?;
    println!("assumption warnings: {:?}", report.warnings);

    let sampler = StochRepSampler::new(ProductSpec::scalar(gaussian.clone(), n, pop.m.clone())?)?;
    let draws: Vec<f64> = sampler
        .draw_many(&RngStream::new(5, 1), 20_000)?
        .iter()
        .map(|x| x[0])
        .collect();
    let z = standardize_scalar(&draws, &pop.m, &gaussian, n, None)?;
    println!("KS vs N(0,1): {:.4}", ks_statistic(&z, Reference::StdNormal)?);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
