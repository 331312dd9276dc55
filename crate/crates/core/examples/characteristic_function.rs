// Characteristic function of A z by one-dimensional quadrature, next to
// its Monte Carlo estimate.
//
// cargo run --release --example characteristic_function

use nalgebra::DVector;
use wishart_product::charfn::{cf_product, empirical_cf, CfQuadratureConfig};
use wishart_product::harness::generate_population;
use wishart_product::product::{sample_az_naive, DEFAULT_NAIVE_LIMIT};
use wishart_product::rng::tag;
use wishart_product::RngStream;

pub fn run_example() -> wishart_product::Result<()> {
    let (k, r, n) = (4, 2, 5);
    let base = RngStream::new(11, 0);
    let pop = generate_population(k, r, &base.substream(tag::POPULATION, 0))?;
    let gaussian = pop.gaussian(0.2)?;
    let cfg = CfQuadratureConfig::default();

    let samples = (0..20_000)
        .map(|i| sample_az_naive(&gaussian, n, &base.substream(tag::DRAW, i), DEFAULT_NAIVE_LIMIT))
        .collect::<wishart_product::Result<Vec<_>>>()?;

    for scale in [0.0, 0.1, 0.3, 1.0] {
        let u = DVector::from_element(k, scale);
        let phi = cf_product(&u, &gaussian, n, &cfg)?;
        let emp = empirical_cf(&samples, &u)?;
        println!(
            "u = {scale:.1}·1: quadrature {:.5}{:+.5}i (±{:.1e}), empirical {:.5}{:+.5}i",
            phi.value.re, phi.value.im, phi.error, emp.re, emp.im
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
