// Draw M A z by the stochastic representation and by brute force, and
// compare the two samples coordinate-wise.
//
// cargo run --release --example product_sampler

use wishart_product::harness::{block_average_projection, generate_population};
use wishart_product::product::{naive_many, ProductSpec, StochRepSampler, DEFAULT_NAIVE_LIMIT};
use wishart_product::rng::tag;
use wishart_product::stats::{ks_two_sample, ks_two_sample_critical_1pct, mean};
use wishart_product::RngStream;

pub fn run_example() -> wishart_product::Result<()> {
    let (k, r, n, p) = (8, 4, 12, 2);
    let pop = generate_population(k, r, &RngStream::new(3, 0).substream(tag::POPULATION, 0))?;
    let m = block_average_projection(p, k)?;
    let spec = ProductSpec::vector(pop.gaussian(1.0 / n as f64)?, n, m)?;

    let count = 5000;
    let sampler = StochRepSampler::new(spec.clone())?;
    let fast = sampler.draw_many(&RngStream::new(3, 1), count)?;
    let slow = naive_many(&spec, &RngStream::new(3, 2), count, DEFAULT_NAIVE_LIMIT)?;

    println!("exact mean n M Sigma mu = {:?}", spec.mean().as_slice());
    for j in 0..p {
        let a: Vec<f64> = fast.iter().map(|x| x[j]).collect();
        let b: Vec<f64> = slow.iter().map(|x| x[j]).collect();
        println!(
            "coord {j}: mean stochrep {:.4}, naive {:.4}, KS {:.4} (1% critical {:.4})",
            mean(&a),
            mean(&b),
            ks_two_sample(&a, &b)?,
            ks_two_sample_critical_1pct(count, count)
        );
    }
    println!("clamp events: {}", sampler.clamp_events());
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
