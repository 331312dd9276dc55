// Singular Wishart and singular normal draws from a rank-r population,
// checked against their means.
//
// cargo run --example singular_wishart

use wishart_product::harness::generate_population;
use wishart_product::rng::tag;
use wishart_product::samplers::{sample_chi2, sample_singular_normal, sample_singular_wishart, WishartSpec};
use wishart_product::RngStream;

pub fn run_example() -> wishart_product::Result<()> {
    let (k, r, n) = (6, 3, 4);
    let base = RngStream::new(7, 0);
    let pop = generate_population(k, r, &base.substream(tag::POPULATION, 0))?;
    let gaussian = pop.gaussian(0.5)?;
    let wishart = WishartSpec::new(n, pop.sigma.clone())?;

    let draws = 4000;
    let mut mean_a = nalgebra::DMatrix::zeros(k, k);
    let mut mean_z = nalgebra::DVector::zeros(k);
    let mut chi = 0.0;
    for i in 0..draws {
        let s = base.substream(tag::DRAW, i);
        mean_a += sample_singular_wishart(&wishart, &mut s.substream(tag::WISHART, 0).rng());
        mean_z += sample_singular_normal(&gaussian, &mut s.substream(tag::Z, 0).rng());
        chi += sample_chi2(n, &mut s.substream(tag::ZETA, 0).rng())?;
    }
    let d = draws as f64;
    let sigma = pop.sigma.reconstruct();
    println!(
        "|mean(A)/n - Sigma|_F / |Sigma|_F = {:.3}",
        (mean_a / (d * n as f64) - &sigma).norm() / sigma.norm()
    );
    println!("|mean(z) - mu| = {:.3}", (mean_z / d - &pop.mu).norm());
    println!("mean chi2_{n} = {:.3}", chi / d);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
