// The full Monte Carlo experiment: population, replications, KDE of the
// standardized statistic and an SVG overlay against the normal density.
//
// cargo run --release --example figure_experiment -- 500 750 0.5 10000

use wishart_product::harness::{run_experiment, svg::density_overlay, ExperimentConfig};

pub fn run_example() -> wishart_product::Result<()> {
    run_with(60, 80, 0.5, 2000, None)
}

fn run_with(n: usize, k: usize, c: f64, reps: usize, svg_path: Option<&str>) -> wishart_product::Result<()> {
    let mut cfg = ExperimentConfig::new(n, k, c, 2024);
    cfg.n_reps = reps;
    let res = run_experiment(&cfg)?;
    println!(
        "n={n} k={k} c={c}: r={}, sigma^2={:.5}, h={:.4}, KS={:.4}, sup|f-phi|={:.4}",
        res.rank, res.sigma2, res.kde.bandwidth, res.ks_vs_normal, res.sup_density_gap
    );
    if let Some(path) = svg_path {
        let svg = density_overlay(&res.kde.grid, &res.kde.density, &res.normal_density(), "m'Az, standardized");
        std::fs::write(path, svg)?;
        println!("wrote {path}");
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let result = if args.len() == 4 {
        let parse = |i: usize| args[i].parse::<f64>().expect("numeric argument");
        run_with(
            parse(0) as usize,
            parse(1) as usize,
            parse(2),
            parse(3) as usize,
            Some("figure_experiment.svg"),
        )
    } else {
        run_example()
    };
    if let Err(e) = result {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
