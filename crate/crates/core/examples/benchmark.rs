// Per-draw cost of the stochastic representation versus materializing
// the Wishart matrix.
//
// cargo run --release --example benchmark -- 500 750 0.5

use wishart_product::harness::{benchmark_with, ExperimentConfig};

pub fn run_example() -> wishart_product::Result<()> {
    run_with(100, 150, 0.5, 200, 10)
}

fn run_with(n: usize, k: usize, c: f64, draws: usize, naive_draws: usize) -> wishart_product::Result<()> {
    let cfg = ExperimentConfig::new(n, k, c, 1);
    let rep = benchmark_with(&cfg, draws, naive_draws)?;
    println!(
        "n={} k={} r={}: stochrep {:.2e} s/draw (setup {:.2e} s), naive {:.2e} s/draw, speedup {:.0}x",
        rep.n, rep.k, rep.r, rep.stochrep_per_draw_secs, rep.stochrep_setup_secs, rep.naive_per_draw_secs, rep.speedup
    );
    println!(
        "largest buffers: stochrep {} B, naive {} B",
        rep.stochrep_largest_allocation_bytes, rep.naive_largest_allocation_bytes
    );
    Ok(())
}

#[allow(dead_code)]
fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let result = if args.len() == 3 {
        run_with(
            args[0].parse().expect("n"),
            args[1].parse().expect("k"),
            args[2].parse().expect("c"),
            1000,
            20,
        )
    } else {
        run_example()
    };
    if let Err(e) = result {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
