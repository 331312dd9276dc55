// End-to-end checks of the `wishart-product` binary.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_wishart-product"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const SUBCOMMANDS: [&str; 6] = ["sample", "sample-product", "charfn", "asymptotics", "figure", "benchmark"];

#[test]
fn figure_writes_three_files() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&[
        "figure", "--n", "40", "--k", "50", "--c", "0.5", "--reps", "500", "--seed", "7",
        "--out-dir", dir.path().to_str().unwrap(), "--out-prefix", "fig",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    for name in ["fig_kde.csv", "fig_summary.json", "fig.svg"] {
        assert!(dir.path().join(name).is_file(), "{name} missing");
    }
    let csv = std::fs::read_to_string(dir.path().join("fig_kde.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("grid,kde_density,normal_density"));
    assert_eq!(csv.lines().count(), 402);
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("fig_summary.json")).unwrap()).unwrap();
    assert_eq!(summary["config"]["n"], 40);
    assert!(summary.get("timing").is_none());
}

#[test]
fn missing_seed_is_a_usage_error() {
    for args in [
        vec!["figure", "--n", "40", "--k", "50", "--c", "0.5"],
        vec!["sample", "--dist", "chi2", "--n", "3"],
    ] {
        let o = run(&args);
        assert_eq!(o.status.code(), Some(2));
        assert!(stderr(&o).contains("--seed"), "{}", stderr(&o));
    }
}

#[test]
fn rank_violation_is_a_runtime_error() {
    let o = run(&["figure", "--c", "0.5", "--n", "500", "--k", "200", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("InvalidParameter"), "{err}");
    assert!(err.contains("250") && err.contains("k = 200"), "{err}");
}

#[test]
fn unknown_flag_names_the_flag() {
    let o = run(&["sample", "--dist", "chi2", "--n", "3", "--seed", "1", "--frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--frobnicate"));
}

#[test]
fn every_subcommand_has_help() {
    for sub in SUBCOMMANDS {
        let o = run(&[sub, "--help"]);
        assert_eq!(o.status.code(), Some(0), "{sub}");
        let text = String::from_utf8_lossy(&o.stdout);
        assert!(text.contains("--seed"), "{sub} help lacks --seed");
        assert!(text.contains("Usage"), "{sub}");
    }
}

#[test]
fn chi2_samples_to_stdout() {
    let o = run(&["sample", "--dist", "chi2", "--n", "4", "--n-draws", "5", "--seed", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x"));
    let values: Vec<f64> = lines.map(|l| l.parse().unwrap()).collect();
    assert_eq!(values.len(), 5);
    assert!(values.iter().all(|v| *v > 0.0));
}

#[test]
fn numbers_round_trip_through_csv() {
    let o = run(&["sample", "--dist", "normal", "--n", "4", "--k", "5", "--r", "2", "--n-draws", "3", "--seed", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    for field in text.lines().skip(1).flat_map(|l| l.split(',')) {
        let v: f64 = field.parse().unwrap();
        assert_eq!(format!("{v:.16e}"), field);
    }
}

#[test]
fn wishart_rows_are_flattened_matrices() {
    let o = run(&["sample", "--dist", "wishart", "--n", "2", "--k", "3", "--r", "2", "--seed", "5"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    let row: Vec<f64> = text.lines().nth(1).unwrap().split(',').map(|x| x.parse().unwrap()).collect();
    assert_eq!(row.len(), 9);
    assert_eq!(row[1], row[3]);
}

#[test]
fn sample_reads_a_covariance_file() {
    let dir = tempfile::tempdir().unwrap();
    let sigma = dir.path().join("sigma.csv");
    std::fs::write(&sigma, "# k=2,r=1\n1,0\n0,0\n").unwrap();
    let o = run(&[
        "sample", "--dist", "normal", "--n", "1", "--sigma", sigma.to_str().unwrap(), "--n-draws", "10", "--seed", "2",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    for line in text.lines().skip(1) {
        let second: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert_eq!(second, 0.0);
    }
}

#[test]
fn charfn_at_zero_is_exactly_one() {
    let dir = tempfile::tempdir().unwrap();
    let u = dir.path().join("u.csv");
    std::fs::write(&u, "0,0,0\n0.1,0.2,-0.1\n").unwrap();
    let o = run(&["charfn", "--u", u.to_str().unwrap(), "--n", "4", "--k", "3", "--r", "2", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("u1,u2,u3,re,im,est_error"));
    let first: Vec<f64> = lines.next().unwrap().split(',').map(|x| x.parse().unwrap()).collect();
    assert_eq!((first[3], first[4]), (1.0, 0.0));
}

#[test]
fn asymptotics_prints_json() {
    let o = run(&["asymptotics", "--n", "100", "--k", "80", "--r", "50", "--seed", "4"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["sigma2"].as_f64().unwrap() > 0.0);
    assert!((v["assumptions"]["kappa_r"].as_f64().unwrap() - 0.5).abs() < 1e-12);

    let o = run(&["asymptotics", "--n", "100", "--k", "80", "--r", "50", "--p", "2", "--seed", "4"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["omega"].as_array().unwrap().len(), 2);
}

#[test]
fn sample_product_methods() {
    for method in ["naive", "stochrep"] {
        let o = run(&[
            "sample-product", "--method", method, "--n", "6", "--k", "8", "--r", "4", "--p", "2", "--n-draws", "20",
            "--seed", "9",
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        let text = String::from_utf8(o.stdout).unwrap();
        assert_eq!(text.lines().next(), Some("x1,x2"));
        assert_eq!(text.lines().count(), 21);
    }
}

#[test]
fn benchmark_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("bench.json");
    let o = run(&[
        "benchmark", "--n", "50", "--k", "60", "--c", "0.5", "--draws", "100", "--naive-draws", "5", "--seed", "1",
        "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["naive_largest_allocation_bytes"], 60 * 60 * 8);
    assert!(v["speedup"].as_f64().unwrap() > 0.0);
}

#[test]
fn figure_accepts_a_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"n": 30, "k": 40, "c": 0.5, "n_reps": 300, "master_seed": 0}"#).unwrap();
    let o = run(&[
        "figure", "--config", cfg.to_str().unwrap(), "--seed", "8", "--no-svg",
        "--out-dir", dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("figure_summary.json")).unwrap()).unwrap();
    assert_eq!(summary["config"]["n_reps"], 300);
    assert_eq!(summary["config"]["master_seed"], 8);
    assert!(!Path::new(&dir.path().join("figure.svg")).exists());
}
