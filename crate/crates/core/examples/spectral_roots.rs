// Thin spectral decomposition of a rank-deficient covariance, its PSD
// square root and the rank-one downdate root.
//
// cargo run --example spectral_roots

use nalgebra::{DMatrix, DVector};
use wishart_product::spectral::{
    pseudo_inverse_quadratic, rank_one_downdate_sqrt, spectral_decompose, sqrt_psd, RankTolerance,
};

pub fn run_example() -> wishart_product::Result<()> {
    // rank 2 inside R^3
    let b = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 1.0, 1.0, 0.0, 2.0]);
    let s = &b * b.transpose();
    let sigma = spectral_decompose(&s, RankTolerance::default())?;
    println!("k = {}, rank = {}", sigma.k(), sigma.rank());
    println!("eigenvalues: {:?}", sigma.eigenvalues().as_slice());

    let root = sqrt_psd(&sigma);
    println!("|root^2 - S|_F = {:.3e}", (&root * &root - &s).norm());

    let x = &s * DVector::from_column_slice(&[1.0, 0.0, 0.5]);
    println!("x' S^+ x = {:.6}", pseudo_inverse_quadratic(&sigma, &x));

    let d = DMatrix::from_diagonal(&DVector::from_column_slice(&[4.0, 2.0, 1.0]));
    let v = DVector::from_column_slice(&[0.5, 0.5, 0.5]);
    let xr = rank_one_downdate_sqrt(&d, &v)?;
    let target = &d - &v * v.transpose();
    println!("|X X' - (D - vv')|_F = {:.3e}", (&xr * xr.transpose() - target).norm());
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
