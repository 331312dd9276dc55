use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::samplers::GaussianSpec;
use crate::spectral::{symmetric_eigen_sorted, RankTolerance, SpectralCovariance};

/// Simulation population: mean, covariance factor and the fixed direction.
#[derive(Debug, Clone)]
pub struct Population {
    pub mu: DVector<f64>,
    pub sigma: SpectralCovariance,
    pub m: DVector<f64>,
}

impl Population {
    pub fn gaussian(&self, kappa: f64) -> Result<GaussianSpec> {
        GaussianSpec::new(self.mu.clone(), kappa, self.sigma.clone())
    }
}

/// Draws a population of dimension `k` and rank `r`:
/// eigenvalues iid uniform on (0, 1), eigenvectors taken from the top `r`
/// eigenvectors of `GGᵀ` with `G` a `k × k` standard normal matrix,
/// `μ` iid uniform on [−1, 1] and `m = 1/k`.
pub fn generate_population(k: usize, r: usize, stream: &RngStream) -> Result<Population> {
    if r == 0 || r >= k {
        return Err(Error::InvalidParameter(format!(
            "population rank must satisfy 1 <= r < k, got r = {r}, k = {k}"
        )));
    }
    let mut rng = stream.substream(0, 0).rng();
    let g = DMatrix::from_fn(k, k, |_, _| rng.sample::<f64, _>(rand_distr::StandardNormal));
    let w = &g * g.transpose();
    let (_, vectors) = symmetric_eigen_sorted(&w);
    let frame = vectors.columns(k - r, r).into_owned();

    let mut rng = stream.substream(1, 0).rng();
    let mut values: Vec<f64> = (0..r)
        .map(|_| loop {
            let v: f64 = rng.random();
            if v >= 1e-12 {
                break v;
            }
        })
        .collect();
    values.sort_by(f64::total_cmp);

    let mut rng = stream.substream(2, 0).rng();
    let mu = DVector::from_fn(k, |_, _| rng.random_range(-1.0..=1.0));

    let sigma = SpectralCovariance::from_parts(frame, DVector::from_vec(values), RankTolerance::default())?;
    Ok(Population {
        mu,
        sigma,
        m: DVector::from_element(k, 1.0 / k as f64),
    })
}

/// `p × k` projection whose row `j` averages the `j`-th of `p` contiguous
/// coordinate blocks. Row 0 of the `p = 1` case is `1/k`.
pub fn block_average_projection(p: usize, k: usize) -> Result<DMatrix<f64>> {
    if p == 0 || p > k {
        return Err(Error::InvalidParameter(format!("need 1 <= p <= k, got p = {p}, k = {k}")));
    }
    let mut m = DMatrix::zeros(p, k);
    for j in 0..p {
        let (lo, hi) = (j * k / p, (j + 1) * k / p);
        let w = 1.0 / (hi - lo) as f64;
        for col in lo..hi {
            m[(j, col)] = w;
        }
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn population_shape() {
        let pop = generate_population(30, 12, &RngStream::new(5, 0)).unwrap();
        assert!(pop.m.iter().all(|&v| v == 1.0 / 30.0));
        assert!(pop.mu.iter().all(|&v| (-1.0..=1.0).contains(&v)));
        assert_eq!(pop.sigma.rank(), 12);
        assert!(pop.sigma.eigenvalues().iter().all(|&l| l > 0.0 && l < 1.0));
        let r = pop.sigma.eigenvectors();
        assert!((r.transpose() * r - DMatrix::identity(12, 12)).amax() <= 1e-10);
    }

    #[test]
    fn population_is_deterministic() {
        let a = generate_population(20, 5, &RngStream::new(9, 1)).unwrap();
        let b = generate_population(20, 5, &RngStream::new(9, 1)).unwrap();
        assert_eq!(a.mu, b.mu);
        assert_eq!(a.sigma, b.sigma);
    }

    #[test]
    fn population_rank_bounds() {
        assert!(generate_population(10, 10, &RngStream::new(0, 0)).is_err());
        assert!(generate_population(10, 0, &RngStream::new(0, 0)).is_err());
    }

    #[test]
    fn block_projection_rows() {
        let m = block_average_projection(3, 7).unwrap();
        for row in m.row_iter() {
            assert!((row.sum() - 1.0).abs() < 1e-15);
        }
        let one = block_average_projection(1, 4).unwrap();
        assert!(one.iter().all(|&v| v == 0.25));
    }
}
