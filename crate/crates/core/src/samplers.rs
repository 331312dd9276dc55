//! Random generation primitives: χ² scalars, singular normal vectors and
//! singular Wishart matrices, plus the linear transformations of a Wishart
//! draw.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

use crate::error::{Error, Result};
use crate::spectral::{symmetrize, SpectralCovariance};

/// Singular normal law `N_k(μ, κΣ)`.
#[derive(Debug, Clone)]
pub struct GaussianSpec {
    mu: DVector<f64>,
    kappa: f64,
    sigma: SpectralCovariance,
}

impl GaussianSpec {
    pub fn new(mu: DVector<f64>, kappa: f64, sigma: SpectralCovariance) -> Result<Self> {
        if !(kappa > 0.0) || !kappa.is_finite() {
            return Err(Error::InvalidParameter(format!("kappa must be positive, got {kappa}")));
        }
        if mu.len() != sigma.k() {
            return Err(Error::DimensionMismatch {
                expected: sigma.k(),
                got: mu.len(),
            });
        }
        Ok(Self { mu, kappa, sigma })
    }

    pub fn mu(&self) -> &DVector<f64> {
        &self.mu
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn sigma(&self) -> &SpectralCovariance {
        &self.sigma
    }

    pub fn k(&self) -> usize {
        self.sigma.k()
    }

    /// Centered eigen-coordinates `√κ Λ^{1/2} y`, `y ~ N_r(0, I)`.
    ///
    /// `z = μ + R·coords`; consumes exactly `r` normals from `rng`.
    pub fn draw_centered_coords<R: Rng + ?Sized>(&self, rng: &mut R) -> DVector<f64> {
        let scale = self.kappa.sqrt();
        DVector::from_iterator(
            self.sigma.rank(),
            self.sigma.eigenvalues().iter().map(|l| {
                let y: f64 = StandardNormal.sample(rng);
                scale * l.sqrt() * y
            }),
        )
    }
}

/// Law `W_k(n, Σ)`.
#[derive(Debug, Clone)]
pub struct WishartSpec {
    n: usize,
    sigma: SpectralCovariance,
}

impl WishartSpec {
    pub fn new(n: usize, sigma: SpectralCovariance) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("Wishart degrees of freedom must be >= 1".into()));
        }
        Ok(Self { n, sigma })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn sigma(&self) -> &SpectralCovariance {
        &self.sigma
    }
}

/// One draw from `χ²_n`.
///
/// `n ≤ 2` sums squared normals; larger `n` uses `2·Gamma(n/2, 1)` so the
/// cost does not grow with `n`.
pub fn sample_chi2<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<f64> {
    match n {
        0 => Err(Error::InvalidParameter("chi-square degrees of freedom must be >= 1".into())),
        1 | 2 => Ok((0..n)
            .map(|_| {
                let x: f64 = StandardNormal.sample(rng);
                x * x
            })
            .sum()),
        _ => {
            let gamma = Gamma::new(n as f64 / 2.0, 1.0)
                .map_err(|e| Error::InvalidParameter(e.to_string()))?;
            Ok(2.0 * gamma.sample(rng))
        }
    }
}

/// `len` independent standard normals.
pub fn sample_standard_normal<R: Rng + ?Sized>(len: usize, rng: &mut R) -> DVector<f64> {
    DVector::from_iterator(len, (0..len).map(|_| StandardNormal.sample(rng)))
}

/// `z = μ + √κ R Λ^{1/2} y`; `z − μ` lies in `col(R)`.
pub fn sample_singular_normal<R: Rng + ?Sized>(spec: &GaussianSpec, rng: &mut R) -> DVector<f64> {
    let coords = spec.draw_centered_coords(rng);
    spec.sigma.eigenvectors() * coords + &spec.mu
}

/// `A = X Xᵀ`, columns of `X` iid `N_k(0, Σ)`, accumulated one rank-one
/// update at a time so `X` is never stored.
pub fn sample_singular_wishart<R: Rng + ?Sized>(spec: &WishartSpec, rng: &mut R) -> DMatrix<f64> {
    let sigma = &spec.sigma;
    let k = sigma.k();
    let roots: Vec<f64> = sigma.eigenvalues().iter().map(|l| l.sqrt()).collect();
    let mut a = DMatrix::<f64>::zeros(k, k);
    let mut coords = DVector::<f64>::zeros(sigma.rank());
    let mut column = DVector::<f64>::zeros(k);
    for _ in 0..spec.n {
        for (c, root) in coords.iter_mut().zip(&roots) {
            let y: f64 = StandardNormal.sample(rng);
            *c = root * y;
        }
        column.gemv(1.0, sigma.eigenvectors(), &coords, 0.0);
        // lower triangle only
        a.syger(1.0, &column, &column, 1.0);
    }
    a.fill_upper_triangle_with_lower_triangle();
    a
}

/// `M A Mᵀ`, symmetrized. With a covariance supplied, first checks that
/// `MΣ` does not vanish.
pub fn project_wishart(
    m: &DMatrix<f64>,
    a: &DMatrix<f64>,
    sigma: Option<&SpectralCovariance>,
) -> Result<DMatrix<f64>> {
    if m.ncols() != a.nrows() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            got: m.ncols(),
        });
    }
    if let Some(sigma) = sigma {
        let mut mr = m * sigma.eigenvectors();
        for (mut col, &l) in mr.column_iter_mut().zip(sigma.eigenvalues().iter()) {
            col *= l;
        }
        let scale = m.amax().max(f64::MIN_POSITIVE) * sigma.lambda_max();
        if mr.amax() <= 1e-12 * scale {
            return Err(Error::ZeroProjection);
        }
    }
    Ok(symmetrize(&(m * a * m.transpose())))
}

/// `wᵀAw / wᵀΣw`, distributed as `χ²_n` for a direction outside `null(Σ)`.
pub fn whitened_quadratic_form(
    w: &DVector<f64>,
    a: &DMatrix<f64>,
    sigma: &SpectralCovariance,
) -> Result<f64> {
    let denom = sigma.quadratic_power(w, 1.0);
    let tol = 1e-12 * sigma.lambda_max() * w.norm_squared();
    if !(denom > tol) {
        return Err(Error::DegenerateDirection { value: denom });
    }
    Ok((a * w).dot(w) / denom)
}
