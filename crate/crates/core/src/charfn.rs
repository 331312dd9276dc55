//! Characteristic function of `Az` as a one-dimensional integral against
//! the χ²_n density, and its empirical counterpart.
//!
//! For fixed `ζ` the inner Gaussian integral over `y = Rᵀz` is closed-form;
//! what remains is
//!
//! ```text
//! φ(u) = C ∫ |Ω(ζ)|^{-1/2} f_n(ζ) exp(iζ νᵀΛv − ζ²/2 vᵀΛΩ⁻¹Λv + νᵀΩν/2) dζ
//! Ω(ζ) = κ⁻¹Λ⁻¹ + ζ (Λ·vᵀΛv − Λvvᵀ Λ),   ν = κ⁻¹ Ω⁻¹ Λ⁻¹ Rᵀμ,   v = Rᵀu
//! C    = exp(−μᵀΣ⁺μ / 2κ) / (κ^{r/2} |Λ|^{1/2})
//! ```
//!
//! Everything is carried as log-modulus plus phase: at `n` in the hundreds
//! both the determinant and the Gaussian factor underflow in linear form.
//! The integral is taken in `s = √ζ` (`dζ = 2s ds`), which removes the
//! `ζ^{-1/2}` singularity of `f_1` at the origin.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma_ur, ln_gamma};

use crate::error::{Error, Result};
use crate::quadrature::adaptive_simpson;
use crate::samplers::GaussianSpec;
use crate::spectral::pseudo_inverse_quadratic;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CfQuadratureConfig {
    pub rel_tol: f64,
    pub tail_mass: f64,
    pub max_subdivisions: usize,
}

impl Default for CfQuadratureConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-8,
            tail_mass: 1e-12,
            max_subdivisions: 2000,
        }
    }
}

impl CfQuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.rel_tol < 1e-2) {
            return Err(Error::InvalidParameter(format!(
                "rel_tol must lie in (0, 1e-2), got {}",
                self.rel_tol
            )));
        }
        if !(self.tail_mass > 0.0 && self.tail_mass < 1e-6) {
            return Err(Error::InvalidParameter(format!(
                "tail_mass must lie in (0, 1e-6), got {}",
                self.tail_mass
            )));
        }
        if self.max_subdivisions == 0 {
            return Err(Error::InvalidParameter("max_subdivisions must be positive".into()));
        }
        Ok(())
    }
}

/// Quadrature value of `φ(u)` and its error estimate (quadrature plus
/// truncated tail mass).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CfEstimate {
    pub value: Complex64,
    pub error: f64,
}

/// `ln f_{χ²_n}(ζ)`.
pub fn chi2_logpdf(zeta: f64, n: usize) -> Result<f64> {
    if !(zeta > 0.0) {
        return Err(Error::DomainError(format!("chi-square density needs zeta > 0, got {zeta}")));
    }
    if n == 0 {
        return Err(Error::DomainError("chi-square degrees of freedom must be >= 1".into()));
    }
    let half = n as f64 / 2.0;
    Ok((half - 1.0) * zeta.ln() - zeta / 2.0 - half * std::f64::consts::LN_2 - ln_gamma(half))
}

/// `ln(2s · f_n(s²))`, the density of `√ζ`, finite at `s = 0` for `n = 1`.
fn log_root_density(s: f64, n: usize) -> f64 {
    let half = n as f64 / 2.0;
    let tail = std::f64::consts::LN_2 - s * s / 2.0 - half * std::f64::consts::LN_2 - ln_gamma(half);
    if s == 0.0 {
        return if n == 1 { tail } else { f64::NEG_INFINITY };
    }
    (n as f64 - 1.0) * s.ln() + tail
}

/// Smallest `U` (to bisection accuracy) with `P(χ²_n > U) ≤ tail_mass`.
pub fn chi2_truncation_point(n: usize, tail_mass: f64) -> f64 {
    let a = n as f64 / 2.0;
    let upper = |x: f64| gamma_ur(a, x / 2.0);
    let mut hi = (n as f64).max(1.0);
    while upper(hi) > tail_mass {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if upper(mid) > tail_mass {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-10 * hi {
            break;
        }
    }
    hi
}

/// Per-`u` scratch for the integrand.
#[derive(Debug, Clone)]
pub struct CfIntegrandState {
    /// `Rᵀu`
    pub v: DVector<f64>,
    /// `Λv`
    lambda_v: DVector<f64>,
    /// `uᵀΣu = vᵀΛv`
    u_sigma_u: f64,
    /// `κ⁻¹Λ⁻¹Rᵀμ`; `ν = Ω⁻¹ · this`
    shifted_mean: DVector<f64>,
    lambda: DVector<f64>,
    kappa: f64,
    /// `κ⁻¹ μᵀΣ⁺μ`
    mahalanobis: f64,
    /// `ln C`
    pub log_prefactor: f64,
    n: usize,
}

impl CfIntegrandState {
    pub fn new(u: &DVector<f64>, spec: &GaussianSpec, n: usize) -> Result<Self> {
        let sigma = spec.sigma();
        if u.len() != sigma.k() {
            return Err(Error::DimensionMismatch {
                expected: sigma.k(),
                got: u.len(),
            });
        }
        if u.iter().any(|x| !x.is_finite()) {
            return Err(Error::DomainError("u must be finite".into()));
        }
        let kappa = spec.kappa();
        let lambda = sigma.eigenvalues().clone();
        let v = sigma.project(u);
        let lambda_v = v.component_mul(&lambda);
        let u_sigma_u = v.dot(&lambda_v);
        let r_mu = sigma.project(spec.mu());
        let shifted_mean = r_mu.component_div(&lambda) / kappa;
        let mahalanobis = pseudo_inverse_quadratic(sigma, spec.mu()) / kappa;
        let r = lambda.len() as f64;
        let log_prefactor =
            -0.5 * mahalanobis - 0.5 * r * kappa.ln() - 0.5 * lambda.iter().map(|l| l.ln()).sum::<f64>();
        Ok(Self {
            v,
            lambda_v,
            u_sigma_u,
            shifted_mean,
            lambda,
            kappa,
            mahalanobis,
            log_prefactor,
            n,
        })
    }

    /// The `ζ`-term `Λ·uᵀΣu − Λvvᵀ Λ` of `Ω(ζ)`; PSD for every `u`.
    pub fn omega_slope(&self) -> DMatrix<f64> {
        let mut m = -(&self.lambda_v * self.lambda_v.transpose());
        for (i, l) in self.lambda.iter().enumerate() {
            m[(i, i)] += l * self.u_sigma_u;
        }
        m
    }

    pub fn omega(&self, zeta: f64) -> DMatrix<f64> {
        let mut m = self.omega_slope() * zeta;
        for (i, l) in self.lambda.iter().enumerate() {
            m[(i, i)] += 1.0 / (self.kappa * l);
        }
        m
    }

    fn factor(&self, zeta: f64) -> Result<Cholesky<f64, Dyn>> {
        let omega = self.omega(zeta);
        Cholesky::new(omega).ok_or(Error::IllConditioned { zeta })
    }

    /// `ln|integrand|` and phase at `ζ`, without the density factor.
    pub fn log_modulus_phase(&self, zeta: f64) -> Result<(f64, f64)> {
        let chol = self.factor(zeta)?;
        let log_det = 2.0 * chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum::<f64>();
        if !log_det.is_finite() {
            return Err(Error::IllConditioned { zeta });
        }
        let solved_a = chol.solve(&self.lambda_v);
        let nu = chol.solve(&self.shifted_mean);
        let gaussian = -0.5 * zeta * zeta * self.lambda_v.dot(&solved_a);
        // ½νᵀΩν − ½κ⁻¹μᵀΣ⁺μ = −d/2 ≤ 0
        let shift = 0.5 * self.shifted_mean.dot(&nu) - 0.5 * self.mahalanobis;
        let log_mod = self.log_prefactor + 0.5 * self.mahalanobis - 0.5 * log_det + gaussian + shift;
        let phase = zeta * nu.dot(&self.lambda_v);
        Ok((log_mod, phase))
    }

    /// Integrand in `s = √ζ`: `2s f_n(s²) · g(s²)`.
    fn evaluate_root(&self, s: f64) -> Result<Complex64> {
        let log_density = log_root_density(s, self.n);
        if log_density == f64::NEG_INFINITY {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let (log_mod, phase) = self.log_modulus_phase(s * s)?;
        Ok(Complex64::from_polar((log_mod + log_density).exp(), phase))
    }
}

/// `φ(u) = E exp(i uᵀAz)` for `A ~ W_k(n, Σ)`, `z ~ N_k(μ, κΣ)`.
///
/// Returns exactly `1` when `Rᵀu = 0`: then `uᵀAz ≡ 0`.
pub fn cf_product(
    u: &DVector<f64>,
    spec: &GaussianSpec,
    n: usize,
    cfg: &CfQuadratureConfig,
) -> Result<CfEstimate> {
    cfg.validate()?;
    if n == 0 {
        return Err(Error::InvalidParameter("degrees of freedom n must be >= 1".into()));
    }
    let state = CfIntegrandState::new(u, spec, n)?;
    if state.v.iter().all(|x| *x == 0.0) {
        return Ok(CfEstimate {
            value: Complex64::new(1.0, 0.0),
            error: 0.0,
        });
    }
    let upper = chi2_truncation_point(n, cfg.tail_mass).sqrt();
    let result = adaptive_simpson(
        |s| state.evaluate_root(s),
        0.0,
        upper,
        cfg.rel_tol,
        32,
        cfg.max_subdivisions,
    )?;
    Ok(CfEstimate {
        value: result.value,
        error: result.error + cfg.tail_mass,
    })
}

/// Monte Carlo `(1/N) Σ exp(i uᵀx_j)`.
pub fn empirical_cf(samples: &[DVector<f64>], u: &DVector<f64>) -> Result<Complex64> {
    if samples.is_empty() {
        return Err(Error::EmptySample);
    }
    let sum = samples.iter().try_fold(Complex64::new(0.0, 0.0), |acc, x| {
        if x.len() != u.len() {
            return Err(Error::DimensionMismatch {
                expected: u.len(),
                got: x.len(),
            });
        }
        Ok(acc + Complex64::from_polar(1.0, u.dot(x)))
    })?;
    Ok(sum / samples.len() as f64)
}
