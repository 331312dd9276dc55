//! High-dimensional asymptotics of `mᵀAz` and `MAz` when `r, n → ∞` with
//! `r/n → c`: the limiting variance σ², the limiting covariance Ω, the
//! standardizing maps, and an advisory check of the eigenvalue and
//! coherence bounds the limit theory assumes.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::samplers::GaussianSpec;
use crate::spectral::{spd_power, symmetrize};

/// Concentration `c` and scale `κ` of the double asymptotic regime.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticParams {
    pub c: f64,
    pub kappa: f64,
    /// `(r, n)` when `c` was derived as `r/n`.
    pub derived_from: Option<(usize, usize)>,
}

impl AsymptoticParams {
    pub fn new(c: f64, kappa: f64) -> Result<Self> {
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::ZeroConcentration(c));
        }
        check_kappa(kappa)?;
        Ok(Self {
            c,
            kappa,
            derived_from: None,
        })
    }

    /// `c = r/n`.
    pub fn from_rank(r: usize, n: usize, kappa: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("n must be >= 1".into()));
        }
        if r == 0 {
            return Err(Error::ZeroConcentration(0.0));
        }
        check_kappa(kappa)?;
        Ok(Self {
            c: r as f64 / n as f64,
            kappa,
            derived_from: Some((r, n)),
        })
    }

    /// `c = rank(Σ)/n`, `κ` taken from the Gaussian law.
    pub fn for_spec(spec: &GaussianSpec, n: usize) -> Result<Self> {
        Self::from_rank(spec.sigma().rank(), n, spec.kappa())
    }

    /// `κ/c`; computed as `κn/r` when `c` came from `(r, n)`.
    pub fn kappa_over_c(&self) -> f64 {
        match self.derived_from {
            Some((r, n)) => self.kappa * n as f64 / r as f64,
            None => self.kappa / self.c,
        }
    }
}

fn check_kappa(kappa: f64) -> Result<()> {
    if !(kappa > 0.0) || !kappa.is_finite() {
        return Err(Error::InvalidParameter(format!("kappa must be positive, got {kappa}")));
    }
    Ok(())
}

/// `M R` and `Rᵀμ`, the only `k`-sized contractions needed.
struct Reduced {
    mr: DMatrix<f64>,
    r_mu: DVector<f64>,
    lambda: DVector<f64>,
}

impl Reduced {
    fn new(m: &DMatrix<f64>, spec: &GaussianSpec) -> Result<Self> {
        if m.ncols() != spec.k() {
            return Err(Error::DimensionMismatch {
                expected: spec.k(),
                got: m.ncols(),
            });
        }
        let sigma = spec.sigma();
        Ok(Self {
            mr: m * sigma.eigenvectors(),
            r_mu: sigma.project(spec.mu()),
            lambda: sigma.eigenvalues().clone(),
        })
    }

    /// `M Σ^a Mᵀ`
    fn m_sigma_m(&self, power: i32) -> DMatrix<f64> {
        let mut scaled = self.mr.clone();
        for (mut col, l) in scaled.column_iter_mut().zip(self.lambda.iter()) {
            col *= l.powi(power);
        }
        symmetrize(&(scaled * self.mr.transpose()))
    }

    /// `M Σ μ`
    fn m_sigma_mu(&self) -> DVector<f64> {
        &self.mr * self.r_mu.component_mul(&self.lambda)
    }

    /// `κ tr(Σ²) + μᵀΣμ`
    fn scale_term(&self, kappa: f64) -> f64 {
        let tr2: f64 = self.lambda.iter().map(|l| l * l).sum();
        let mu_sigma_mu: f64 = self
            .r_mu
            .iter()
            .zip(self.lambda.iter())
            .map(|(x, l)| l * x * x)
            .sum();
        kappa * tr2 + mu_sigma_mu
    }
}

/// Limiting covariance
/// `Ω = MΣμμᵀΣMᵀ + MΣMᵀ[κ tr(Σ²) + μᵀΣμ] + (κ/c) MΣ³Mᵀ`.
pub fn omega_matrix(
    m: &DMatrix<f64>,
    spec: &GaussianSpec,
    params: &AsymptoticParams,
) -> Result<DMatrix<f64>> {
    if !(params.c > 0.0) {
        return Err(Error::ZeroConcentration(params.c));
    }
    let red = Reduced::new(m, spec)?;
    let msm = red.m_sigma_m(1);
    // MΣMᵀ must be positive definite
    spd_power(&msm, 1.0).map_err(|_| Error::DegenerateProjection)?;
    let msmu = red.m_sigma_mu();
    let omega = &msmu * msmu.transpose()
        + msm * red.scale_term(params.kappa)
        + red.m_sigma_m(3) * params.kappa_over_c();
    Ok(symmetrize(&omega))
}

/// Limiting variance
/// `σ² = (mᵀΣμ)² + mᵀΣm[κ tr(Σ²) + μᵀΣμ] + (κ/c) mᵀΣ³m`.
pub fn sigma2(m: &DVector<f64>, spec: &GaussianSpec, params: &AsymptoticParams) -> Result<f64> {
    if !(params.c > 0.0) {
        return Err(Error::ZeroConcentration(params.c));
    }
    let sigma = spec.sigma();
    if m.len() != sigma.k() {
        return Err(Error::DimensionMismatch {
            expected: sigma.k(),
            got: m.len(),
        });
    }
    let msm = sigma.quadratic_power(m, 1.0);
    if !(msm > 1e-12 * sigma.lambda_max() * m.norm_squared()) {
        return Err(Error::DegenerateDirection { value: msm });
    }
    let red = Reduced::new(&DMatrix::from_row_slice(1, m.len(), m.as_slice()), spec)?;
    let msmu = red.m_sigma_mu()[0];
    Ok(msmu * msmu
        + msm * red.scale_term(params.kappa)
        + params.kappa_over_c() * sigma.quadratic_power(m, 3.0))
}

/// Affine map `x ↦ √n (x/n − mᵀΣμ) / σ` and its inverse.
#[derive(Debug, Clone, Copy)]
pub struct ScalarStandardizer {
    pub n: usize,
    pub center: f64,
    pub sigma: f64,
}

impl ScalarStandardizer {
    pub fn new(
        m: &DVector<f64>,
        spec: &GaussianSpec,
        n: usize,
        params: Option<AsymptoticParams>,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("n must be >= 1".into()));
        }
        let params = match params {
            Some(p) => p,
            None => AsymptoticParams::for_spec(spec, n)?,
        };
        let s2 = sigma2(m, spec, &params)?;
        let center = m.dot(&spec.sigma().apply_power(spec.mu(), 1.0));
        Ok(Self {
            n,
            center,
            sigma: s2.sqrt(),
        })
    }

    pub fn apply(&self, x: f64) -> f64 {
        let n = self.n as f64;
        n.sqrt() * (x / n - self.center) / self.sigma
    }

    pub fn invert(&self, y: f64) -> f64 {
        let n = self.n as f64;
        n * (y * self.sigma / n.sqrt() + self.center)
    }
}

/// Standardizes draws of `mᵀAz`; `c = r/n` unless `params` is given.
pub fn standardize_scalar(
    samples: &[f64],
    m: &DVector<f64>,
    spec: &GaussianSpec,
    n: usize,
    params: Option<AsymptoticParams>,
) -> Result<Vec<f64>> {
    let st = ScalarStandardizer::new(m, spec, n, params)?;
    Ok(samples.iter().map(|&x| st.apply(x)).collect())
}

/// Map `x ↦ √n Ω^{-1/2} (x/n − MΣμ)` with the symmetric inverse root.
#[derive(Debug, Clone)]
pub struct VectorStandardizer {
    pub n: usize,
    pub center: DVector<f64>,
    pub omega_inv_half: DMatrix<f64>,
}

impl VectorStandardizer {
    pub fn new(
        m: &DMatrix<f64>,
        spec: &GaussianSpec,
        n: usize,
        params: Option<AsymptoticParams>,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("n must be >= 1".into()));
        }
        let params = match params {
            Some(p) => p,
            None => AsymptoticParams::for_spec(spec, n)?,
        };
        let omega = omega_matrix(m, spec, &params)?;
        let omega_inv_half = spd_power(&omega, -0.5)?;
        let center = m * spec.sigma().apply_power(spec.mu(), 1.0);
        Ok(Self {
            n,
            center,
            omega_inv_half,
        })
    }

    pub fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        let n = self.n as f64;
        (&self.omega_inv_half * (x / n - &self.center)) * n.sqrt()
    }
}

/// Standardizes draws of `MAz`; `c = r/n` unless `params` is given.
pub fn standardize_vector(
    samples: &[DVector<f64>],
    m: &DMatrix<f64>,
    spec: &GaussianSpec,
    n: usize,
    params: Option<AsymptoticParams>,
) -> Result<Vec<DVector<f64>>> {
    let st = VectorStandardizer::new(m, spec, n, params)?;
    samples
        .iter()
        .map(|x| {
            if x.len() != st.center.len() {
                return Err(Error::DimensionMismatch {
                    expected: st.center.len(),
                    got: x.len(),
                });
            }
            Ok(st.apply(x))
        })
        .collect()
}

/// Instance-level summary of the eigenvalue and coherence bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionReport {
    pub lambda_min: f64,
    pub lambda_max: f64,
    /// `max_i |u_iᵀμ|`
    pub max_mu_coherence: f64,
    /// `max_{i,j} |u_iᵀm_j|`
    pub max_m_coherence: f64,
    /// `κ·r`
    pub kappa_r: f64,
    pub warnings: Vec<String>,
}

/// Coherence bound above which [`validate_assumptions`] warns.
pub const DEFAULT_COHERENCE_BOUND: f64 = 10.0;

/// Computes the report; never fails on the numbers themselves, since a
/// single instance cannot violate an asymptotic-family statement.
pub fn validate_assumptions(
    spec: &GaussianSpec,
    m: &DMatrix<f64>,
    coherence_bound: f64,
) -> Result<AssumptionReport> {
    let sigma = spec.sigma();
    if m.ncols() != sigma.k() {
        return Err(Error::DimensionMismatch {
            expected: sigma.k(),
            got: m.ncols(),
        });
    }
    let r = sigma.rank();
    let max_mu_coherence = sigma.project(spec.mu()).amax();
    let max_m_coherence = (m * sigma.eigenvectors()).amax();
    let report_kappa_r = spec.kappa() * r as f64;
    let mut warnings = Vec::new();
    if sigma.lambda_min() < 1e-6 {
        warnings.push(format!("lambda_min = {:e} is below 1e-6", sigma.lambda_min()));
    }
    if report_kappa_r > 10.0 {
        warnings.push(format!("kappa*r = {report_kappa_r} exceeds 10"));
    }
    if max_mu_coherence > coherence_bound {
        warnings.push(format!(
            "max |u_i'mu| = {max_mu_coherence} exceeds {coherence_bound}"
        ));
    }
    if max_m_coherence > coherence_bound {
        warnings.push(format!(
            "max |u_i'm_j| = {max_m_coherence} exceeds {coherence_bound}"
        ));
    }
    if r >= sigma.k() {
        warnings.push(format!("rank r = {r} is not below the dimension k = {}", sigma.k()));
    }
    Ok(AssumptionReport {
        lambda_min: sigma.lambda_min(),
        lambda_max: sigma.lambda_max(),
        max_mu_coherence,
        max_m_coherence,
        kappa_r: report_kappa_r,
        warnings,
    })
}
