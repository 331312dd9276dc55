//! Samplers for the products `MAz` and `mᵀAz`.
//!
//! [`StochRepSampler`] draws through the stochastic representation: a χ²_n
//! scalar, one singular normal vector and a `p`-vector of standard normals,
//! never forming `A`. [`sample_product_naive`] materializes `A` and is kept
//! as the brute-force oracle.
//!
//! All per-draw quantities are evaluated in the eigen-coordinates
//! `w = Rᵀz`: `t = Σ^{1/2}z = RΛ^{1/2}w`, so `tᵀt = wᵀΛw`, `MΣ^{1/2}t = MΣz`
//! and `Pt = (MΣMᵀ)^{-1/2} MΣz`. `Q = PᵀP` is never formed.

use std::sync::atomic::{AtomicU64, Ordering};

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rng::{tag, RngStream};
use crate::samplers::{
    sample_chi2, sample_singular_normal, sample_singular_wishart, sample_standard_normal,
    GaussianSpec, WishartSpec,
};
use crate::spectral::spd_power;

/// Default `k` above which the naive sampler refuses to allocate `A`.
pub const DEFAULT_NAIVE_LIMIT: usize = 2000;

/// Relative width of the window in which negative rounding residue is
/// clamped to zero.
const CLAMP_WINDOW: f64 = 1e-9;

#[derive(Debug, Clone)]
pub enum Projection {
    /// `mᵀ` (scalar product).
    Scalar(DVector<f64>),
    /// `M`, `p × k` (vector product).
    Vector(DMatrix<f64>),
}

/// A full problem instance: the law of `z`, the Wishart degrees of freedom
/// and the projection.
#[derive(Debug, Clone)]
pub struct ProductSpec {
    gaussian: GaussianSpec,
    n: usize,
    projection: Projection,
}

impl ProductSpec {
    /// Scalar case; requires `mᵀΣm > 0`.
    pub fn scalar(gaussian: GaussianSpec, n: usize, m: DVector<f64>) -> Result<Self> {
        check_dof(n)?;
        if m.len() != gaussian.k() {
            return Err(Error::DimensionMismatch {
                expected: gaussian.k(),
                got: m.len(),
            });
        }
        let sigma = gaussian.sigma();
        let msm = sigma.quadratic_power(&m, 1.0);
        if !(msm > 1e-12 * sigma.lambda_max() * m.norm_squared()) {
            return Err(Error::DegenerateDirection { value: msm });
        }
        Ok(Self {
            gaussian,
            n,
            projection: Projection::Scalar(m),
        })
    }

    /// Vector case; requires `rank(M) = p < r ≤ n` and `MΣMᵀ` positive
    /// definite.
    pub fn vector(gaussian: GaussianSpec, n: usize, m: DMatrix<f64>) -> Result<Self> {
        check_dof(n)?;
        if m.ncols() != gaussian.k() {
            return Err(Error::DimensionMismatch {
                expected: gaussian.k(),
                got: m.ncols(),
            });
        }
        let (p, r) = (m.nrows(), gaussian.sigma().rank());
        if p == 0 || p >= r {
            return Err(Error::InvalidParameter(format!(
                "projection rank p = {p} must satisfy 1 <= p < r = {r}"
            )));
        }
        if r > n {
            return Err(Error::InvalidParameter(format!(
                "rank r = {r} must not exceed the degrees of freedom n = {n}"
            )));
        }
        let svd = m.clone().svd(false, false);
        let smax = svd.singular_values.max();
        let smin = svd.singular_values.min();
        if !(smin > 1e-10 * smax) {
            return Err(Error::InvalidParameter(format!(
                "projection matrix is not of full row rank {p}"
            )));
        }
        Ok(Self {
            gaussian,
            n,
            projection: Projection::Vector(m),
        })
    }

    pub fn gaussian(&self) -> &GaussianSpec {
        &self.gaussian
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn projection(&self) -> &Projection {
        &self.projection
    }

    /// Output dimension `p` (1 for the scalar case).
    pub fn p(&self) -> usize {
        match &self.projection {
            Projection::Scalar(_) => 1,
            Projection::Vector(m) => m.nrows(),
        }
    }

    /// Projection as a `p × k` matrix.
    pub fn projection_matrix(&self) -> DMatrix<f64> {
        match &self.projection {
            Projection::Scalar(m) => DMatrix::from_row_slice(1, m.len(), m.as_slice()),
            Projection::Vector(m) => m.clone(),
        }
    }

    /// `n·MΣμ`, the mean of `MAz`.
    pub fn mean(&self) -> DVector<f64> {
        let sigma_mu = self.gaussian.sigma().apply_power(self.gaussian.mu(), 1.0);
        self.projection_matrix() * sigma_mu * self.n as f64
    }
}

fn check_dof(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParameter("degrees of freedom n must be >= 1".into()));
    }
    Ok(())
}

/// Per-spec quantities for the vector representation.
#[derive(Debug, Clone)]
pub struct ProjectionCache {
    /// `(MΣMᵀ)^{-1/2} M Σ^{1/2}`, `p × k`, orthonormal rows.
    pub p: DMatrix<f64>,
    /// `(MΣMᵀ)^{1/2}`.
    pub half: DMatrix<f64>,
    /// `(MΣMᵀ)^{-1/2}`.
    pub inv_half: DMatrix<f64>,
    /// `MΣ`, `p × k`.
    pub msigma: DMatrix<f64>,
    /// `M R Λ`, `p × r`: maps eigen-coordinates `w` to `MΣz`.
    pub mr_lambda: DMatrix<f64>,
}

impl ProjectionCache {
    pub fn new(m: &DMatrix<f64>, gaussian: &GaussianSpec) -> Result<Self> {
        let sigma = gaussian.sigma();
        let r_mat = sigma.eigenvectors();
        let mr = m * r_mat;
        let mut mr_lambda = mr.clone();
        let mut mr_root = mr;
        for ((mut a, mut b), &l) in mr_lambda
            .column_iter_mut()
            .zip(mr_root.column_iter_mut())
            .zip(sigma.eigenvalues().iter())
        {
            a *= l;
            b *= l.sqrt();
        }
        let h = &mr_root * mr_root.transpose();
        let half = spd_power(&h, 0.5)?;
        let inv_half = spd_power(&h, -0.5)?;
        let p = &inv_half * &mr_root * r_mat.transpose();
        let msigma = &mr_lambda * r_mat.transpose();
        let cache = Self {
            p,
            half,
            inv_half,
            msigma,
            mr_lambda,
        };
        let dev = cache.orthonormality_defect();
        if dev > 1e-8 {
            return Err(Error::SpecViolation(format!(
                "P P' deviates from the identity by {dev:e}"
            )));
        }
        Ok(cache)
    }

    /// `‖PPᵀ − I_p‖_max`.
    pub fn orthonormality_defect(&self) -> f64 {
        let pp = &self.p * self.p.transpose();
        (pp - DMatrix::identity(self.p.nrows(), self.p.nrows())).amax()
    }
}

#[derive(Debug, Clone)]
enum Kernel {
    Scalar {
        /// `Λ Rᵀm`
        lambda_rm: DVector<f64>,
        /// `mᵀΣm`
        msm: f64,
    },
    Vector(ProjectionCache),
}

/// Stochastic-representation sampler for one [`ProductSpec`].
///
/// Immutable after construction apart from the clamp counter, so one
/// instance can serve many threads.
#[derive(Debug)]
pub struct StochRepSampler {
    spec: ProductSpec,
    /// `Rᵀμ`
    r_mu: DVector<f64>,
    kernel: Kernel,
    clamps: AtomicU64,
}

impl StochRepSampler {
    pub fn new(spec: ProductSpec) -> Result<Self> {
        let sigma = spec.gaussian.sigma();
        let r_mu = sigma.project(spec.gaussian.mu());
        let kernel = match &spec.projection {
            Projection::Scalar(m) => {
                let mut lambda_rm = sigma.project(m);
                lambda_rm.component_mul_assign(sigma.eigenvalues());
                Kernel::Scalar {
                    lambda_rm,
                    msm: sigma.quadratic_power(m, 1.0),
                }
            }
            Projection::Vector(m) => Kernel::Vector(ProjectionCache::new(m, &spec.gaussian)?),
        };
        Ok(Self {
            spec,
            r_mu,
            kernel,
            clamps: AtomicU64::new(0),
        })
    }

    pub fn spec(&self) -> &ProductSpec {
        &self.spec
    }

    pub fn cache(&self) -> Option<&ProjectionCache> {
        match &self.kernel {
            Kernel::Vector(c) => Some(c),
            Kernel::Scalar { .. } => None,
        }
    }

    /// Number of draws whose negative rounding residue was clamped to zero.
    pub fn clamp_events(&self) -> u64 {
        self.clamps.load(Ordering::Relaxed)
    }

    /// Eigen-coordinates `w = Rᵀz` plus `ζ`, from the `ζ` and `z` substreams.
    fn draw_core(&self, stream: &RngStream) -> Result<(f64, DVector<f64>)> {
        let zeta = sample_chi2(self.spec.n, &mut stream.substream(tag::ZETA, 0).rng())?;
        let centered = self
            .spec
            .gaussian
            .draw_centered_coords(&mut stream.substream(tag::Z, 0).rng());
        Ok((zeta, centered + &self.r_mu))
    }

    fn clamp(&self, value: f64, scale: f64, what: &str) -> Result<f64> {
        if value >= 0.0 {
            Ok(value)
        } else if value >= -CLAMP_WINDOW * scale {
            self.clamps.fetch_add(1, Ordering::Relaxed);
            Ok(0.0)
        } else {
            Err(Error::NumericalBreakdown(format!(
                "{what} = {value:e} is below the clamp window (scale {scale:e})"
            )))
        }
    }

    /// One draw of the scalar product `mᵀAz`.
    pub fn draw_scalar(&self, stream: &RngStream) -> Result<f64> {
        let Kernel::Scalar { lambda_rm, msm } = &self.kernel else {
            return Err(Error::SpecViolation("scalar draw requested on a vector spec".into()));
        };
        let (zeta, w) = self.draw_core(stream)?;
        let msz = lambda_rm.dot(&w);
        let zsz = quad_lambda(self.spec.gaussian.sigma().eigenvalues(), &w);
        let scale = zsz * msm;
        let bracket = self.clamp(scale - msz * msz, scale, "z'Sz m'Sm - (m'Sz)^2")?;
        let z0 = sample_standard_normal(1, &mut stream.substream(tag::Z0, 0).rng())[0];
        Ok(zeta * msz + zeta.sqrt() * bracket.sqrt() * z0)
    }

    /// One draw of the vector product `MAz`.
    pub fn draw_vector(&self, stream: &RngStream) -> Result<DVector<f64>> {
        let Kernel::Vector(cache) = &self.kernel else {
            return Err(Error::SpecViolation("vector draw requested on a scalar spec".into()));
        };
        let (zeta, w) = self.draw_core(stream)?;
        let tt = quad_lambda(self.spec.gaussian.sigma().eigenvalues(), &w);
        let msz = &cache.mr_lambda * &w;
        let s = &cache.inv_half * &msz;
        let ss = s.norm_squared();
        let rest = self.clamp(tt - ss, tt, "t'(I - Q)t")?;
        let z0 = sample_standard_normal(s.len(), &mut stream.substream(tag::Z0, 0).rng());

        let root_tt = tt.sqrt();
        let mut v = &z0 * root_tt;
        if ss >= 1e-14 * tt && tt > 0.0 {
            // (√tt − √rest) / ss, rewritten without cancellation
            let frac = 1.0 / (root_tt + rest.sqrt());
            v.axpy(-frac * s.dot(&z0), &s, 1.0);
        }
        Ok(msz * zeta + (&cache.half * v) * zeta.sqrt())
    }

    /// One draw as a `p`-vector, whichever the case.
    pub fn draw(&self, stream: &RngStream) -> Result<DVector<f64>> {
        match self.kernel {
            Kernel::Scalar { .. } => Ok(DVector::from_element(1, self.draw_scalar(stream)?)),
            Kernel::Vector(_) => self.draw_vector(stream),
        }
    }

    /// `count` draws; draw `i` uses `base.substream(DRAW, i)`, so the
    /// result does not depend on the number of worker threads.
    pub fn draw_many(&self, base: &RngStream, count: usize) -> Result<Vec<DVector<f64>>> {
        (0..count as u64)
            .into_par_iter()
            .map(|i| self.draw(&base.substream(tag::DRAW, i)))
            .collect()
    }
}

fn quad_lambda(lambda: &DVector<f64>, w: &DVector<f64>) -> f64 {
    lambda.iter().zip(w.iter()).map(|(l, x)| l * x * x).sum()
}

/// One draw of `mᵀAz` through the scalar stochastic representation.
pub fn sample_product_scalar_stochrep(spec: &ProductSpec, stream: &RngStream) -> Result<f64> {
    StochRepSampler::new(spec.clone())?.draw_scalar(stream)
}

/// One draw of `MAz` through the vector stochastic representation.
pub fn sample_product_vector_stochrep(
    spec: &ProductSpec,
    stream: &RngStream,
) -> Result<DVector<f64>> {
    StochRepSampler::new(spec.clone())?.draw_vector(stream)
}

/// `A z` with `A ~ W_k(n, Σ)` materialized and `z ~ N_k(μ, κΣ)` independent.
pub fn sample_az_naive(
    gaussian: &GaussianSpec,
    n: usize,
    stream: &RngStream,
    limit: usize,
) -> Result<DVector<f64>> {
    let k = gaussian.k();
    if k > limit {
        return Err(Error::DimensionGuard { k, limit });
    }
    let wishart = WishartSpec::new(n, gaussian.sigma().clone())?;
    let a = sample_singular_wishart(&wishart, &mut stream.substream(tag::WISHART, 0).rng());
    let z = sample_singular_normal(gaussian, &mut stream.substream(tag::Z, 0).rng());
    Ok(a * z)
}

/// Brute-force `M A z` (length 1 in the scalar case).
pub fn sample_product_naive(spec: &ProductSpec, stream: &RngStream) -> Result<DVector<f64>> {
    sample_product_naive_with_limit(spec, stream, DEFAULT_NAIVE_LIMIT)
}

pub fn sample_product_naive_with_limit(
    spec: &ProductSpec,
    stream: &RngStream,
    limit: usize,
) -> Result<DVector<f64>> {
    let az = sample_az_naive(&spec.gaussian, spec.n, stream, limit)?;
    Ok(match &spec.projection {
        Projection::Scalar(m) => DVector::from_element(1, m.dot(&az)),
        Projection::Vector(m) => m * az,
    })
}

/// `count` naive draws, draw `i` on `base.substream(DRAW, i)`.
pub fn naive_many(
    spec: &ProductSpec,
    base: &RngStream,
    count: usize,
    limit: usize,
) -> Result<Vec<DVector<f64>>> {
    (0..count as u64)
        .into_par_iter()
        .map(|i| sample_product_naive_with_limit(spec, &base.substream(tag::DRAW, i), limit))
        .collect()
}
