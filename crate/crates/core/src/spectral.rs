//! Spectral factorization of rank-deficient symmetric matrices.
//!
//! Every covariance in the crate is carried as a [`SpectralCovariance`]:
//! the `r` positive eigenvalues of a `k × k` PSD matrix together with a
//! `k × r` block of orthonormal eigenvectors. Square roots, pseudo-inverse
//! quadratic forms and Σ-products are all evaluated through that factor so
//! nothing `k × k` has to be rebuilt.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Eigenvalue threshold used to decide the numerical rank.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankTolerance {
    pub abs_tol: f64,
    pub rel_tol: f64,
}

impl Default for RankTolerance {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-12,
        }
    }
}

impl RankTolerance {
    pub fn new(abs_tol: f64, rel_tol: f64) -> Result<Self> {
        let ok = abs_tol.is_finite()
            && rel_tol.is_finite()
            && abs_tol >= 0.0
            && rel_tol >= 0.0
            && (abs_tol > 0.0 || rel_tol > 0.0);
        if !ok {
            return Err(Error::InvalidParameter(format!(
                "rank tolerance ({abs_tol}, {rel_tol}) must be finite, non-negative and not both zero"
            )));
        }
        Ok(Self { abs_tol, rel_tol })
    }

    /// Cut-off `max(abs_tol, rel_tol·λ_max)`.
    pub fn threshold(&self, lambda_max: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * lambda_max.abs())
    }
}

/// Rank-`r` factorization `Σ = R Λ Rᵀ` of a `k × k` PSD matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralCovariance {
    eigenvalues: DVector<f64>,
    eigenvectors: DMatrix<f64>,
}

impl SpectralCovariance {
    /// Builds a factor from explicit eigenpairs. Eigenvalues are sorted
    /// ascending (columns permuted to match) and must exceed the tolerance.
    pub fn from_parts(
        eigenvectors: DMatrix<f64>,
        eigenvalues: DVector<f64>,
        tol: RankTolerance,
    ) -> Result<Self> {
        let r = eigenvalues.len();
        if r == 0 {
            return Err(Error::RankZero {
                tolerance: tol.abs_tol,
            });
        }
        if eigenvectors.ncols() != r {
            return Err(Error::DimensionMismatch {
                expected: r,
                got: eigenvectors.ncols(),
            });
        }
        if eigenvectors.nrows() < r {
            return Err(Error::InvalidParameter(format!(
                "rank {r} exceeds dimension {}",
                eigenvectors.nrows()
            )));
        }
        let lambda_max = eigenvalues.max();
        let cut = tol.threshold(lambda_max);
        if let Some(bad) = eigenvalues.iter().find(|&&l| !(l > cut)) {
            return Err(Error::InvalidParameter(format!(
                "eigenvalue {bad:e} does not exceed the rank tolerance {cut:e}"
            )));
        }
        let gram = eigenvectors.transpose() * &eigenvectors;
        let dev = (gram - DMatrix::identity(r, r)).amax();
        if dev > 1e-10 {
            return Err(Error::InvalidParameter(format!(
                "eigenvector columns not orthonormal (deviation {dev:e})"
            )));
        }
        let mut order: Vec<usize> = (0..r).collect();
        order.sort_by(|&a, &b| eigenvalues[a].total_cmp(&eigenvalues[b]));
        let values = DVector::from_iterator(r, order.iter().map(|&i| eigenvalues[i]));
        let vectors = DMatrix::from_columns(
            &order
                .iter()
                .map(|&i| eigenvectors.column(i).into_owned())
                .collect::<Vec<_>>(),
        );
        Ok(Self {
            eigenvalues: values,
            eigenvectors: vectors,
        })
    }

    /// `I_k` as a full-rank factor.
    pub fn identity(k: usize) -> Self {
        Self {
            eigenvalues: DVector::from_element(k, 1.0),
            eigenvectors: DMatrix::identity(k, k),
        }
    }

    pub fn k(&self) -> usize {
        self.eigenvectors.nrows()
    }

    pub fn rank(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Eigenvalues, ascending.
    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    /// `k × r` eigenvector block `R`.
    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.eigenvectors
    }

    pub fn lambda_min(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn lambda_max(&self) -> f64 {
        self.eigenvalues[self.rank() - 1]
    }

    /// Dense `R Λ Rᵀ`.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        self.scaled_outer(|l| l)
    }

    /// Coordinates `Rᵀx` in the eigenbasis.
    pub fn project(&self, x: &DVector<f64>) -> DVector<f64> {
        self.eigenvectors.tr_mul(x)
    }

    /// `Σ^a x` for any real power `a`, evaluated on the column space.
    pub fn apply_power(&self, x: &DVector<f64>, power: f64) -> DVector<f64> {
        let mut coords = self.project(x);
        for (c, l) in coords.iter_mut().zip(self.eigenvalues.iter()) {
            *c *= l.powf(power);
        }
        &self.eigenvectors * coords
    }

    /// `xᵀ Σ^a x` via `Σ λ_i^a (u_iᵀx)²`.
    pub fn quadratic_power(&self, x: &DVector<f64>, power: f64) -> f64 {
        self.project(x)
            .iter()
            .zip(self.eigenvalues.iter())
            .map(|(c, l)| l.powf(power) * c * c)
            .sum()
    }

    /// `tr(Σ^a)`.
    pub fn trace_power(&self, power: f64) -> f64 {
        self.eigenvalues.iter().map(|l| l.powf(power)).sum()
    }

    /// `‖(I − RRᵀ) x‖_max`: how far `x` sits outside the column space.
    pub fn null_residual(&self, x: &DVector<f64>) -> f64 {
        (x - &self.eigenvectors * self.project(x)).amax()
    }

    fn scaled_outer(&self, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
        let mut scaled = self.eigenvectors.clone();
        for (mut col, &l) in scaled.column_iter_mut().zip(self.eigenvalues.iter()) {
            col *= f(l);
        }
        let out = scaled * self.eigenvectors.transpose();
        symmetrize(&out)
    }
}

/// `(X + Xᵀ) / 2`.
pub fn symmetrize(x: &DMatrix<f64>) -> DMatrix<f64> {
    (x + x.transpose()) * 0.5
}

fn check_symmetric(s: &DMatrix<f64>) -> Result<()> {
    if !s.is_square() {
        return Err(Error::DimensionMismatch {
            expected: s.nrows(),
            got: s.ncols(),
        });
    }
    let scale = s.amax().max(1.0);
    let asym = (s - s.transpose()).amax();
    if asym > 1e-12 * scale {
        return Err(Error::NotSymmetric { asymmetry: asym });
    }
    Ok(())
}

/// Eigenpairs of a symmetric matrix, eigenvalues ascending.
pub fn symmetric_eigen_sorted(s: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let eig = symmetrize(s).symmetric_eigen();
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut vectors = DMatrix::zeros(s.nrows(), n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

/// Rank-revealing spectral factorization of a symmetric PSD matrix.
pub fn spectral_decompose(s: &DMatrix<f64>, tol: RankTolerance) -> Result<SpectralCovariance> {
    check_symmetric(s)?;
    let (values, vectors) = symmetric_eigen_sorted(s);
    let lambda_max = values.iter().fold(0.0_f64, |m, v| m.max(*v));
    let cut = tol.threshold(lambda_max);
    if let Some(&neg) = values.iter().find(|&&v| v < -cut) {
        return Err(Error::NotPositiveSemiDefinite {
            eigenvalue: neg,
            tolerance: cut,
        });
    }
    let keep: Vec<usize> = (0..values.len()).filter(|&i| values[i] > cut).collect();
    if keep.is_empty() {
        return Err(Error::RankZero { tolerance: cut });
    }
    let eigenvalues = DVector::from_iterator(keep.len(), keep.iter().map(|&i| values[i]));
    let eigenvectors = DMatrix::from_columns(
        &keep
            .iter()
            .map(|&i| vectors.column(i).into_owned())
            .collect::<Vec<_>>(),
    );
    Ok(SpectralCovariance {
        eigenvalues,
        eigenvectors,
    })
}

/// Symmetric PSD square root `R Λ^{1/2} Rᵀ`.
pub fn sqrt_psd(spec: &SpectralCovariance) -> DMatrix<f64> {
    spec.scaled_outer(f64::sqrt)
}

/// `xᵀ Σ⁺ x = (Rᵀx)ᵀ Λ⁻¹ (Rᵀx)`.
pub fn pseudo_inverse_quadratic(spec: &SpectralCovariance, x: &DVector<f64>) -> f64 {
    spec.quadratic_power(x, -1.0)
}

/// Symmetric power `S^a` of a symmetric positive-definite matrix.
///
/// Fails with [`Error::DegenerateProjection`] when the smallest eigenvalue is
/// not positive relative to the largest.
pub fn spd_power(s: &DMatrix<f64>, power: f64) -> Result<DMatrix<f64>> {
    check_symmetric(s)?;
    let (values, vectors) = symmetric_eigen_sorted(s);
    let max = values[values.len() - 1];
    if !(values[0] > 1e-14 * max.abs()) || !(max > 0.0) {
        return Err(Error::DegenerateProjection);
    }
    let mut scaled = vectors.clone();
    for (mut col, &l) in scaled.column_iter_mut().zip(values.iter()) {
        col *= l.powf(power);
    }
    Ok(symmetrize(&(scaled * vectors.transpose())))
}

/// Closed-form square-root factor of the rank-one downdate `D − bbᵀ`:
///
/// `X = D^{1/2} (I − c D^{-1/2} b bᵀ D^{-1/2})`,
/// `c = (1 − √(1 − β)) / β`, `β = bᵀD⁻¹b`.
///
/// `X Xᵀ = D − bbᵀ` always, but `X` is symmetric only when `b` is an
/// eigenvector of `D` (in particular when `D` is a multiple of `I`).
/// `c` takes its limit `1/2` for `β < 1e−14`.
pub fn rank_one_downdate_factor(d: &DMatrix<f64>, b: &DVector<f64>) -> Result<DMatrix<f64>> {
    let (d_half, g, beta) = downdate_parts(d, b)?;
    let c = downdate_coefficient(beta);
    let p = d.nrows();
    let inner = DMatrix::identity(p, p) - (&g * g.transpose()) * c;
    Ok(d_half * inner)
}

/// Symmetric PSD square root `X` of `D − bbᵀ`, so `X² = XXᵀ = D − bbᵀ`.
///
/// When `D = αI` this is the closed-form factor above (which is then
/// symmetric); otherwise the factor is not symmetric and the root comes
/// from a p×p symmetric eigendecomposition of `D − bbᵀ`.
pub fn rank_one_downdate_sqrt(d: &DMatrix<f64>, b: &DVector<f64>) -> Result<DMatrix<f64>> {
    let p = d.nrows();
    let (d_half, g, beta) = downdate_parts(d, b)?;
    let alpha = d.diagonal().mean();
    let off = (d - DMatrix::identity(p, p) * alpha).amax();
    if off <= 1e-15 * d.amax() {
        let c = downdate_coefficient(beta);
        let inner = DMatrix::identity(p, p) - (&g * g.transpose()) * c;
        return Ok(symmetrize(&(d_half * inner)));
    }
    let target = symmetrize(&(d - b * b.transpose()));
    let (values, vectors) = symmetric_eigen_sorted(&target);
    let roots = values.map(|v| v.max(0.0).sqrt());
    Ok(symmetrize(&(&vectors * DMatrix::from_diagonal(&roots) * vectors.transpose())))
}

fn downdate_parts(d: &DMatrix<f64>, b: &DVector<f64>) -> Result<(DMatrix<f64>, DVector<f64>, f64)> {
    let p = d.nrows();
    if b.len() != p {
        return Err(Error::DimensionMismatch {
            expected: p,
            got: b.len(),
        });
    }
    let d_half = spd_power(d, 0.5)?;
    let d_inv_half = spd_power(d, -0.5)?;
    let g = &d_inv_half * b;
    let beta = g.norm_squared();
    if beta > 1.0 + 1e-12 {
        return Err(Error::DowndateNotPsd { beta });
    }
    Ok((d_half, g, beta))
}

/// `c(β) = (1 − √(1 − β)) / β` with the `β → 0` limit `1/2`; `β` is clipped
/// to `[0, 1]`.
pub fn downdate_coefficient(beta: f64) -> f64 {
    if beta < 1e-14 {
        return 0.5;
    }
    let beta = beta.min(1.0);
    // 1 − √(1 − β) rewritten as β / (1 + √(1 − β)) to avoid cancellation.
    1.0 / (1.0 + (1.0 - beta).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn gaussian(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
        DMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
    }

    #[test]
    fn diagonal_rank_two() {
        let s = DMatrix::from_diagonal(&DVector::from_vec(vec![4.0, 1.0, 0.0]));
        let spec = spectral_decompose(&s, RankTolerance::new(1e-10, 0.0).unwrap()).unwrap();
        assert_eq!(spec.rank(), 2);
        assert_eq!(spec.eigenvalues().as_slice(), &[1.0, 4.0]);
    }

    #[test]
    fn identity_is_full_rank() {
        let spec = spectral_decompose(&DMatrix::identity(5, 5), RankTolerance::default()).unwrap();
        assert_eq!(spec.rank(), 5);
        assert!(spec.eigenvalues().iter().all(|&l| (l - 1.0).abs() < 1e-14));
        let r = spec.eigenvectors();
        // signed permutation: every entry is 0 or ±1
        assert!(r.iter().all(|v| v.abs() < 1e-12 || (v.abs() - 1.0).abs() < 1e-12));
    }

    #[test]
    fn random_gram_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let g = gaussian(6, 3, &mut rng);
        let s = &g * g.transpose();
        let spec = spectral_decompose(&s, RankTolerance::default()).unwrap();
        assert_eq!(spec.rank(), 3);
        assert!((spec.reconstruct() - &s).amax() <= 1e-8);
        let r = spec.eigenvectors();
        assert!((r.transpose() * r - DMatrix::identity(3, 3)).amax() <= 1e-10);
    }

    #[test]
    fn decompose_errors() {
        let mut asym = DMatrix::identity(2, 2);
        asym[(0, 1)] = 0.5;
        assert!(matches!(
            spectral_decompose(&asym, RankTolerance::default()),
            Err(Error::NotSymmetric { .. })
        ));
        let neg = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, -0.5]));
        assert!(matches!(
            spectral_decompose(&neg, RankTolerance::default()),
            Err(Error::NotPositiveSemiDefinite { .. })
        ));
        assert!(matches!(
            spectral_decompose(&DMatrix::zeros(3, 3), RankTolerance::default()),
            Err(Error::RankZero { .. })
        ));
        assert!(RankTolerance::new(0.0, 0.0).is_err());
        assert!(RankTolerance::new(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn sqrt_examples() {
        let id = SpectralCovariance::identity(3);
        assert!((sqrt_psd(&id) - DMatrix::identity(3, 3)).amax() < 1e-15);
        let s = DMatrix::from_diagonal(&DVector::from_vec(vec![4.0, 9.0]));
        let spec = spectral_decompose(&s, RankTolerance::default()).unwrap();
        let root = sqrt_psd(&spec);
        let expect = DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 3.0]));
        assert!((root - expect).amax() < 1e-14);
    }

    #[test]
    fn pseudo_inverse_examples() {
        let id = SpectralCovariance::identity(4);
        let e1 = DVector::from_fn(4, |i, _| if i == 0 { 1.0 } else { 0.0 });
        assert!((pseudo_inverse_quadratic(&id, &e1) - 1.0).abs() < 1e-15);

        let s = DMatrix::from_diagonal(&DVector::from_vec(vec![4.0, 0.0]));
        let spec = spectral_decompose(&s, RankTolerance::default()).unwrap();
        let x = DVector::from_vec(vec![2.0, 7.0]);
        assert!((pseudo_inverse_quadratic(&spec, &x) - 1.0).abs() < 1e-14);
        let null = DVector::from_vec(vec![0.0, 3.0]);
        assert_eq!(pseudo_inverse_quadratic(&spec, &null), 0.0);
    }

    #[test]
    fn downdate_examples() {
        let x = rank_one_downdate_sqrt(&DMatrix::identity(2, 2), &DVector::zeros(2)).unwrap();
        assert!((x - DMatrix::identity(2, 2)).amax() < 1e-15);

        // scalar: c = 2/3, root of 4 − 3 = 1
        let d = DMatrix::from_element(1, 1, 4.0);
        let b = DVector::from_element(1, 3.0_f64.sqrt());
        assert!((downdate_coefficient(0.75) - 2.0 / 3.0).abs() < 1e-15);
        let x = rank_one_downdate_sqrt(&d, &b).unwrap();
        assert!((x[(0, 0)] - 1.0).abs() < 1e-12);
        assert!((x[(0, 0)].powi(2) - 1.0).abs() < 1e-12);

        // boundary β = 1
        let e1 = DVector::from_vec(vec![1.0, 0.0]);
        let x = rank_one_downdate_sqrt(&DMatrix::identity(2, 2), &e1).unwrap();
        let expect = DMatrix::from_diagonal(&DVector::from_vec(vec![0.0, 1.0]));
        assert!((&x - &expect).amax() < 1e-12);
        let target = DMatrix::identity(2, 2) - &e1 * e1.transpose();
        assert!((&x * &x - target).amax() < 1e-12);
    }

    #[test]
    fn downdate_rejects_non_psd() {
        let b = DVector::from_vec(vec![1.1, 0.0]);
        assert!(matches!(
            rank_one_downdate_sqrt(&DMatrix::identity(2, 2), &b),
            Err(Error::DowndateNotPsd { .. })
        ));
    }

    #[test]
    fn downdate_scaled_identity_is_symmetric_root() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let d = DMatrix::identity(3, 3) * 2.5;
        let b = gaussian(3, 1, &mut rng).column(0).into_owned();
        let b = &b * (0.9 * 2.5_f64.sqrt() / b.norm());
        let x = rank_one_downdate_sqrt(&d, &b).unwrap();
        assert!((&x - x.transpose()).amax() < 1e-12);
        assert!((&x * &x - (&d - &b * b.transpose())).amax() < 1e-12);
    }
}
