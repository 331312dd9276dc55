// Algebraic invariants over randomly generated instances.

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use wishart_product::asymptotics::{
    omega_matrix, sigma2, AsymptoticParams, ScalarStandardizer,
};
use wishart_product::charfn::CfIntegrandState;
use wishart_product::harness::{generate_population, kde_epanechnikov, silverman_bandwidth, trapezoid};
use wishart_product::product::ProjectionCache;
use wishart_product::rng::tag;
use wishart_product::samplers::{sample_singular_normal, sample_singular_wishart, GaussianSpec, WishartSpec};
use wishart_product::spectral::{
    pseudo_inverse_quadratic, rank_one_downdate_factor, rank_one_downdate_sqrt, spectral_decompose,
    sqrt_psd, symmetric_eigen_sorted, RankTolerance, SpectralCovariance,
};
use wishart_product::RngStream;

fn gaussian_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
}

fn gaussian_vector(len: usize, rng: &mut ChaCha8Rng) -> DVector<f64> {
    DVector::from_fn(len, |_, _| StandardNormal.sample(rng))
}

/// `B Bᵀ` with `B` k×r Gaussian: rank r almost surely.
fn random_low_rank(k: usize, r: usize, rng: &mut ChaCha8Rng) -> (DMatrix<f64>, SpectralCovariance) {
    let b = gaussian_matrix(k, r, rng);
    let s = &b * b.transpose();
    let spec = spectral_decompose(&s, RankTolerance::default()).unwrap();
    (s, spec)
}

fn random_gaussian(k: usize, r: usize, kappa: f64, rng: &mut ChaCha8Rng) -> GaussianSpec {
    let (_, sigma) = random_low_rank(k, r, rng);
    GaussianSpec::new(gaussian_vector(k, rng), kappa, sigma).unwrap()
}

fn dims() -> impl Strategy<Value = (usize, usize)> {
    (2usize..=20).prop_flat_map(|k| (Just(k), 1..k))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn decomposition_is_orthonormal_and_reconstructs((k, r) in dims(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (s, spec) = random_low_rank(k, r, &mut rng);
        prop_assert_eq!(spec.rank(), r);
        let rr = spec.eigenvectors();
        let defect = (rr.transpose() * rr - DMatrix::identity(r, r)).amax();
        prop_assert!(defect <= 1e-10, "R'R - I = {defect:e}");
        let rel = (spec.reconstruct() - &s).norm() / s.norm();
        prop_assert!(rel <= 1e-8, "reconstruction {rel:e}");
    }

    #[test]
    fn sqrt_psd_squares_back((k, r) in dims(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (_, spec) = random_low_rank(k, r, &mut rng);
        let root = sqrt_psd(&spec);
        let target = spec.reconstruct();
        let rel = (&root * &root - &target).amax() / target.amax();
        prop_assert!(rel <= 1e-9, "relative square-back error {rel:e}");
        prop_assert!((&root - root.transpose()).amax() <= 1e-12 * root.amax());
    }

    #[test]
    fn downdate_root_squares_back(p in 1usize..=6, beta in 0.0f64..=1.0, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = gaussian_matrix(p, p, &mut rng);
        let d = &c * c.transpose() + DMatrix::identity(p, p);
        // b = √β · D^{1/2} e / |e|, so bᵀD⁻¹b = β exactly
        let e = gaussian_vector(p, &mut rng).normalize();
        let d_half = wishart_product::spectral::spd_power(&d, 0.5).unwrap();
        let b = (&d_half * e) * beta.sqrt();
        let target = &d - &b * b.transpose();
        let scale = d.amax();

        let x = rank_one_downdate_sqrt(&d, &b).unwrap();
        prop_assert!((&x - x.transpose()).amax() <= 1e-12 * scale);
        let err = (&x * &x - &target).amax();
        prop_assert!(err <= 1e-9 * scale, "X^2 error {err:e}");

        let f = rank_one_downdate_factor(&d, &b).unwrap();
        let err = (&f * f.transpose() - &target).amax();
        prop_assert!(err <= 1e-9 * scale, "XX' error {err:e}");
    }

    #[test]
    fn downdate_factor_is_the_symmetric_root_for_scaled_identity(
        p in 1usize..=6, alpha in 0.1f64..10.0, beta in 0.0f64..=1.0, seed in any::<u64>()
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = DMatrix::identity(p, p) * alpha;
        let b = gaussian_vector(p, &mut rng).normalize() * (beta * alpha).sqrt();
        let f = rank_one_downdate_factor(&d, &b).unwrap();
        let x = rank_one_downdate_sqrt(&d, &b).unwrap();
        prop_assert!((&f - &x).amax() <= 1e-12 * alpha);
        prop_assert!((&f * &f - (&d - &b * b.transpose())).amax() <= 1e-9 * alpha);
    }

    #[test]
    fn pseudo_inverse_acts_as_identity_on_column_space((k, r) in dims(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (s, spec) = random_low_rank(k, r, &mut rng);
        let x = spec.eigenvectors() * gaussian_vector(r, &mut rng);
        let lhs = pseudo_inverse_quadratic(&spec, &(&s * &x));
        let rhs = (&s * &x).dot(&x);
        prop_assert!((lhs - rhs).abs() <= 1e-8 * rhs.abs().max(1.0), "{lhs} vs {rhs}");
    }

    #[test]
    fn omega_slope_is_psd((k, r) in dims(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_gaussian(k, r, 0.7, &mut rng);
        let u = gaussian_vector(k, &mut rng);
        let state = CfIntegrandState::new(&u, &g, 5).unwrap();
        let slope = state.omega_slope();
        let (values, _) = symmetric_eigen_sorted(&slope);
        let scale = slope.amax().max(1.0);
        prop_assert!(values[0] >= -1e-10 * scale, "min eigenvalue {}", values[0]);
    }

    #[test]
    fn draws_stay_in_column_space((k, r) in dims(), n in 1usize..20, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_gaussian(k, r, 1.3, &mut rng);
        let stream = RngStream::new(seed, 9);
        let z = sample_singular_normal(&g, &mut stream.substream(tag::Z, 0).rng());
        let scale = z.amax().max(1.0);
        prop_assert!(g.sigma().null_residual(&(&z - g.mu())) <= 1e-9 * scale);
        let a = sample_singular_wishart(
            &WishartSpec::new(n, g.sigma().clone()).unwrap(),
            &mut stream.substream(tag::WISHART, 0).rng(),
        );
        let rr = g.sigma().eigenvectors();
        let leak = &a - rr * (rr.transpose() * &a);
        prop_assert!(leak.amax() <= 1e-9 * a.amax().max(1.0));
    }

    #[test]
    fn kde_mass_is_one(seed in any::<u64>(), count in 50usize..2000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let samples: Vec<f64> = (0..count).map(|_| StandardNormal.sample(&mut rng)).collect();
        let h = silverman_bandwidth(&samples).unwrap();
        let lo = samples.iter().cloned().fold(f64::INFINITY, f64::min) - 3.0 * h;
        let hi = samples.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + 3.0 * h;
        let grid: Vec<f64> = (0..=800).map(|i| lo + (hi - lo) * i as f64 / 800.0).collect();
        let est = kde_epanechnikov(&samples, &grid, None).unwrap();
        prop_assert!(est.density.iter().all(|d| *d >= 0.0));
        prop_assert!((trapezoid(&est.grid, &est.density) - 1.0).abs() <= 0.05);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn projection_cache_rows_are_orthonormal(
        (k, r) in (3usize..=10).prop_flat_map(|k| (Just(k), 2..k)),
        p_frac in 0.0f64..1.0,
        seed in any::<u64>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = 1 + ((r - 1) as f64 * p_frac) as usize;
        let g = random_gaussian(k, r, 1.0, &mut rng);
        let m = gaussian_matrix(p, k, &mut rng);
        let cache = ProjectionCache::new(&m, &g).unwrap();
        prop_assert!(cache.orthonormality_defect() <= 1e-8);
    }

    #[test]
    fn omega_is_symmetric_and_matches_sigma2_at_p1(
        (k, r) in (3usize..=10).prop_flat_map(|k| (Just(k), 1..k)),
        n in 2usize..50,
        seed in any::<u64>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_gaussian(k, r, 1.0 / n as f64, &mut rng);
        let params = AsymptoticParams::from_rank(r, n, g.kappa()).unwrap();
        let m = gaussian_vector(k, &mut rng);
        let row = DMatrix::from_row_slice(1, k, m.as_slice());
        let omega = omega_matrix(&row, &g, &params).unwrap();
        let s2 = sigma2(&m, &g, &params).unwrap();
        prop_assert!(s2 > 0.0);
        prop_assert!((omega[(0, 0)] - s2).abs() <= 1e-12 * s2);

        let mm = gaussian_matrix(2, k, &mut rng);
        match omega_matrix(&mm, &g, &params) {
            Ok(om) => prop_assert_eq!(om[(0, 1)], om[(1, 0)]),
            // MΣMᵀ is singular when rank Σ < 2
            Err(e) => prop_assert!(r < 2, "{e}"),
        }
    }

    #[test]
    fn scale_consistency_of_kappa_over_c(
        (k, r) in (3usize..=10).prop_flat_map(|k| (Just(k), 1..k)),
        kappa in 0.01f64..2.0,
        c in 0.05f64..2.0,
        alpha in 0.1f64..10.0,
        seed in any::<u64>(),
    ) {
        // σ²(κ, c) − σ²(ακ, αc) only moves through κ tr Σ² · mᵀΣm.
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (_, sigma) = random_low_rank(k, r, &mut rng);
        let mu = gaussian_vector(k, &mut rng);
        let m = gaussian_vector(k, &mut rng);
        let g1 = GaussianSpec::new(mu.clone(), kappa, sigma.clone()).unwrap();
        let g2 = GaussianSpec::new(mu, alpha * kappa, sigma.clone()).unwrap();
        let p1 = AsymptoticParams::new(c, kappa).unwrap();
        let p2 = AsymptoticParams::new(alpha * c, alpha * kappa).unwrap();
        prop_assert!((p1.kappa_over_c() - p2.kappa_over_c()).abs() <= 1e-12 * p1.kappa_over_c());
        let expected = (alpha - 1.0) * kappa * sigma.trace_power(2.0) * sigma.quadratic_power(&m, 1.0);
        let got = sigma2(&m, &g2, &p2).unwrap() - sigma2(&m, &g1, &p1).unwrap();
        prop_assert!((got - expected).abs() <= 1e-9 * (got.abs() + sigma2(&m, &g1, &p1).unwrap()));
    }

    #[test]
    fn standardize_round_trip(x in -1e3f64..1e3, seed in any::<u64>()) {
        let pop = generate_population(12, 5, &RngStream::new(seed, 0)).unwrap();
        let g = pop.gaussian(0.1).unwrap();
        let st = ScalarStandardizer::new(&pop.m, &g, 10, None).unwrap();
        let back = st.invert(st.apply(x));
        prop_assert!((back - x).abs() <= 1e-12 * x.abs().max(1.0), "{x} -> {back}");
    }
}
