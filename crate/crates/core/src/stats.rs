//! Goodness-of-fit statistics and reference distributions.

use serde::{Deserialize, Serialize};
use libm::erfc;
use statrs::function::gamma::gamma_lr;

use crate::error::{Error, Result};

/// Reference law for the one-sample KS statistic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reference {
    StdNormal,
    Chi2(usize),
}

impl Reference {
    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            Reference::StdNormal => normal_cdf(x),
            Reference::Chi2(n) => chi2_cdf(x, n),
        }
    }
}

pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

pub fn chi2_cdf(x: f64, n: usize) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        gamma_lr(n as f64 / 2.0, x / 2.0)
    }
}

fn sorted(samples: &[f64]) -> Result<Vec<f64>> {
    if samples.is_empty() {
        return Err(Error::EmptySample);
    }
    if samples.iter().any(|x| x.is_nan()) {
        return Err(Error::DomainError("sample contains NaN".into()));
    }
    let mut v = samples.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// Two-sided one-sample Kolmogorov–Smirnov statistic `sup |F_N − F|`.
pub fn ks_statistic(samples: &[f64], reference: Reference) -> Result<f64> {
    let v = sorted(samples)?;
    let n = v.len() as f64;
    let d = v.iter().enumerate().fold(0.0_f64, |d, (i, &x)| {
        let f = reference.cdf(x);
        let above = (i + 1) as f64 / n - f;
        let below = f - i as f64 / n;
        d.max(above).max(below)
    });
    Ok(d.clamp(0.0, 1.0))
}

/// Two-sample KS statistic `sup |F_a − F_b|`.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<f64> {
    let a = sorted(a)?;
    let b = sorted(b)?;
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0_f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(d)
}

/// 1% critical value `1.63·√((N_a + N_b)/(N_a N_b))` of the two-sample test.
pub fn ks_two_sample_critical_1pct(na: usize, nb: usize) -> f64 {
    1.63 * ((na + nb) as f64 / (na as f64 * nb as f64)).sqrt()
}

pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Unbiased sample variance.
pub fn variance(x: &[f64]) -> f64 {
    let m = mean(x);
    x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (x.len() as f64 - 1.0)
}

/// Sample Pearson correlation.
pub fn correlation(x: &[f64], y: &[f64]) -> f64 {
    let (mx, my) = (mean(x), mean(y));
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    sxy / (sxx * syy).sqrt()
}

/// Linear-interpolated quantile of a sorted slice, `q ∈ [0, 1]`.
pub fn quantile_sorted(v: &[f64], q: f64) -> f64 {
    let pos = q * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_point_vs_normal() {
        assert!((ks_statistic(&[0.0], Reference::StdNormal).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn chi2_two_median() {
        let x = 2.0 * 2.0_f64.ln();
        assert!((chi2_cdf(x, 2) - 0.5).abs() < 1e-12);
        assert!((ks_statistic(&[x], Reference::Chi2(2)).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn normal_cdf_reference_values() {
        assert_eq!(normal_cdf(0.0), 0.5);
        // Φ(1.959963984540054) = 0.975

        assert!((normal_cdf(1.959963984540054) - 0.975).abs() < 1e-12);
        assert!((normal_cdf(-3.0) - 0.0013498980316300946).abs() < 1e-12);
    }

    #[test]
    fn empty_sample() {
        assert!(matches!(
            ks_statistic(&[], Reference::StdNormal),
            Err(Error::EmptySample)
        ));
        assert!(ks_two_sample(&[], &[1.0]).is_err());
    }

    #[test]
    fn two_sample_extremes() {
        assert_eq!(ks_two_sample(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(ks_two_sample(&[1.0, 2.0], &[3.0, 4.0]).unwrap(), 1.0);
        assert!((ks_two_sample(&[1.0, 3.0], &[2.0, 4.0]).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn two_sample_critical_value() {
        let c = ks_two_sample_critical_1pct(200_000, 200_000);
        assert!((c - 0.005155).abs() < 1e-5);
    }
}
