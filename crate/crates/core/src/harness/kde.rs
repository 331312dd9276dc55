use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::quantile_sorted;

/// Density estimate evaluated on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KdeEstimate {
    pub grid: Vec<f64>,
    pub density: Vec<f64>,
    pub bandwidth: f64,
}

/// `K(u) = 0.75 (1 − u²)` on `|u| ≤ 1`.
pub fn epanechnikov(u: f64) -> f64 {
    if u.abs() <= 1.0 {
        0.75 * (1.0 - u * u)
    } else {
        0.0
    }
}

/// Silverman's rule `0.9 · min(sd, IQR/1.34) · N^{-1/5}`.
///
/// When one of the two spreads is zero the other is used alone.
pub fn silverman_bandwidth(samples: &[f64]) -> Result<f64> {
    if samples.len() < 2 {
        return Err(Error::InvalidParameter("bandwidth needs at least 2 samples".into()));
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let sd = (samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)).sqrt();
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let iqr = quantile_sorted(&sorted, 0.75) - quantile_sorted(&sorted, 0.25);
    let spread = [sd, iqr / 1.34]
        .into_iter()
        .filter(|s| *s > 0.0 && s.is_finite())
        .fold(f64::INFINITY, f64::min);
    if !spread.is_finite() {
        return Err(Error::DegenerateSample);
    }
    Ok(0.9 * spread * n.powf(-0.2))
}

/// Epanechnikov kernel density estimate on `grid`; Silverman bandwidth
/// when none is given.
pub fn kde_epanechnikov(samples: &[f64], grid: &[f64], bandwidth: Option<f64>) -> Result<KdeEstimate> {
    if samples.len() < 2 {
        return Err(Error::InvalidParameter("density estimate needs at least 2 samples".into()));
    }
    let h = match bandwidth {
        Some(h) if h > 0.0 && h.is_finite() => h,
        Some(h) => return Err(Error::InvalidParameter(format!("bandwidth must be positive, got {h}"))),
        None => silverman_bandwidth(samples)?,
    };
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let norm = 1.0 / (sorted.len() as f64 * h);
    let density = grid
        .iter()
        .map(|&x| {
            let lo = sorted.partition_point(|&s| s < x - h);
            let hi = sorted.partition_point(|&s| s <= x + h);
            sorted[lo..hi].iter().map(|&s| epanechnikov((x - s) / h)).sum::<f64>() * norm
        })
        .collect();
    Ok(KdeEstimate {
        grid: grid.to_vec(),
        density,
        bandwidth: h,
    })
}

/// Trapezoid rule over paired abscissae and ordinates.
pub fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2)
        .zip(y.windows(2))
        .map(|(xs, ys)| 0.5 * (xs[1] - xs[0]) * (ys[0] + ys[1]))
        .sum()
}
