//! Adaptive Simpson quadrature over a closed interval.

use std::ops::{Add, Mul, Sub};

use crate::error::{Error, Result};

/// Values that can be integrated: reals and complex numbers.
pub trait Integrand:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self>
{
    fn magnitude(&self) -> f64;
}

impl Integrand for f64 {
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl Integrand for num_complex::Complex64 {
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadratureResult<T> {
    pub value: T,
    pub error: f64,
    pub subdivisions: usize,
}

struct Panel<T> {
    a: f64,
    b: f64,
    fa: T,
    fm: T,
    fb: T,
    whole: T,
    tol: f64,
    depth: u32,
}

fn simpson<T: Integrand>(a: f64, b: f64, fa: T, fm: T, fb: T) -> T {
    (fa + fm * 4.0 + fb) * ((b - a) / 6.0)
}

/// Integrates `f` over `[a, b]` to absolute tolerance `tol`.
///
/// The interval is first cut into `initial_panels` equal pieces so narrow
/// peaks are not missed, then every panel is refined until its Richardson
/// error estimate is below its share of `tol`. Fails once more than
/// `max_subdivisions` panels have been split. Errors from `f` propagate.
pub fn adaptive_simpson<T, F>(
    mut f: F,
    a: f64,
    b: f64,
    tol: f64,
    initial_panels: usize,
    max_subdivisions: usize,
) -> Result<QuadratureResult<T>>
where
    T: Integrand,
    F: FnMut(f64) -> Result<T>,
{
    let panels = initial_panels.max(1);
    let width = (b - a) / panels as f64;
    let mut stack = Vec::with_capacity(64);
    let mut left = f(a)?;
    for i in 0..panels {
        let pa = a + width * i as f64;
        let pb = if i + 1 == panels { b } else { pa + width };
        let fm = f(0.5 * (pa + pb))?;
        let fb = f(pb)?;
        stack.push(Panel {
            a: pa,
            b: pb,
            fa: left,
            fm,
            fb,
            whole: simpson(pa, pb, left, fm, fb),
            tol: tol / panels as f64,
            depth: 0,
        });
        left = fb;
    }

    let mut value: Option<T> = None;
    let mut error = 0.0;
    let mut subdivisions = 0usize;
    while let Some(p) = stack.pop() {
        let m = 0.5 * (p.a + p.b);
        let flm = f(0.5 * (p.a + m))?;
        let frm = f(0.5 * (m + p.b))?;
        let left = simpson(p.a, m, p.fa, flm, p.fm);
        let right = simpson(m, p.b, p.fm, frm, p.fb);
        let delta = (left + right) - p.whole;
        let est = delta.magnitude() / 15.0;
        if est <= p.tol || p.depth >= 50 {
            let refined = left + right + delta * (1.0 / 15.0);
            value = Some(match value {
                Some(v) => v + refined,
                None => refined,
            });
            error += est;
            continue;
        }
        subdivisions += 1;
        if subdivisions > max_subdivisions {
            return Err(Error::QuadratureNonConvergence {
                subdivisions: max_subdivisions,
                error: error + est,
            });
        }
        let tol = 0.5 * p.tol;
        stack.push(Panel {
            a: m,
            b: p.b,
            fa: p.fm,
            fm: frm,
            fb: p.fb,
            whole: right,
            tol,
            depth: p.depth + 1,
        });
        stack.push(Panel {
            a: p.a,
            b: m,
            fa: p.fa,
            fm: flm,
            fb: p.fm,
            whole: left,
            tol,
            depth: p.depth + 1,
        });
    }
    Ok(QuadratureResult {
        value: value.expect("at least one panel"),
        error,
        subdivisions,
    })
}
