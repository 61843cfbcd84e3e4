//! Piecewise cubic Hermite interpolation, with a shape-preserving variant.

use std::ops::{Add, Mul};

use crate::{Error, Result};

/// Cubic Hermite interpolant on `[x0, x1]` through `(x0, y0)`, `(x1, y1)`
/// with end slopes `d0`, `d1`.
pub fn hermite<T>(x0: f64, x1: f64, y0: T, y1: T, d0: T, d1: T, x: f64) -> T
where
    T: Copy + Add<Output = T> + Mul<f64, Output = T>,
{
    let h = x1 - x0;
    let s = (x - x0) / h;
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    y0 * h00 + d0 * (h10 * h) + y1 * h01 + d1 * (h11 * h)
}

/// Derivative of [`hermite`] with respect to `x`.
pub fn hermite_slope<T>(x0: f64, x1: f64, y0: T, y1: T, d0: T, d1: T, x: f64) -> T
where
    T: Copy + Add<Output = T> + Mul<f64, Output = T>,
{
    let h = x1 - x0;
    let s = (x - x0) / h;
    let s2 = s * s;
    let g00 = (6.0 * s2 - 6.0 * s) / h;
    let g10 = 3.0 * s2 - 4.0 * s + 1.0;
    let g01 = (-6.0 * s2 + 6.0 * s) / h;
    let g11 = 3.0 * s2 - 2.0 * s;
    y0 * g00 + d0 * g10 + y1 * g01 + d1 * g11
}

/// Monotone piecewise cubic (Fritsch-Carlson). Slopes that would create an
/// overshoot are limited, so monotone data give a monotone interpolant.
#[derive(Debug, Clone)]
pub struct MonotoneCubic {
    x: Vec<f64>,
    y: Vec<f64>,
    d: Vec<f64>,
}

impl MonotoneCubic {
    /// Uses the given slopes where they are shape-compatible.
    pub fn with_slopes(x: Vec<f64>, y: Vec<f64>, mut d: Vec<f64>) -> Result<Self> {
        check_knots(&x, y.len())?;
        if d.len() != x.len() {
            return Err(Error::InsufficientData("one slope per knot required".into()));
        }
        limit_slopes(&x, &y, &mut d);
        Ok(Self { x, y, d })
    }

    /// PCHIP: slopes from the weighted harmonic mean of adjacent secants.
    pub fn from_points(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        check_knots(&x, y.len())?;
        let n = x.len();
        let sec: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / (x[i + 1] - x[i])).collect();
        let mut d = vec![0.0; n];
        if n == 2 {
            d[0] = sec[0];
            d[1] = sec[0];
        } else {
            d[0] = sec[0];
            d[n - 1] = sec[n - 2];
            for i in 1..n - 1 {
                if sec[i - 1] * sec[i] > 0.0 {
                    let (h0, h1) = (x[i] - x[i - 1], x[i + 1] - x[i]);
                    let w1 = 2.0 * h1 + h0;
                    let w2 = h1 + 2.0 * h0;
                    d[i] = (w1 + w2) / (w1 / sec[i - 1] + w2 / sec[i]);
                }
            }
        }
        limit_slopes(&x, &y, &mut d);
        Ok(Self { x, y, d })
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.x[0], self.x[self.x.len() - 1])
    }

    fn interval(&self, x: f64) -> usize {
        let n = self.x.len();
        self.x.partition_point(|&k| k <= x).clamp(1, n - 1) - 1
    }

    /// Value at `x`, clamped to the knot range.
    pub fn eval(&self, x: f64) -> f64 {
        let (lo, hi) = self.domain();
        let x = x.clamp(lo, hi);
        let i = self.interval(x);
        hermite(self.x[i], self.x[i + 1], self.y[i], self.y[i + 1], self.d[i], self.d[i + 1], x)
    }

    pub fn slope(&self, x: f64) -> f64 {
        let (lo, hi) = self.domain();
        let x = x.clamp(lo, hi);
        let i = self.interval(x);
        hermite_slope(self.x[i], self.x[i + 1], self.y[i], self.y[i + 1], self.d[i], self.d[i + 1], x)
    }
}

fn check_knots(x: &[f64], ny: usize) -> Result<()> {
    if x.len() < 2 || x.len() != ny {
        return Err(Error::InsufficientData(format!(
            "need at least two knots with matching values (got {} knots, {ny} values)",
            x.len()
        )));
    }
    if let Some(i) = x.windows(2).position(|w| w[0] >= w[1]) {
        return Err(Error::NonMonotone { index: i + 1 });
    }
    Ok(())
}

fn limit_slopes(x: &[f64], y: &[f64], d: &mut [f64]) {
    for i in 0..x.len() - 1 {
        let sec = (y[i + 1] - y[i]) / (x[i + 1] - x[i]);
        if sec == 0.0 {
            d[i] = 0.0;
            d[i + 1] = 0.0;
            continue;
        }
        if d[i] * sec < 0.0 {
            d[i] = 0.0;
        }
        if d[i + 1] * sec < 0.0 {
            d[i + 1] = 0.0;
        }
        let a = d[i] / sec;
        let b = d[i + 1] / sec;
        let r = a * a + b * b;
        if r > 9.0 {
            let tau = 3.0 / r.sqrt();
            d[i] = tau * a * sec;
            d[i + 1] = tau * b * sec;
        }
    }
}
