//! Coupled evolutions whose driving density is read off the evolving map:
//! Hele-Shaw (`xi = 1/|f'|^2`) and the Carleson-Makarov distance density.
//!
//! The state tracks the expanding map `W = Φ_n ∘ ... ∘ Φ_1 ∘ f_0` on the
//! circle `|z| = r`, where `f_0` is a polynomial and each `Φ_k` is a backward
//! flow step of a frozen measure term. The measure is rebuilt between steps
//! (explicit splitting).

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boundary::{circle_seeds, jordan_check, BoundaryCurve};
use crate::diagnostics::circle_max;
use crate::driving::{herglotz_from_samples, DrivingTerm, SpectralMeasure};
use crate::flow::{integrate, integrate_grid, FlowDirection, FlowField, Tolerances, TrajectoryExit};
use crate::geometry::{distance_to_closed_polyline, signed_area};
use crate::regression::{fit_line, LineFit};
use crate::{Error, Result};

/// Below this `|w_z|` the Hele-Shaw density is treated as a cusp.
pub const CUSP_THRESHOLD: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoupledConfig {
    pub tolerances: Tolerances,
    pub cusp_threshold: f64,
}

impl Default for CoupledConfig {
    fn default() -> Self {
        Self { tolerances: Tolerances::default(), cusp_threshold: CUSP_THRESHOLD }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoupledState {
    pub step: usize,
    /// Renormalised clock: the sum of the step lengths.
    pub time: f64,
    /// Physical time, `Σ dt / raw mass`.
    pub timescale_accumulated: f64,
    /// `W(r e^{iθ_j})` at the midpoint angles.
    pub boundary: BoundaryCurve,
    pub wz: Vec<Complex64>,
    /// `(θ_j, |W_z(r e^{iθ_j})|)`.
    pub derivative_samples: Vec<(f64, f64)>,
    /// Measure of the most recent step; for a fresh state, the Hele-Shaw
    /// measure of the initial map.
    pub measure: SpectralMeasure,
    /// Coefficients of `f_0`, constant term first.
    pub initial: Vec<Complex64>,
    /// `(dt, measure)` of every step taken.
    pub history: Vec<(f64, SpectralMeasure)>,
}

fn poly(c: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut v = Complex64::new(0.0, 0.0);
    let mut d = Complex64::new(0.0, 0.0);
    for &a in c.iter().rev() {
        d = d * z + v;
        v = v * z + a;
    }
    (v, d)
}

impl CoupledState {
    /// Identity map sampled on `|z| = radius`.
    pub fn circle(radius: f64, n: usize) -> Result<Self> {
        Self::from_polynomial(vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)], radius, n)
    }

    /// `f_0(z) = Σ c_k z^k` sampled on `|z| = radius`. `f_0` must be
    /// univalent on that circle; only the sampled polygon is checked.
    pub fn from_polynomial(coefficients: Vec<Complex64>, radius: f64, n: usize) -> Result<Self> {
        if !(radius > 0.0 && radius < 1.0) {
            return Err(Error::Parameter(format!("seed radius must lie in (0, 1), got {radius}")));
        }
        if coefficients.len() < 2 || coefficients.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(Error::Parameter("initial map needs finite coefficients up to degree >= 1".into()));
        }
        let seeds = circle_seeds(radius, n, PI / n as f64);
        let (points, wz): (Vec<_>, Vec<_>) = seeds.iter().map(|&z| poly(&coefficients, z)).unzip();
        let boundary = BoundaryCurve::new(0.0, radius, PI / n as f64, points)?;
        if !jordan_check(&boundary) {
            return Err(Error::Parameter("initial map is not injective on the seed circle".into()));
        }
        let derivative_samples = derivative_samples(&boundary, &wz);
        let measure = hele_shaw_measure(&derivative_samples, 0, CUSP_THRESHOLD)?;
        Ok(Self {
            step: 0,
            time: 0.0,
            timescale_accumulated: 0.0,
            boundary,
            wz,
            derivative_samples,
            measure,
            initial: coefficients,
            history: Vec::new(),
        })
    }

    pub fn len(&self) -> usize {
        self.boundary.len()
    }

    pub fn is_empty(&self) -> bool {
        self.boundary.is_empty()
    }

    pub fn angles(&self) -> Vec<f64> {
        (0..self.len()).map(|j| self.boundary.angle(j)).collect()
    }

    /// `W(z)` at an arbitrary point, replaying the step history.
    pub fn map(&self, z: Complex64) -> Result<Complex64> {
        let mut w = poly(&self.initial, z).0;
        for (dt, m) in &self.history {
            let field = FlowField::new(DrivingTerm::measure(m.clone()), FlowDirection::Backward, *dt)?;
            let tr = integrate(&field, w)?;
            match tr.exit {
                TrajectoryExit::HorizonReached => w = tr.last().w,
                other => {
                    return Err(Error::Integration { angle: z.arg(), reason: format!("{other:?}") });
                }
            }
        }
        Ok(w)
    }

    /// `|mean_j W(r e^{iθ_j}) e^{-iθ_j}|`, the first Fourier coefficient of the
    /// sampled boundary.
    pub fn conformal_radius(&self) -> f64 {
        let n = self.len() as f64;
        let s: Complex64 = self
            .boundary
            .points
            .iter()
            .enumerate()
            .map(|(j, w)| w * Complex64::from_polar(1.0, -self.boundary.angle(j)))
            .sum();
        (s / n).norm()
    }

    /// `(max |w| - min |w|) / mean |w|` about the origin; zero for a centred circle.
    pub fn circularity_deviation(&self) -> f64 {
        let m: Vec<f64> = self.boundary.points.iter().map(|w| w.norm()).collect();
        let max = m.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = m.iter().cloned().fold(f64::INFINITY, f64::min);
        (max - min) / (m.iter().sum::<f64>() / m.len() as f64)
    }

    pub fn area(&self) -> f64 {
        signed_area(&self.boundary.points)
    }

    /// Carleson-Makarov density at the seed angles, for the map
    /// `ζ ↦ W(r ζ)` whose boundary is the sampled polygon.
    pub fn carleson_makarov_density(&self, delta: f64) -> Result<DlaDensity> {
        let r = self.boundary.radius;
        carleson_makarov_density(|z| self.map(r * z), &self.boundary.points, &self.angles(), delta)
    }
}

fn derivative_samples(boundary: &BoundaryCurve, wz: &[Complex64]) -> Vec<(f64, f64)> {
    wz.iter().enumerate().map(|(j, d)| (boundary.angle(j), d.norm())).collect()
}

fn hele_shaw_measure(samples: &[(f64, f64)], step: usize, cusp: f64) -> Result<SpectralMeasure> {
    if let Some(&(theta, m)) = samples.iter().find(|(_, m)| !(*m >= cusp)) {
        return Err(Error::Halted { step, reason: format!("cusp: |w_z| = {m:e} at θ = {theta}") });
    }
    let xi: Vec<f64> = samples.iter().map(|(_, m)| 1.0 / (m * m)).collect();
    herglotz_from_samples(&xi)
}

/// One backward step of length `dt` (renormalised clock) under the frozen
/// measure. Shared by both coupled evolutions.
fn advance(state: &CoupledState, dt: f64, measure: SpectralMeasure, cfg: &CoupledConfig) -> Result<CoupledState> {
    if !(dt >= 0.0 && dt.is_finite()) {
        return Err(Error::Parameter(format!("step must be non-negative, got {dt}")));
    }
    if dt == 0.0 {
        let mut next = state.clone();
        next.step += 1;
        return Ok(next);
    }
    let halt = |reason: String| Error::Halted { step: state.step, reason };
    let term = DrivingTerm::measure(measure.clone());
    for &w in &state.boundary.points {
        match term.evaluate(w, 0.0) {
            Ok(p) if p.re > 0.0 => {}
            Ok(p) => return Err(halt(format!("Re p = {} at w = {w}", p.re))),
            Err(e) => return Err(halt(e.to_string())),
        }
    }
    let field = FlowField::with_tolerances(term, FlowDirection::Backward, dt, cfg.tolerances)?;
    let mut points = Vec::with_capacity(state.len());
    let mut wz = Vec::with_capacity(state.len());
    for ((tr, w0), d0) in integrate_grid(&field, &state.boundary.points).into_iter().zip(&state.boundary.points).zip(&state.wz) {
        let tr = tr.map_err(|e| halt(format!("at w = {w0}: {e}")))?;
        match &tr.exit {
            TrajectoryExit::HorizonReached => {}
            other => return Err(halt(format!("seed at w = {w0}: {other:?}"))),
        }
        points.push(tr.last().w);
        wz.push(d0 * tr.last().wz);
    }
    let boundary = BoundaryCurve::new(state.time + dt, state.boundary.radius, state.boundary.phase, points)?;
    if !jordan_check(&boundary) {
        return Err(halt("boundary polygon self-intersects".into()));
    }
    let mut history = state.history.clone();
    history.push((dt, measure.clone()));
    Ok(CoupledState {
        step: state.step + 1,
        time: state.time + dt,
        timescale_accumulated: state.timescale_accumulated + dt / measure.raw_mass(),
        derivative_samples: derivative_samples(&boundary, &wz),
        boundary,
        wz,
        measure,
        initial: state.initial.clone(),
        history,
    })
}

/// Advances with `xi(θ_j) = 1/|W_z(r e^{iθ_j})|^2` frozen over the step.
pub fn hele_shaw_step(state: &CoupledState, dt: f64, cfg: &CoupledConfig) -> Result<CoupledState> {
    if dt == 0.0 {
        return advance(state, dt, state.measure.clone(), cfg);
    }
    let measure = hele_shaw_measure(&state.derivative_samples, state.step, cfg.cusp_threshold)?;
    advance(state, dt, measure, cfg)
}

/// Advances with the Carleson-Makarov density for `delta`, renormalised to
/// unit mass.
pub fn dla_step(state: &CoupledState, dt: f64, delta: f64, cfg: &CoupledConfig) -> Result<CoupledState> {
    if dt == 0.0 {
        return advance(state, dt, state.measure.clone(), cfg);
    }
    let density = state.carleson_makarov_density(delta)?;
    let measure = herglotz_from_samples(&density.xi)?;
    advance(state, dt, measure, cfg)
}

/// Local splitting error of the frozen-density scheme at two step sizes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepHalving {
    /// `max_j |two steps of dt - one step of 2 dt|`.
    pub coarse: f64,
    /// Same with `dt / 2`.
    pub fine: f64,
    pub ratio: f64,
}

pub fn splitting_error(state: &CoupledState, dt: f64, cfg: &CoupledConfig) -> Result<f64> {
    let two = hele_shaw_step(&hele_shaw_step(state, dt, cfg)?, dt, cfg)?;
    let one = hele_shaw_step(state, 2.0 * dt, cfg)?;
    Ok(two.boundary.points.iter().zip(&one.boundary.points).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
}

/// For a first-order splitting the local error is `O(dt^2)`, so the ratio
/// should approach 4.
pub fn step_halving(state: &CoupledState, dt: f64, cfg: &CoupledConfig) -> Result<StepHalving> {
    let coarse = splitting_error(state, dt, cfg)?;
    let fine = splitting_error(state, 0.5 * dt, cfg)?;
    Ok(StepHalving { coarse, fine, ratio: coarse / fine })
}

pub const DLA_EPS_MAX: f64 = 1.0 - 1e-6;
const DLA_COARSE: usize = 200;
const DLA_BISECTIONS: usize = 50;

/// Sampled Carleson-Makarov density (before normalisation).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DlaDensity {
    pub delta: f64,
    pub angles: Vec<f64>,
    pub xi: Vec<f64>,
    /// Angles where the distance never reached `delta`; their `xi` is
    /// [`DLA_EPS_MAX`].
    pub flagged: Vec<bool>,
}

impl DlaDensity {
    pub fn flagged_count(&self) -> usize {
        self.flagged.iter().filter(|f| **f).count()
    }

    pub fn all_flagged(&self) -> bool {
        self.flagged.iter().all(|f| *f)
    }
}

fn diameter(pts: &[Complex64]) -> f64 {
    pts.par_iter()
        .map(|a| pts.iter().map(|b| (a - b).norm()).fold(0.0, f64::max))
        .reduce(|| 0.0, f64::max)
}

/// `xi(θ) = inf { ε : dist(map((1-ε) e^{iθ}), boundary) = δ }`, with the
/// distance taken to the closed polygon `boundary`.
///
/// A coarse log-spaced ladder in `ε` locates the first crossing, which is then
/// bisected.
pub fn carleson_makarov_density<F>(map: F, boundary: &[Complex64], angles: &[f64], delta: f64) -> Result<DlaDensity>
where
    F: Fn(Complex64) -> Result<Complex64> + Sync,
{
    if boundary.len() < 3 {
        return Err(Error::InsufficientData("boundary polygon needs at least 3 points".into()));
    }
    let diam = diameter(boundary);
    if !(delta > 0.0 && delta < diam) {
        return Err(Error::Parameter(format!("δ must lie in (0, {diam}), got {delta}")));
    }
    let (l0, l1) = (1e-6f64.ln(), DLA_EPS_MAX.ln());
    let ladder: Vec<f64> =
        (0..DLA_COARSE).map(|k| (l0 + (l1 - l0) * k as f64 / (DLA_COARSE - 1) as f64).exp()).collect();
    let rows: Vec<(f64, bool)> = angles
        .par_iter()
        .map(|&theta| {
            let u = Complex64::from_polar(1.0, theta);
            let dist = |eps: f64| -> Result<f64> {
                Ok(distance_to_closed_polyline(map(u * (1.0 - eps))?, boundary))
            };
            let mut lo = 0.0;
            for &eps in &ladder {
                if dist(eps)? >= delta {
                    let mut hi = eps;
                    for _ in 0..DLA_BISECTIONS {
                        let mid = 0.5 * (lo + hi);
                        if dist(mid)? >= delta {
                            hi = mid;
                        } else {
                            lo = mid;
                        }
                    }
                    return Ok((hi, false));
                }
                lo = eps;
            }
            Ok((DLA_EPS_MAX, true))
        })
        .collect::<Result<_>>()?;
    let (xi, flagged) = rows.into_iter().unzip();
    Ok(DlaDensity { delta, angles: angles.to_vec(), xi, flagged })
}

/// What the Hölder regularity of a density predicts for its normalised term.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothnessPrediction {
    pub holder_exponent: f64,
    /// Predicted `γ` in `|p*_z| = O((1-r)^{-γ})`; `1 - k`, or 0 for a
    /// constant density.
    pub growth_exponent: f64,
    /// `(a, b)` with `a <= xi <= b`.
    pub density_bounds: (f64, f64),
    /// `(a/b, b/a)`, bounds on `Re p*`.
    pub real_part_bounds: (f64, f64),
    /// Re p* bounded away from zero and sub-linear derivative growth, which is
    /// what the rectifiable/quasiconformal conclusion needs.
    pub applicable: bool,
}

/// `bounds` default to the sample extrema.
pub fn smoothness_prediction(xi: &[f64], k: f64, bounds: Option<(f64, f64)>) -> Result<SmoothnessPrediction> {
    if !(k > 0.0 && k < 1.0) {
        return Err(Error::Parameter(format!("Hölder exponent must lie in (0, 1), got {k}")));
    }
    if xi.is_empty() || xi.iter().any(|x| !x.is_finite()) {
        return Err(Error::InsufficientData("density samples must be finite and non-empty".into()));
    }
    let min = xi.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = xi.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let (a, b) = bounds.unwrap_or((min, max));
    if !(a <= min && max <= b) {
        return Err(Error::Parameter(format!("samples in [{min}, {max}] violate bounds ({a}, {b})")));
    }
    let constant = max - min <= 1e-12 * max.abs();
    let growth_exponent = if constant { 0.0 } else { 1.0 - k };
    let applicable = a > 0.0 && b.is_finite();
    let real_part_bounds = if applicable { (a / b, b / a) } else { (0.0, f64::INFINITY) };
    Ok(SmoothnessPrediction {
        holder_exponent: k,
        growth_exponent,
        density_bounds: (a, b),
        real_part_bounds,
        applicable,
    })
}

/// `(min, max)` of `Re p` over the polar grid `r_i = r_max (i+1)/n_r`,
/// `θ_j = 2πj/n_θ`.
pub fn real_part_range(term: &DrivingTerm, t: f64, n_r: usize, n_theta: usize, r_max: f64) -> Result<(f64, f64)> {
    let vals: Vec<f64> = (0..n_r * n_theta)
        .into_par_iter()
        .map(|k| {
            let r = r_max * ((k / n_theta) as f64 + 1.0) / n_r as f64;
            let z = Complex64::from_polar(r, TAU * (k % n_theta) as f64 / n_theta as f64);
            term.evaluate(z, t).map(|p| p.re)
        })
        .collect::<Result<_>>()?;
    Ok((vals.iter().cloned().fold(f64::INFINITY, f64::min), vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max)))
}

/// Log-log fit of `max_{|z|=r} |p_z|` against `1 - r`; the growth exponent
/// is `-slope`.
pub fn derivative_growth(term: &DrivingTerm, t: f64, gaps: &[f64], n_theta: usize) -> Result<LineFit> {
    let mut x = Vec::with_capacity(gaps.len());
    let mut y = Vec::with_capacity(gaps.len());
    for &g in gaps {
        if !(g > 0.0 && g < 1.0) {
            return Err(Error::Parameter(format!("gap must lie in (0, 1), got {g}")));
        }
        let (_, m) = circle_max(
            |th| {
                term.evaluate_derivative(Complex64::from_polar(1.0 - g, th), t)
                    .map(|d| d.norm())
                    .unwrap_or(f64::NAN)
            },
            n_theta,
        );
        x.push(g.ln());
        y.push(m.ln());
    }
    fit_line(&x, &y)
}
