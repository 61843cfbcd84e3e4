//! Integration of the Loewner-Kufarev ODE together with `w_z`.
//!
//! Forward flows solve `dw/dt = -w p(w, t)`, `w(z, 0) = z`, and contract the
//! disc; backward flows solve `dw/dt = +w p(w, t)` and push points towards the
//! unit circle. The derivative co-evolves as
//! `dw_z/dt = ∓ w_z (p + w p_z)`, `w_z(z, 0) = 1`.
//!
//! Because `Re p > 0`, `|w|` is strictly monotone along every trajectory,
//! which lets [`radial_reparametrize`] index a trajectory by `ρ = |w|`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::driving::DrivingTerm;
use crate::interp::{hermite, MonotoneCubic};
use crate::ode::{dopri_step, error_norm, State};
use crate::{ensure_finite, Error, Result};

/// Step cap factor: a step may move `w` by at most this fraction of its
/// distance to the unit circle.
const BOUNDARY_STEP_FACTOR: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlowDirection {
    /// `dw/dt = -w p`: moduli decrease.
    Forward,
    /// `dw/dt = +w p`: moduli increase.
    Backward,
}

impl FlowDirection {
    pub fn sign(self) -> f64 {
        match self {
            FlowDirection::Forward => -1.0,
            FlowDirection::Backward => 1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            FlowDirection::Forward => "forward",
            FlowDirection::Backward => "backward",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub rel: f64,
    pub abs: f64,
    /// Backward trajectories stop once `|w| >= 1 - boundary`.
    pub boundary: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { rel: 1e-10, abs: 1e-10, boundary: 1e-6 }
    }
}

#[derive(Debug, Clone)]
pub struct FlowField {
    pub term: DrivingTerm,
    pub direction: FlowDirection,
    pub horizon: f64,
    pub tolerances: Tolerances,
    pub max_step: Option<f64>,
    pub max_steps: usize,
}

impl FlowField {
    pub fn new(term: DrivingTerm, direction: FlowDirection, horizon: f64) -> Result<Self> {
        Self::with_tolerances(term, direction, horizon, Tolerances::default())
    }

    pub fn with_tolerances(
        term: DrivingTerm,
        direction: FlowDirection,
        horizon: f64,
        tolerances: Tolerances,
    ) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::Parameter(format!("horizon must be positive, got {horizon}")));
        }
        let Tolerances { rel, abs, boundary } = tolerances;
        if !(rel > 0.0 && abs > 0.0 && boundary > 0.0 && boundary < 0.5) {
            return Err(Error::Parameter(format!("tolerances must be positive, got {tolerances:?}")));
        }
        Ok(Self { term, direction, horizon, tolerances, max_step: None, max_steps: 2_000_000 })
    }

    /// Same field, different horizon.
    pub fn until(&self, horizon: f64) -> Result<Self> {
        let mut f = Self::with_tolerances(self.term.clone(), self.direction, horizon, self.tolerances)?;
        f.max_step = self.max_step;
        f.max_steps = self.max_steps;
        Ok(f)
    }

    pub fn with_term(&self, term: DrivingTerm) -> Self {
        Self { term, ..self.clone() }
    }

    fn rhs(&self, t: f64, y: &State) -> Result<State> {
        let (p, dp) = self.term.evaluate_with_derivative(y[0], t)?;
        let s = self.direction.sign();
        Ok([s * y[0] * p, s * y[1] * (p + y[0] * dp)])
    }

    /// `(dw/dt, p)` at a point of a trajectory.
    pub fn velocity(&self, w: Complex64, t: f64) -> Result<(Complex64, Complex64)> {
        let p = self.term.evaluate(w, t)?;
        Ok((self.direction.sign() * w * p, p))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub w: Complex64,
    pub wz: Complex64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TrajectoryExit {
    HorizonReached,
    /// Raw last point of a backward trajectory inside the boundary band.
    BoundaryReached(Complex64),
    StepFailure { t: f64, reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub seed: Complex64,
    pub samples: Vec<Sample>,
    pub exit: TrajectoryExit,
}

impl Trajectory {
    pub fn last(&self) -> &Sample {
        self.samples.last().expect("a trajectory always holds its seed")
    }

    pub fn reached_horizon(&self) -> bool {
        self.exit == TrajectoryExit::HorizonReached
    }
}

/// Integrates `(w, w_z)` from `seed` until the horizon, the boundary band
/// (backward only) or a step-size underflow.
pub fn integrate(field: &FlowField, seed: Complex64) -> Result<Trajectory> {
    ensure_finite(seed)?;
    let modulus = seed.norm();
    let limit = match field.direction {
        FlowDirection::Forward => 1.0,
        FlowDirection::Backward => 1.0 - field.tolerances.boundary,
    };
    if modulus >= limit {
        return Err(Error::Domain { z: seed, modulus });
    }

    let tol = field.tolerances;
    let f = |t: f64, y: &State| field.rhs(t, y);
    let mut t = 0.0;
    let mut y: State = [seed, Complex64::new(1.0, 0.0)];
    let mut k1 = f(t, &y)?;
    let mut samples = vec![Sample { t, w: y[0], wz: y[1] }];

    let horizon = field.horizon;
    let mut stops: Vec<f64> = field
        .term
        .breakpoints()
        .into_iter()
        .filter(|b| *b > 0.0 && *b < horizon)
        .collect();
    stops.push(horizon);

    let mut h = initial_step(&y, &k1, tol).min(horizon);
    if let Some(m) = field.max_step {
        h = h.min(m);
    }
    let mut steps = 0usize;
    let mut rejected = false;

    let fail = |t: f64, reason: String, samples: Vec<Sample>| Trajectory {
        seed,
        samples,
        exit: TrajectoryExit::StepFailure { t, reason },
    };

    for (si, &stop) in stops.iter().enumerate() {
        if si > 0 {
            // the term may jump at a breakpoint
            k1 = match f(t, &y) {
                Ok(k) => k,
                Err(e) => return Ok(fail(t, e.to_string(), samples)),
            };
        }
        while t < stop {
            steps += 1;
            if steps > field.max_steps {
                return Ok(fail(t, "step budget exhausted".into(), samples));
            }
            let speed = k1[0].norm();
            let mut h_try = h;
            if speed > 0.0 {
                h_try = h_try.min(BOUNDARY_STEP_FACTOR * (1.0 - y[0].norm()) / speed);
            }
            if let Some(m) = field.max_step {
                h_try = h_try.min(m);
            }
            let h_min = 1e-14 * t.abs().max(1.0);
            let last = t + h_try >= stop - 1e-13 * stop.abs().max(1.0);
            if last {
                h_try = stop - t;
            }
            if !(h_try >= h_min) && !last {
                return Ok(fail(t, format!("step size underflow (h = {h_try:e})"), samples));
            }
            let step = match dopri_step(&f, t, &y, &k1, h_try) {
                Ok(s) => s,
                Err(_) => {
                    h = 0.25 * h_try;
                    rejected = true;
                    if h < h_min {
                        return Ok(fail(t, "driving term not evaluable near trajectory".into(), samples));
                    }
                    continue;
                }
            };
            let err = error_norm(&y, &step.y, &step.err, tol.rel, tol.abs);
            if err.is_finite() && err <= 1.0 {
                t = if last { stop } else { t + h_try };
                y = step.y;
                k1 = step.dy;
                samples.push(Sample { t, w: y[0], wz: y[1] });
                if field.direction == FlowDirection::Backward && y[0].norm() >= 1.0 - tol.boundary {
                    return Ok(Trajectory { seed, samples, exit: TrajectoryExit::BoundaryReached(y[0]) });
                }
                let mut fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                if rejected {
                    fac = fac.min(1.0);
                }
                rejected = false;
                // a step truncated to hit `stop` says little about the next one
                h = if last { h.max(h_try * fac) } else { h_try * fac };
            } else {
                let fac = if err.is_finite() { (0.9 * err.powf(-0.2)).clamp(0.1, 0.9) } else { 0.1 };
                h = h_try * fac;
                rejected = true;
                if h < h_min {
                    return Ok(fail(t, format!("step size underflow (h = {h:e})"), samples));
                }
            }
        }
    }
    Ok(Trajectory { seed, samples, exit: TrajectoryExit::HorizonReached })
}

fn initial_step(y: &State, dy: &State, tol: Tolerances) -> f64 {
    let mut d0: f64 = 0.0;
    let mut d1: f64 = 0.0;
    for i in 0..2 {
        let sc = tol.abs + tol.rel * y[i].norm();
        d0 = d0.max(y[i].norm() / sc);
        d1 = d1.max(dy[i].norm() / sc);
    }
    if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        // fifth-order method: tolerance^(1/5) scaled step
        (0.01 * d0 / d1).max(1e-10)
    }
}

/// [`integrate`] for every seed, in parallel; output order matches input.
pub fn integrate_grid(field: &FlowField, seeds: &[Complex64]) -> Vec<Result<Trajectory>> {
    seeds.par_iter().map(|&z| integrate(field, z)).collect()
}

/// One point of a trajectory indexed by its modulus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialSample {
    pub rho: f64,
    pub t: f64,
    pub w: Complex64,
    pub dt_drho: f64,
    pub dw_drho: Complex64,
}

/// A trajectory re-indexed by `ρ = |w|`.
///
/// Interpolation runs in `s = ln ρ` with the exact slopes supplied by the
/// ODE: `dt/ds = ±1 / Re p` and `dw/ds = w p / Re p`. The `t(s)` interpolant
/// is shape-preserving, so `t(ρ)` inherits the monotonicity of the data.
#[derive(Debug, Clone)]
pub struct RadialPath {
    samples: Vec<RadialSample>,
    log_rho: Vec<f64>,
    dw_ds: Vec<Complex64>,
    time_of_s: MonotoneCubic,
    s_of_time: MonotoneCubic,
    /// Trajectory order runs from high to low ρ (forward flows).
    decreasing: bool,
}

pub fn radial_reparametrize(field: &FlowField, traj: &Trajectory) -> Result<RadialPath> {
    if traj.samples.len() < 2 {
        return Err(Error::InsufficientData("radial reparametrisation needs two samples".into()));
    }
    let decreasing = field.direction == FlowDirection::Forward;
    let sigma = field.direction.sign();
    let mut rows = Vec::with_capacity(traj.samples.len());
    for (i, s) in traj.samples.iter().enumerate() {
        let rho = s.w.norm();
        if i > 0 {
            let prev = traj.samples[i - 1].w.norm();
            let ok = if decreasing { rho < prev } else { rho > prev };
            if !ok {
                return Err(Error::NonMonotone { index: i });
            }
        }
        let p = field.term.evaluate(s.w, s.t)?;
        if !(p.re > 0.0) {
            return Err(Error::NotPositive { z: s.w, t: s.t, re: p.re });
        }
        let dt_ds = sigma / p.re;
        let dw_ds = s.w * p / p.re;
        rows.push((rho.ln(), s.t, s.w, dt_ds, dw_ds, rho));
    }
    if decreasing {
        rows.reverse();
    }
    let log_rho: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let times: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let dt_ds: Vec<f64> = rows.iter().map(|r| r.3).collect();
    let time_of_s = MonotoneCubic::with_slopes(log_rho.clone(), times.clone(), dt_ds.clone())?;

    let mut by_time: Vec<(f64, f64, f64)> = rows.iter().map(|r| (r.1, r.0, 1.0 / r.3)).collect();
    by_time.sort_by(|a, b| a.0.total_cmp(&b.0));
    let s_of_time = MonotoneCubic::with_slopes(
        by_time.iter().map(|r| r.0).collect(),
        by_time.iter().map(|r| r.1).collect(),
        by_time.iter().map(|r| r.2).collect(),
    )?;

    let samples = rows
        .iter()
        .map(|&(_, t, w, dt_ds, dw_ds, rho)| RadialSample {
            rho,
            t,
            w,
            dt_drho: dt_ds / rho,
            dw_drho: dw_ds / rho,
        })
        .collect();
    Ok(RadialPath {
        samples,
        log_rho,
        dw_ds: rows.iter().map(|r| r.4).collect(),
        time_of_s,
        s_of_time,
        decreasing,
    })
}

impl RadialPath {
    /// Knots in increasing `ρ`.
    pub fn samples(&self) -> &[RadialSample] {
        &self.samples
    }

    pub fn rho_range(&self) -> (f64, f64) {
        (self.samples[0].rho, self.samples[self.samples.len() - 1].rho)
    }

    /// True when the underlying trajectory moved towards the origin.
    pub fn is_contracting(&self) -> bool {
        self.decreasing
    }

    fn interval(&self, s: f64) -> usize {
        let n = self.log_rho.len();
        self.log_rho.partition_point(|&k| k <= s).clamp(1, n - 1) - 1
    }

    /// `(t, w)` at modulus `rho`, if inside the sampled range.
    pub fn at(&self, rho: f64) -> Option<(f64, Complex64)> {
        let (lo, hi) = self.rho_range();
        if !(rho >= lo && rho <= hi) {
            return None;
        }
        let s = rho.ln();
        let i = self.interval(s);
        let (s0, s1) = (self.log_rho[i], self.log_rho[i + 1]);
        let w = hermite(
            s0,
            s1,
            self.samples[i].w,
            self.samples[i + 1].w,
            self.dw_ds[i],
            self.dw_ds[i + 1],
            s,
        );
        Some((self.time_of_s.eval(s), w))
    }

    pub fn time_at(&self, rho: f64) -> Option<f64> {
        self.at(rho).map(|(t, _)| t)
    }

    /// Inverse of [`RadialPath::time_at`].
    pub fn rho_at_time(&self, t: f64) -> Option<f64> {
        let (lo, hi) = self.s_of_time.domain();
        if !(t >= lo && t <= hi) {
            return None;
        }
        Some(self.s_of_time.eval(t).exp())
    }

    /// `n` points equispaced in `ρ` across the sampled range.
    pub fn resample(&self, field: &FlowField, n: usize) -> Result<Vec<RadialSample>> {
        let (lo, hi) = self.rho_range();
        let n = n.max(2);
        let sigma = field.direction.sign();
        (0..n)
            .map(|i| {
                let rho = if i == n - 1 { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 };
                let (t, w) = self.at(rho).expect("inside range");
                let p = field.term.evaluate(w, t)?;
                Ok(RadialSample {
                    rho,
                    t,
                    w,
                    dt_drho: sigma / (rho * p.re),
                    dw_drho: w * p / (p.re * rho),
                })
            })
            .collect()
    }

    /// Gauss-Legendre quadrature of `g(ρ, t, w)` in `ρ` over `[a, b]`,
    /// subdivided at the knots.
    fn integrate_rho<G>(&self, a: f64, b: f64, mut g: G) -> Result<f64>
    where
        G: FnMut(f64, f64, Complex64) -> Result<f64>,
    {
        let mut cuts = vec![a];
        cuts.extend(self.samples.iter().map(|s| s.rho).filter(|&r| r > a && r < b));
        cuts.push(b);
        let mut total = 0.0;
        for w in cuts.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            let half = 0.5 * (hi - lo);
            let mid = 0.5 * (hi + lo);
            for (x, wt) in GAUSS5 {
                let rho = mid + half * x;
                let (t, z) = self.at(rho).expect("quadrature node inside range");
                total += wt * half * g(rho, t, z)?;
            }
        }
        Ok(total)
    }
}

const GAUSS5: [(f64, f64); 5] = [
    (0.0, 0.568_888_888_888_888_9),
    (-0.538_469_310_105_683_1, 0.478_628_670_499_366_47),
    (0.538_469_310_105_683_1, 0.478_628_670_499_366_47),
    (-0.906_179_845_938_664, 0.236_926_885_056_189_08),
    (0.906_179_845_938_664, 0.236_926_885_056_189_08),
];

/// Length of the part of the integral curve `(w(t), t)` lying over the
/// annulus `r < |w| < 1`:
/// `∫ sqrt(|dw/dρ|^2 + (dt/dρ)^2) dρ`, restricted to the sampled range.
pub fn arc_length_in_annulus(field: &FlowField, traj: &Trajectory, r: f64) -> Result<f64> {
    if !(r > 0.5 && r < 1.0) {
        return Err(Error::Parameter(format!("annulus radius must lie in (1/2, 1), got {r}")));
    }
    let path = radial_reparametrize(field, traj)?;
    let (lo, hi) = path.rho_range();
    let a = lo.max(r);
    let b = hi.min(1.0);
    if a >= b {
        return Ok(0.0);
    }
    path.integrate_rho(a, b, |rho, t, w| {
        let p = field.term.evaluate(w, t)?;
        let planar = p.norm() / p.re;
        let temporal = 1.0 / (rho * p.re);
        Ok(planar.hypot(temporal))
    })
}

/// `|w_z|` at the end of a trajectory recomputed without the co-evolved
/// derivative, from
/// `ln |w_z| = ∫ (1/ρ + Re(w p_z) / (ρ Re p)) dρ` along the trajectory.
pub fn derivative_modulus_from_radial_integral(field: &FlowField, traj: &Trajectory) -> Result<f64> {
    let path = radial_reparametrize(field, traj)?;
    let (lo, hi) = path.rho_range();
    let integral = path.integrate_rho(lo, hi, |rho, t, w| {
        let (p, dp) = field.term.evaluate_with_derivative(w, t)?;
        Ok(1.0 / rho + (w * dp).re / (rho * p.re))
    })?;
    // integrate_rho runs from low to high ρ; orient along the trajectory
    let signed = if path.is_contracting() { -integral } else { integral };
    Ok(signed.exp())
}
