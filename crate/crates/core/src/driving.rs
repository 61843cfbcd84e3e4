//! Driving terms `p(z, t)` of the Loewner-Kufarev equation.
//!
//! Every term is holomorphic in the unit disc with positive real part. The
//! catalogue holds the closed-form maps onto a shifted half-plane, a vertical
//! strip and a symmetric sector, the single-point Loewner kernel, discrete
//! Herglotz integrals, compositions with self-maps of the disc and constants.
//! Terms are immutable once built and can be shared freely between threads.
//!
//! Branches: `log` and `s^alpha` are principal. Their argument
//! `s = (1 + z) / (1 - z)` lies in the right half-plane for `|z| < 1`, so no
//! cut is ever crossed.

use std::f64::consts::{FRAC_PI_2, TAU};
use std::fmt;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::{ensure_finite, Error, Result};

/// Largest modulus at which a term may be evaluated.
pub const GUARD_RADIUS: f64 = 1.0 - 1e-9;

const I: Complex64 = Complex64::new(0.0, 1.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Real driving function `u(t)` of the single-point kernel
/// `(e^{iu} + z) / (e^{iu} - z)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Driver {
    Constant { angle: f64 },
    Linear { start: f64, rate: f64 },
    /// `u(t) = scale * sqrt(t)`.
    SqrtTime { scale: f64 },
    /// Piecewise linear through `(times[i], values[i])`, held constant outside.
    Sampled { times: Vec<f64>, values: Vec<f64> },
}

impl Driver {
    /// `sqrt(kappa) * B_t` sampled every `step` on `[0, duration]`.
    pub fn brownian(kappa: f64, step: f64, duration: f64, seed: u64) -> Result<Self> {
        if !(kappa >= 0.0 && step > 0.0 && duration > 0.0) {
            return Err(Error::Parameter(format!(
                "brownian driver needs kappa >= 0, step > 0, duration > 0 (got {kappa}, {step}, {duration})"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = (duration / step).ceil() as usize;
        let scale = (kappa * step).sqrt();
        let mut times = Vec::with_capacity(n + 1);
        let mut values = Vec::with_capacity(n + 1);
        let mut u = 0.0;
        times.push(0.0);
        values.push(0.0);
        for i in 1..=n {
            let xi: f64 = StandardNormal.sample(&mut rng);
            u += scale * xi;
            times.push(i as f64 * step);
            values.push(u);
        }
        Ok(Driver::Sampled { times, values })
    }

    fn validate(&self) -> Result<()> {
        let ok = match self {
            Driver::Constant { angle } => angle.is_finite(),
            Driver::Linear { start, rate } => start.is_finite() && rate.is_finite(),
            Driver::SqrtTime { scale } => scale.is_finite(),
            Driver::Sampled { times, values } => {
                !times.is_empty()
                    && times.len() == values.len()
                    && times.iter().chain(values).all(|v| v.is_finite())
                    && times.windows(2).all(|w| w[0] < w[1])
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Parameter(format!("invalid driver {self:?}")))
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        match self {
            Driver::Constant { angle } => *angle,
            Driver::Linear { start, rate } => start + rate * t,
            Driver::SqrtTime { scale } => scale * t.max(0.0).sqrt(),
            Driver::Sampled { times, values } => {
                let n = times.len();
                if t <= times[0] {
                    return values[0];
                }
                if t >= times[n - 1] {
                    return values[n - 1];
                }
                let j = times.partition_point(|&s| s <= t);
                let (t0, t1) = (times[j - 1], times[j]);
                let (u0, u1) = (values[j - 1], values[j]);
                u0 + (u1 - u0) * (t - t0) / (t1 - t0)
            }
        }
    }

    /// Samples on `[0, horizon]`: the stored knots for a sampled path,
    /// otherwise `n` equispaced points.
    pub fn samples(&self, horizon: f64, n: usize) -> Vec<(f64, f64)> {
        match self {
            Driver::Sampled { times, values } => times
                .iter()
                .zip(values)
                .filter(|(t, _)| **t <= horizon)
                .map(|(t, u)| (*t, *u))
                .collect(),
            _ => {
                let n = n.max(2);
                (0..n)
                    .map(|i| {
                        let t = horizon * i as f64 / (n - 1) as f64;
                        (t, self.value(t))
                    })
                    .collect()
            }
        }
    }
}

/// Holomorphic self-maps `phi` of the disc used to build `p(phi(z))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SelfMap {
    /// `e^{i angle} z`
    Rotation { angle: f64 },
    /// `e^{i angle} (z - a) / (1 - conj(a) z)`
    Mobius { angle: f64, a: [f64; 2] },
    /// `z e^{i angle} (z - a) / (1 - conj(a) z)`; fixes the origin.
    ZMobius { angle: f64, a: [f64; 2] },
    /// `c z` with `|c| <= 1`.
    Dilation { c: [f64; 2] },
}

impl SelfMap {
    fn validate(&self) -> Result<()> {
        let ok = match self {
            SelfMap::Rotation { angle } => angle.is_finite(),
            SelfMap::Mobius { angle, a } | SelfMap::ZMobius { angle, a } => {
                angle.is_finite() && c64(*a).norm() < 1.0
            }
            SelfMap::Dilation { c } => c64(*c).norm() <= 1.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Parameter(format!("{self:?} is not a self-map of the disc")))
        }
    }

    pub fn fixes_origin(&self) -> bool {
        match self {
            SelfMap::Mobius { a, .. } => c64(*a) == Complex64::new(0.0, 0.0),
            _ => true,
        }
    }

    /// `(phi(z), phi'(z))`.
    pub fn apply(&self, z: Complex64) -> (Complex64, Complex64) {
        match self {
            SelfMap::Rotation { angle } => {
                let e = Complex64::cis(*angle);
                (e * z, e)
            }
            SelfMap::Mobius { angle, a } => mobius(*angle, c64(*a), z),
            SelfMap::ZMobius { angle, a } => {
                let (m, dm) = mobius(*angle, c64(*a), z);
                (z * m, m + z * dm)
            }
            SelfMap::Dilation { c } => {
                let c = c64(*c);
                (c * z, c)
            }
        }
    }
}

fn mobius(angle: f64, a: Complex64, z: Complex64) -> (Complex64, Complex64) {
    let e = Complex64::cis(angle);
    let den = ONE - a.conj() * z;
    let value = e * (z - a) / den;
    let deriv = e * (1.0 - a.norm_sqr()) / (den * den);
    (value, deriv)
}

pub(crate) fn c64(v: [f64; 2]) -> Complex64 {
    Complex64::new(v[0], v[1])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub angle: f64,
    pub weight: f64,
}

/// Discrete probability measure on the circle, the `mu` of the Herglotz
/// integral `p(z) = ∫ (e^{iθ} + z) / (e^{iθ} - z) dmu(θ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralMeasure {
    atoms: Vec<Atom>,
    raw_mass: f64,
}

impl SpectralMeasure {
    /// Accepts atoms whose weights already sum to one.
    pub fn new(atoms: Vec<Atom>) -> Result<Self> {
        Self::check_atoms(&atoms)?;
        let total: f64 = atoms.iter().map(|a| a.weight).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Measure(format!("total weight {total} is not 1")));
        }
        Ok(Self { atoms, raw_mass: 1.0 })
    }

    /// Rescales the weights to unit mass, remembering the mass they had.
    pub fn from_weights(mut atoms: Vec<Atom>) -> Result<Self> {
        Self::check_atoms(&atoms)?;
        let total: f64 = atoms.iter().map(|a| a.weight).sum();
        if !(total > 0.0 && total.is_finite()) {
            return Err(Error::Measure(format!("total weight {total} cannot be normalised")));
        }
        for a in &mut atoms {
            a.weight /= total;
        }
        Ok(Self { atoms, raw_mass: total })
    }

    pub fn point(angle: f64) -> Result<Self> {
        Self::new(vec![Atom { angle: angle.rem_euclid(TAU), weight: 1.0 }])
    }

    fn check_atoms(atoms: &[Atom]) -> Result<()> {
        if atoms.is_empty() {
            return Err(Error::Measure("no atoms".into()));
        }
        for a in atoms {
            if !(a.weight >= 0.0 && a.weight.is_finite()) {
                return Err(Error::Measure(format!("negative or non-finite weight {}", a.weight)));
            }
            if !(0.0..TAU).contains(&a.angle) {
                return Err(Error::Measure(format!("angle {} outside [0, 2π)", a.angle)));
            }
        }
        if atoms.windows(2).any(|w| w[0].angle >= w[1].angle) {
            return Err(Error::Measure("angles must be strictly increasing".into()));
        }
        Ok(())
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    /// Mass before normalisation; `1` for measures built already normalised.
    pub fn raw_mass(&self) -> f64 {
        self.raw_mass
    }

    pub fn total_weight(&self) -> f64 {
        self.atoms.iter().map(|a| a.weight).sum()
    }
}

/// Midpoint-rule discretisation of the density `xi` into `n` atoms at
/// `θ_j = 2π (j + 1/2) / n`.
///
/// The measure is `dmu = xi dθ / 2π`, so the recorded raw mass is the mean of
/// `xi` over the midpoints.
pub fn herglotz_from_density<F>(density: F, n: usize) -> Result<SpectralMeasure>
where
    F: Fn(f64) -> f64,
{
    if n < 2 {
        return Err(Error::Parameter(format!("need at least 2 atoms, got {n}")));
    }
    let samples: Vec<f64> = (0..n).map(|j| density(midpoint_angle(j, n))).collect();
    herglotz_from_samples(&samples)
}

/// Same as [`herglotz_from_density`] for a density already sampled at the
/// midpoint angles.
pub fn herglotz_from_samples(samples: &[f64]) -> Result<SpectralMeasure> {
    let n = samples.len();
    if n < 2 {
        return Err(Error::Parameter(format!("need at least 2 atoms, got {n}")));
    }
    if let Some(bad) = samples.iter().find(|x| !(**x >= 0.0 && x.is_finite())) {
        return Err(Error::Measure(format!("density sample {bad} is negative or not finite")));
    }
    let atoms = samples
        .iter()
        .enumerate()
        .map(|(j, xi)| Atom { angle: midpoint_angle(j, n), weight: xi / n as f64 })
        .collect();
    SpectralMeasure::from_weights(atoms)
}

pub fn midpoint_angle(j: usize, n: usize) -> f64 {
    TAU * (j as f64 + 0.5) / n as f64
}

#[derive(Debug, Clone)]
enum Family {
    Constant(Complex64),
    HalfPlane { k: f64 },
    Strip { a: f64, b: f64 },
    Sector { c: f64, alpha: f64 },
    PointKernel(Driver),
    Measure { measure: SpectralMeasure, units: Vec<(Complex64, f64)> },
    Composed { base: Box<DrivingTerm>, map: SelfMap },
    Schedule(Vec<(f64, DrivingTerm)>),
}

/// A driving term `p(z, t)` with optional gain, time shift and
/// normalisation `p(0, t) = 1`.
#[derive(Debug, Clone)]
pub struct DrivingTerm {
    family: Family,
    gain: f64,
    normalized: bool,
    time_offset: f64,
}

impl DrivingTerm {
    fn from_family(family: Family) -> Self {
        Self { family, gain: 1.0, normalized: false, time_offset: 0.0 }
    }

    pub fn constant(c: Complex64) -> Result<Self> {
        if !(c.re > 0.0 && c.re.is_finite() && c.im.is_finite()) {
            return Err(Error::Parameter(format!("constant term needs Re c > 0, got {c}")));
        }
        Ok(Self::from_family(Family::Constant(c)))
    }

    /// `(1 - k)(1 + z)/(1 - z) + k`, the map onto `Re w > k`.
    pub fn half_plane(k: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&k) {
            return Err(Error::Parameter(format!("half-plane needs 0 <= k < 1, got {k}")));
        }
        Ok(Self::from_family(Family::HalfPlane { k }))
    }

    /// `((b - a)/2)(i/π) log((1 + z)/(1 - z)) + (a + b)/2`.
    pub fn strip(a: f64, b: f64) -> Result<Self> {
        if !(0.0 < a && a < 1.0 && 1.0 < b && b.is_finite()) {
            return Err(Error::Parameter(format!("strip needs 0 < a < 1 < b < ∞, got a={a}, b={b}")));
        }
        Ok(Self::from_family(Family::Strip { a, b }))
    }

    /// `((1 + z)/(1 - z))^α` with `α = (2/π) arctan C`.
    pub fn sector(c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::Parameter(format!("sector needs C > 0, got {c}")));
        }
        let alpha = c.atan() / FRAC_PI_2;
        Ok(Self::from_family(Family::Sector { c, alpha }))
    }

    pub fn sector_with_alpha(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::Parameter(format!("sector needs 0 < α < 1, got {alpha}")));
        }
        let c = (alpha * FRAC_PI_2).tan();
        Ok(Self::from_family(Family::Sector { c, alpha }))
    }

    pub fn point_kernel(driver: Driver) -> Result<Self> {
        driver.validate()?;
        Ok(Self::from_family(Family::PointKernel(driver)))
    }

    pub fn measure(measure: SpectralMeasure) -> Self {
        let units = measure
            .atoms()
            .iter()
            .map(|a| (Complex64::cis(a.angle), a.weight))
            .collect();
        Self::from_family(Family::Measure { measure, units })
    }

    /// `p(phi(z), t)`.
    pub fn composed(base: DrivingTerm, map: SelfMap) -> Result<Self> {
        map.validate()?;
        Ok(Self::from_family(Family::Composed { base: Box::new(base), map }))
    }

    /// Piecewise-constant schedule in time: piece `i` is active from its
    /// start until the next start. Times before the first start use the
    /// first piece.
    pub fn schedule(pieces: Vec<(f64, DrivingTerm)>) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::Parameter("schedule has no pieces".into()));
        }
        if pieces.iter().any(|(s, _)| !s.is_finite()) || pieces.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(Error::Parameter("schedule starts must be finite and increasing".into()));
        }
        Ok(Self::from_family(Family::Schedule(pieces)))
    }

    /// Multiplies the term by a positive constant.
    pub fn scaled(mut self, factor: f64) -> Result<Self> {
        if !(factor > 0.0 && factor.is_finite()) {
            return Err(Error::Parameter(format!("gain must be positive, got {factor}")));
        }
        self.gain *= factor;
        Ok(self)
    }

    /// Evaluates at `t + offset` instead of `t`.
    pub fn shifted(mut self, offset: f64) -> Self {
        self.time_offset += offset;
        self
    }

    /// `(p - i Im p(0, t)) / Re p(0, t)`, so that `p(0, t) = 1`.
    pub fn normalized(mut self) -> Self {
        self.normalized = true;
        self
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// True when `p(z, t)` does not depend on `t`.
    pub fn is_autonomous(&self) -> bool {
        match &self.family {
            Family::PointKernel(d) => matches!(d, Driver::Constant { .. }),
            Family::Composed { base, .. } => base.is_autonomous(),
            Family::Schedule(pieces) => pieces.len() == 1 && pieces[0].1.is_autonomous(),
            _ => true,
        }
    }

    pub fn family_name(&self) -> &'static str {
        match &self.family {
            Family::Constant(_) => "constant",
            Family::HalfPlane { .. } => "half_plane",
            Family::Strip { .. } => "strip",
            Family::Sector { .. } => "sector",
            Family::PointKernel(_) => "point_kernel",
            Family::Measure { .. } => "measure",
            Family::Composed { .. } => "composed",
            Family::Schedule(_) => "schedule",
        }
    }

    /// Sector opening exponent, if this is a plain sector term.
    pub fn sector_alpha(&self) -> Option<f64> {
        match &self.family {
            Family::Sector { alpha, .. } => Some(*alpha),
            _ => None,
        }
    }

    pub fn driver(&self) -> Option<&Driver> {
        match &self.family {
            Family::PointKernel(d) => Some(d),
            _ => None,
        }
    }

    pub fn spectral_measure(&self) -> Option<&SpectralMeasure> {
        match &self.family {
            Family::Measure { measure, .. } => Some(measure),
            _ => None,
        }
    }

    /// Times at which the term may jump (schedule switches), in this term's
    /// own clock.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut out = match &self.family {
            Family::Schedule(pieces) => {
                let mut v: Vec<f64> = pieces.iter().skip(1).map(|(s, _)| *s).collect();
                for (_, term) in pieces {
                    v.extend(term.breakpoints());
                }
                v
            }
            Family::Composed { base, .. } => base.breakpoints(),
            _ => Vec::new(),
        };
        for b in &mut out {
            *b -= self.time_offset;
        }
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }

    pub fn evaluate(&self, z: Complex64, t: f64) -> Result<Complex64> {
        Ok(self.evaluate_with_derivative(z, t)?.0)
    }

    pub fn evaluate_derivative(&self, z: Complex64, t: f64) -> Result<Complex64> {
        Ok(self.evaluate_with_derivative(z, t)?.1)
    }

    /// `(p(z, t), p_z(z, t))` in one pass.
    pub fn evaluate_with_derivative(&self, z: Complex64, t: f64) -> Result<(Complex64, Complex64)> {
        ensure_finite(z)?;
        let modulus = z.norm();
        if modulus > GUARD_RADIUS {
            return Err(Error::Domain { z, modulus });
        }
        let t = t + self.time_offset;
        let (p, dp) = self.family_eval(z, t)?;
        if self.normalized {
            let p0 = self.family_eval(Complex64::new(0.0, 0.0), t)?.0;
            let shifted = p - Complex64::new(0.0, p0.im);
            Ok((shifted / p0.re, dp / p0.re))
        } else {
            Ok((p * self.gain, dp * self.gain))
        }
    }

    fn family_eval(&self, z: Complex64, t: f64) -> Result<(Complex64, Complex64)> {
        Ok(match &self.family {
            Family::Constant(c) => (*c, Complex64::new(0.0, 0.0)),
            Family::HalfPlane { k } => {
                let den = ONE - z;
                let s = (ONE + z) / den;
                ((1.0 - k) * s + k, (1.0 - k) * 2.0 / (den * den))
            }
            Family::Strip { a, b } => {
                let c = (b - a) / TAU;
                let s = (ONE + z) / (ONE - z);
                let p = I * c * s.ln() + (a + b) / 2.0;
                (p, I * c * 2.0 / (ONE - z * z))
            }
            Family::Sector { alpha, .. } => {
                let den = ONE - z;
                let s = (ONE + z) / den;
                let p = (s.ln() * alpha).exp();
                (p, alpha * p / s * 2.0 / (den * den))
            }
            Family::PointKernel(driver) => {
                let e = Complex64::cis(driver.value(t));
                let den = e - z;
                ((e + z) / den, 2.0 * e / (den * den))
            }
            Family::Measure { units, .. } => {
                let mut p = Complex64::new(0.0, 0.0);
                let mut dp = Complex64::new(0.0, 0.0);
                for &(e, w) in units {
                    let inv = 1.0 / (e - z);
                    p += w * (e + z) * inv;
                    dp += w * 2.0 * e * inv * inv;
                }
                (p, dp)
            }
            Family::Composed { base, map } => {
                let (phi, dphi) = map.apply(z);
                let (q, dq) = base.evaluate_with_derivative(phi, t)?;
                (q, dq * dphi)
            }
            Family::Schedule(pieces) => {
                let idx = pieces.partition_point(|(s, _)| *s <= t).saturating_sub(1);
                pieces[idx].1.evaluate_with_derivative(z, t)?
            }
        })
    }

    /// Samples `Re p` on a polar grid (`n_r` radii up to `r_max`, `n_theta`
    /// angles) at each of `times` and fails at the first non-positive value.
    pub fn check_positivity(&self, times: &[f64], n_r: usize, n_theta: usize, r_max: f64) -> Result<f64> {
        let mut min_re = f64::INFINITY;
        for &t in times {
            for i in 0..n_r {
                let r = r_max * (i as f64 + 1.0) / n_r as f64;
                for j in 0..n_theta {
                    let z = Complex64::from_polar(r, TAU * j as f64 / n_theta as f64);
                    let re = self.evaluate(z, t)?.re;
                    if !(re > 0.0) {
                        return Err(Error::NotPositive { z, t, re });
                    }
                    min_re = min_re.min(re);
                }
            }
        }
        Ok(min_re)
    }
}

impl fmt::Display for DrivingTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.family {
            Family::Constant(c) => write!(f, "constant(c={}{:+}i)", c.re, c.im)?,
            Family::HalfPlane { k } => write!(f, "half_plane(k={k})")?,
            Family::Strip { a, b } => write!(f, "strip(a={a}, b={b})")?,
            Family::Sector { c, alpha } => write!(f, "sector(C={c}, alpha={alpha})")?,
            Family::PointKernel(d) => match d {
                Driver::Constant { angle } => write!(f, "point_kernel(u={angle})")?,
                Driver::Linear { start, rate } => write!(f, "point_kernel(u={start}+{rate}t)")?,
                Driver::SqrtTime { scale } => write!(f, "point_kernel(u={scale}sqrt(t))")?,
                Driver::Sampled { times, .. } => write!(f, "point_kernel(u=sampled[{}])", times.len())?,
            },
            Family::Measure { measure, .. } => write!(f, "measure(atoms={})", measure.atoms().len())?,
            Family::Composed { base, map } => write!(f, "composed({base}, {map:?})")?,
            Family::Schedule(pieces) => {
                write!(f, "schedule(")?;
                for (i, (s, term)) in pieces.iter().enumerate() {
                    if i > 0 {
                        write!(f, "; ")?;
                    }
                    write!(f, "{s}: {term}")?;
                }
                write!(f, ")")?;
            }
        }
        if self.gain != 1.0 {
            write!(f, "*{}", self.gain)?;
        }
        if self.time_offset != 0.0 {
            write!(f, "@{:+}", self.time_offset)?;
        }
        if self.normalized {
            write!(f, "[normalized]")?;
        }
        Ok(())
    }
}

/// The factor `dt/dτ = 1 / Re p(0, t)` relating physical time to the
/// renormalised clock.
#[derive(Debug, Clone)]
pub struct Timescale {
    original: DrivingTerm,
}

impl Timescale {
    pub fn factor(&self, t: f64) -> f64 {
        if self.original.normalized {
            return 1.0;
        }
        match self.original.evaluate(Complex64::new(0.0, 0.0), t) {
            Ok(p0) => 1.0 / p0.re,
            Err(_) => f64::NAN,
        }
    }
}

/// Rescales time so that the returned term has `p*(0, τ) = 1`.
pub fn renormalize_time(term: &DrivingTerm) -> (DrivingTerm, Timescale) {
    let timescale = Timescale { original: term.clone() };
    (term.clone().normalized(), timescale)
}

/// Terms used across the test-suites and by the catalogue listing.
pub fn standard_catalogue() -> Vec<DrivingTerm> {
    let measure = herglotz_from_density(|th| 1.0 + 0.5 * th.cos() + 0.25 * (3.0 * th).sin(), 16)
        .expect("smooth positive density");
    vec![
        DrivingTerm::constant(ONE).expect("valid"),
        DrivingTerm::half_plane(0.3).expect("valid"),
        DrivingTerm::strip(0.5, 2.0).expect("valid"),
        DrivingTerm::sector(1.0).expect("valid"),
        DrivingTerm::point_kernel(Driver::Constant { angle: 0.0 }).expect("valid"),
        DrivingTerm::measure(measure),
        DrivingTerm::composed(
            DrivingTerm::sector_with_alpha(0.5).expect("valid"),
            SelfMap::ZMobius { angle: 0.4, a: [0.3, -0.2] },
        )
        .expect("valid"),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;
    use rand::{Rng, SeedableRng};

    fn z(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn half_plane_values() {
        let p = DrivingTerm::half_plane(0.0).unwrap();
        assert_eq!(p.evaluate(z(0.0, 0.0), 0.0).unwrap(), ONE);
        assert!((p.evaluate(z(0.5, 0.0), 3.7).unwrap() - 3.0).norm() < 1e-15);
        assert!((p.evaluate_derivative(z(0.0, 0.0), 0.0).unwrap() - 2.0).norm() < 1e-15);
    }

    #[test]
    fn uniform_atoms_have_closed_form() {
        // midpoint atoms are the roots of w^8 = -1
        let p = DrivingTerm::measure(herglotz_from_density(|_| 1.0, 8).unwrap());
        for w in [z(0.3, 0.1), z(-0.6, 0.5), z(0.0, 0.9)] {
            let exact = (ONE - w.powu(8)) / (ONE + w.powu(8));
            assert!((p.evaluate(w, 0.0).unwrap() - exact).norm() < 1e-13);
        }
    }

    #[test]
    fn sector_at_origin_is_one() {
        let p = DrivingTerm::sector(1.0).unwrap();
        assert!((p.sector_alpha().unwrap() - 0.5).abs() < 1e-15);
        assert!((p.evaluate(z(0.0, 0.0), 0.0).unwrap() - 1.0).norm() < 1e-15);
    }

    #[test]
    fn constant_derivative_is_zero() {
        let p = DrivingTerm::constant(ONE).unwrap();
        assert_eq!(p.evaluate_derivative(z(0.3, -0.4), 1.0).unwrap(), z(0.0, 0.0));
    }

    #[test]
    fn single_atom_matches_point_kernel() {
        let theta0 = 1.234;
        let m = DrivingTerm::measure(SpectralMeasure::point(theta0).unwrap());
        let k = DrivingTerm::point_kernel(Driver::Constant { angle: theta0 }).unwrap();
        for i in 1..64 {
            for j in 0..64 {
                let w = Complex64::from_polar(0.999 * i as f64 / 64.0, TAU * j as f64 / 64.0);
                let a = m.evaluate(w, 0.0).unwrap();
                let b = k.evaluate(w, 0.0).unwrap();
                assert!((a - b).norm() <= 1e-12 * b.norm().max(1.0), "{w}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn guard_radius_is_enforced() {
        let p = DrivingTerm::half_plane(0.3).unwrap();
        assert!(p.evaluate(z(1.0 - 1e-10, 0.0), 0.0).is_err());
        assert!(p.evaluate(z(1.0 - 2e-9, 0.0), 0.0).is_ok());
        assert!(matches!(p.evaluate(z(f64::NAN, 0.0), 0.0), Err(Error::Domain { .. })));
        assert!(p.evaluate(z(1.5, 0.0), 0.0).is_err());
    }

    #[test]
    fn parameter_validation() {
        assert!(DrivingTerm::half_plane(1.0).is_err());
        assert!(DrivingTerm::half_plane(-0.1).is_err());
        assert!(DrivingTerm::strip(0.5, 0.9).is_err());
        assert!(DrivingTerm::strip(1.0, 2.0).is_err());
        assert!(DrivingTerm::sector(0.0).is_err());
        assert!(DrivingTerm::constant(z(-1.0, 0.0)).is_err());
        assert!(DrivingTerm::composed(
            DrivingTerm::constant(ONE).unwrap(),
            SelfMap::Dilation { c: [0.9, 0.9] }
        )
        .is_err());
        assert!(SpectralMeasure::new(vec![Atom { angle: 0.0, weight: 0.5 }]).is_err());
        assert!(SpectralMeasure::new(vec![
            Atom { angle: 1.0, weight: 0.5 },
            Atom { angle: 0.5, weight: 0.5 }
        ])
        .is_err());
    }

    #[test]
    fn uniform_density_gives_constant_one() {
        let m = herglotz_from_density(|_| 1.0 / TAU, 8).unwrap();
        assert_eq!(m.atoms().len(), 8);
        for a in m.atoms() {
            assert!((a.weight - 0.125).abs() < 1e-15);
        }
        assert!((m.raw_mass() - 1.0 / TAU).abs() < 1e-15);
        let p = DrivingTerm::measure(m);
        // eight equal atoms give p = (1 + c z^8)/(1 - c z^8), |c| = 1
        for i in 0..10 {
            let w = Complex64::from_polar(0.004 * i as f64, 0.7 * i as f64);
            assert!((p.evaluate(w, 0.0).unwrap() - 1.0).norm() < 1e-10);
            let far = Complex64::from_polar(0.08 * i as f64, 0.7 * i as f64);
            assert!((p.evaluate(far, 0.0).unwrap() - 1.0).norm() <= 2.2 * far.norm().powi(8) + 1e-14);
        }
    }

    #[test]
    fn zero_or_negative_density_rejected() {
        assert!(herglotz_from_density(|_| 0.0, 8).is_err());
        assert!(herglotz_from_density(|th| th.cos(), 8).is_err());
        assert!(herglotz_from_density(|_| 1.0, 1).is_err());
    }

    #[test]
    fn raw_mass_is_mean_of_samples() {
        let samples: Vec<f64> = (0..37).map(|j| 1.0 + (j as f64).sin().abs()).collect();
        let m = herglotz_from_samples(&samples).unwrap();
        let mean = samples.iter().sum::<f64>() / samples.len() as f64;
        assert!((m.raw_mass() - mean).abs() < 1e-14);
        assert!((m.total_weight() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn narrow_bump_approaches_point_kernel() {
        // Dense quadrature of the kernel against the bump, computed directly.
        let theta0 = 2.0;
        let width: f64 = 0.01;
        let bump = |th: f64| {
            let d = (th - theta0 + PI).rem_euclid(TAU) - PI;
            (-(d / width).powi(2)).exp()
        };
        let measure = herglotz_from_density(bump, 4096).unwrap();
        let p = DrivingTerm::measure(measure);
        let kernel = DrivingTerm::point_kernel(Driver::Constant { angle: theta0 }).unwrap();

        let dense = |w: Complex64| {
            let n = 200_000;
            let mut num = Complex64::new(0.0, 0.0);
            let mut den = 0.0;
            for j in 0..n {
                let th = TAU * (j as f64 + 0.5) / n as f64;
                let e = Complex64::cis(th);
                let x = bump(th);
                num += x * (e + w) / (e - w);
                den += x;
            }
            num / den
        };
        for w in [z(0.0, 0.0), z(0.5, 0.1), z(-0.7, 0.2), Complex64::from_polar(0.8, theta0 + PI)] {
            let got = p.evaluate(w, 0.0).unwrap();
            let oracle = dense(w);
            assert!((got - oracle).norm() < 1e-8, "{w}: {got} vs {oracle}");
            let pk = kernel.evaluate(w, 0.0).unwrap();
            assert!((got - pk).norm() < 1e-2 * pk.norm(), "{w}: {got} vs kernel {pk}");
        }
    }

    #[test]
    fn renormalization() {
        let strip = DrivingTerm::strip(0.5, 2.0).unwrap().scaled(2.0).unwrap();
        let (p, ts) = renormalize_time(&strip);
        assert!((p.evaluate(z(0.0, 0.0), 0.3).unwrap() - 1.0).norm() <= 1e-12);
        assert!((ts.factor(0.3) - 1.0 / 2.5).abs() < 1e-15);

        let already = DrivingTerm::sector(2.0).unwrap().normalized();
        let (_, ts) = renormalize_time(&already);
        assert_eq!(ts.factor(1.0), 1.0);

        let m = herglotz_from_density(|th| 2.0 + th.sin(), 32).unwrap();
        let mass = m.raw_mass();
        let raw = DrivingTerm::measure(m).scaled(mass).unwrap();
        let (p, ts) = renormalize_time(&raw);
        assert!((ts.factor(0.0) - 1.0 / mass).abs() < 1e-14);
        assert!((p.evaluate(z(0.0, 0.0), 0.0).unwrap() - 1.0).norm() < 1e-14);
    }

    #[test]
    fn renormalized_density_bounds() {
        // a < xi < b implies a/b < Re p* < b/a.
        let (a, b) = (1.0, 4.0);
        let m = herglotz_from_density(|th| 2.5 + 1.4 * (2.0 * th).cos(), 256).unwrap();
        let (p, _) = renormalize_time(&DrivingTerm::measure(m));
        for i in 0..40 {
            for j in 0..64 {
                let w = Complex64::from_polar(0.99 * i as f64 / 40.0, TAU * j as f64 / 64.0);
                let re = p.evaluate(w, 0.0).unwrap().re;
                assert!(a / b < re && re < b / a, "{re}");
            }
        }
    }

    #[test]
    fn schedule_switches_pieces() {
        let s = DrivingTerm::schedule(vec![
            (0.0, DrivingTerm::constant(ONE).unwrap()),
            (1.0, DrivingTerm::constant(z(2.0, 0.0)).unwrap()),
        ])
        .unwrap();
        assert_eq!(s.evaluate(z(0.1, 0.0), 0.5).unwrap(), ONE);
        assert_eq!(s.evaluate(z(0.1, 0.0), 1.0).unwrap(), z(2.0, 0.0));
        assert_eq!(s.breakpoints(), vec![1.0]);
        assert_eq!(s.clone().shifted(0.25).breakpoints(), vec![0.75]);
        assert_eq!(s.shifted(0.25).evaluate(z(0.1, 0.0), 0.8).unwrap(), z(2.0, 0.0));
    }

    #[test]
    fn brownian_driver_is_reproducible() {
        let a = Driver::brownian(2.0, 1e-3, 1.0, 7).unwrap();
        let b = Driver::brownian(2.0, 1e-3, 1.0, 7).unwrap();
        assert_eq!(a, b);
        assert!(a.value(0.5).is_finite());
        assert_eq!(a.value(0.0), 0.0);
    }

    #[test]
    fn derivative_matches_finite_differences() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let h = 1e-6;
        for term in standard_catalogue() {
            for _ in 0..1000 {
                let r = 0.9 * rng.random::<f64>().sqrt();
                let w = Complex64::from_polar(r, rng.random::<f64>() * TAU);
                let t = rng.random::<f64>();
                let exact = term.evaluate_derivative(w, t).unwrap();
                let fd = (term.evaluate(w + h, t).unwrap() - term.evaluate(w - h, t).unwrap()) / (2.0 * h);
                let scale = exact.norm().max(term.evaluate(w, t).unwrap().norm());
                assert!((exact - fd).norm() <= 1e-6 * scale, "{term} at {w}: {exact} vs {fd}");
            }
        }
    }

    #[test]
    fn catalogue_is_positive() {
        let times: Vec<f64> = (0..4).map(|i| i as f64 * 0.5).collect();
        for term in standard_catalogue() {
            term.check_positivity(&times, 64, 64, 0.999).unwrap();
        }
    }

    #[test]
    fn normalization_holds_over_time() {
        let driven = DrivingTerm::composed(
            DrivingTerm::point_kernel(Driver::Linear { start: 0.0, rate: 1.0 }).unwrap(),
            SelfMap::Mobius { angle: 0.3, a: [0.2, 0.1] },
        )
        .unwrap()
        .scaled(3.0)
        .unwrap()
        .normalized();
        for i in 0..100 {
            let t = i as f64 * 0.07;
            assert!((driven.evaluate(z(0.0, 0.0), t).unwrap() - 1.0).norm() <= 1e-12);
        }
    }
}
