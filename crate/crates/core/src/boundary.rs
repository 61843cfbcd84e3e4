//! Boundary behaviour of `w(·, T)`: near-boundary image curves and the
//! regularity measurements taken on them.
//!
//! The closed-disc map is approximated on the circle `|z| = r` with `r`
//! close to 1 ([`DEFAULT_TRACE_RADIUS`]).

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::flow::{integrate, integrate_grid, FlowField, Sample, TrajectoryExit};
use crate::geometry::{closed_length, first_self_intersection};
use crate::regression::fit_line;
use crate::{Error, Result};

pub const DEFAULT_TRACE_RADIUS: f64 = 1.0 - 1e-4;
pub const MIN_CURVE_POINTS: usize = 16;

/// Images `w(r e^{iθ_i}, T)` of equispaced seeds `θ_i = phase + 2πi/n`.
/// The curve is closed: the last point connects back to the first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryCurve {
    pub time: f64,
    pub radius: f64,
    pub phase: f64,
    pub points: Vec<Complex64>,
}

impl BoundaryCurve {
    pub fn new(time: f64, radius: f64, phase: f64, points: Vec<Complex64>) -> Result<Self> {
        if points.len() < MIN_CURVE_POINTS {
            return Err(Error::InsufficientData(format!(
                "a boundary curve needs at least {MIN_CURVE_POINTS} points, got {}",
                points.len()
            )));
        }
        Ok(Self { time, radius, phase, points })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn angle(&self, i: usize) -> f64 {
        self.phase + TAU * i as f64 / self.points.len() as f64
    }

    pub fn seeds(&self) -> Vec<Complex64> {
        circle_seeds(self.radius, self.points.len(), self.phase)
    }

    pub fn length(&self) -> f64 {
        closed_length(&self.points)
    }
}

pub fn circle_seeds(radius: f64, n: usize, phase: f64) -> Vec<Complex64> {
    (0..n).map(|i| Complex64::from_polar(radius, phase + TAU * i as f64 / n as f64)).collect()
}

/// `(w, w_z)` at `time` for every seed, in seed order.
pub fn flow_to_time(field: &FlowField, time: f64, seeds: &[Complex64]) -> Result<Vec<Sample>> {
    let field = field.until(time)?;
    integrate_grid(&field, seeds)
        .into_iter()
        .zip(seeds)
        .map(|(tr, z)| {
            let tr = tr?;
            match &tr.exit {
                TrajectoryExit::HorizonReached => Ok(*tr.last()),
                TrajectoryExit::BoundaryReached(g) => Err(Error::Integration {
                    angle: z.arg(),
                    reason: format!("reached the circle at {g} before t = {time}"),
                }),
                TrajectoryExit::StepFailure { t, reason } => {
                    Err(Error::Integration { angle: z.arg(), reason: format!("at t = {t}: {reason}") })
                }
            }
        })
        .collect()
}

pub fn trace_boundary(field: &FlowField, time: f64, radius: f64, n: usize) -> Result<BoundaryCurve> {
    trace_boundary_with_phase(field, time, radius, n, 0.0)
}

pub fn trace_boundary_with_phase(
    field: &FlowField,
    time: f64,
    radius: f64,
    n: usize,
    phase: f64,
) -> Result<BoundaryCurve> {
    if !(0.9..1.0 - 1e-6).contains(&radius) {
        return Err(Error::Parameter(format!("trace radius must lie in [0.9, 1 - 1e-6), got {radius}")));
    }
    if n < MIN_CURVE_POINTS {
        return Err(Error::Parameter(format!("need at least {MIN_CURVE_POINTS} points, got {n}")));
    }
    let seeds = circle_seeds(radius, n, phase);
    let points = flow_to_time(field, time, &seeds)?.into_iter().map(|s| s.w).collect();
    BoundaryCurve::new(time, radius, phase, points)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HolderConfig {
    /// `1 - r` ranges over `[min_gap, max_gap]`, log-spaced.
    pub min_gap: f64,
    pub max_gap: f64,
    pub n_radii: usize,
    /// Number of rays; even counts include `θ = π`.
    pub n_rays: usize,
    /// Points of the trace used by the pairwise estimator.
    pub trace_points: usize,
    pub trace_radius: f64,
}

impl Default for HolderConfig {
    fn default() -> Self {
        Self { min_gap: 1e-4, max_gap: 1e-1, n_radii: 13, n_rays: 128, trace_points: 1024, trace_radius: 1.0 - 1e-4 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HolderEstimate {
    /// Derivative-based exponent `1 - k` from `max |w_z| ~ (1 - r)^-k`.
    pub exponent: f64,
    pub constant: f64,
    pub derivative_slope: f64,
    /// Slope of `log max |w_i - w_j|` against `log |z_i - z_j|`.
    pub pairwise_exponent: Option<f64>,
    /// The two estimators differ by more than 0.1.
    pub disagreement: bool,
    /// Fewer than three radii produced usable derivatives.
    pub insufficient_range: bool,
    pub radii_used: usize,
}

pub fn estimate_holder(field: &FlowField, time: f64, cfg: HolderConfig) -> Result<HolderEstimate> {
    if !(cfg.min_gap > 0.0 && cfg.min_gap < cfg.max_gap && cfg.max_gap < 1.0 && cfg.n_radii >= 2) {
        return Err(Error::Parameter(format!("invalid Hölder window {cfg:?}")));
    }
    let (g0, g1) = (cfg.max_gap.ln(), cfg.min_gap.ln());
    let gaps: Vec<f64> = (0..cfg.n_radii).map(|i| (g0 + (g1 - g0) * i as f64 / (cfg.n_radii - 1) as f64).exp()).collect();
    let mut x = Vec::new();
    let mut y = Vec::new();
    let mut maxima = Vec::new();
    for &gap in &gaps {
        let seeds = circle_seeds(1.0 - gap, cfg.n_rays, 0.0);
        match flow_to_time(field, time, &seeds) {
            Ok(samples) => {
                let m = samples.iter().map(|s| s.wz.norm()).fold(0.0f64, f64::max);
                if m.is_finite() && m > 0.0 {
                    x.push(gap.ln());
                    y.push(m.ln());
                    maxima.push((gap, m));
                }
            }
            Err(e) => log::warn!("Hölder estimate skips 1 - r = {gap:e}: {e}"),
        }
    }
    let radii_used = x.len();
    if radii_used < 3 {
        return Ok(HolderEstimate {
            exponent: f64::NAN,
            constant: f64::NAN,
            derivative_slope: f64::NAN,
            pairwise_exponent: None,
            disagreement: false,
            insufficient_range: true,
            radii_used,
        });
    }
    let line = fit_line(&x, &y)?;
    let k = (-line.slope).max(0.0);
    let exponent = (1.0 - k).clamp(f64::MIN_POSITIVE, 1.0);
    let constant = maxima.iter().map(|(g, m)| m * g.powf(k)).fold(0.0f64, f64::max) / exponent;

    let pairwise_exponent = match trace_boundary(field, time, cfg.trace_radius, cfg.trace_points) {
        Ok(curve) => pairwise_holder(&curve).ok(),
        Err(e) => {
            log::warn!("pairwise Hölder estimate unavailable: {e}");
            None
        }
    };
    let disagreement = pairwise_exponent.is_some_and(|p| (p - exponent).abs() > 0.1);
    Ok(HolderEstimate {
        exponent,
        constant,
        derivative_slope: line.slope,
        pairwise_exponent,
        disagreement,
        insufficient_range: false,
        radii_used,
    })
}

/// Fitted exponent of `δ -> max |w_i - w_{i+d}|` over index offsets whose
/// seed chords exceed ten times the distance to the circle.
pub fn pairwise_holder(curve: &BoundaryCurve) -> Result<f64> {
    let n = curve.len();
    let seeds = curve.seeds();
    let min_chord = 10.0 * (1.0 - curve.radius);
    let mut x = Vec::new();
    let mut y = Vec::new();
    let mut d = 1;
    while d <= n / 16 {
        let chord = (seeds[d] - seeds[0]).norm();
        if chord >= min_chord {
            let m = (0..n).map(|i| (curve.points[(i + d) % n] - curve.points[i]).norm()).fold(0.0f64, f64::max);
            x.push(chord.ln());
            y.push(m.ln());
        }
        d *= 2;
    }
    if x.len() < 3 {
        return Err(Error::InsufficientData("too few admissible chord lengths".into()));
    }
    Ok(fit_line(&x, &y)?.slope)
}

/// Offsets used when enumerating triples: every small offset, then a
/// geometric ladder.
fn offset_ladder(n: usize) -> Vec<usize> {
    let mut out: Vec<usize> = (1..=12.min(n - 1)).collect();
    let mut d = 12.0f64;
    loop {
        d *= 1.5;
        let k = d.round() as usize;
        if k >= n {
            break;
        }
        out.push(k);
    }
    out
}

pub const MAX_TRIPLES: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThreePoint {
    /// `max (|w_i - w_j| / |w_i - w_k|) / (|z_i - z_j| / |z_i - z_k|)`.
    pub ratio: f64,
    /// `max (|w_i - w_m| + |w_m - w_j|) / |w_i - w_j|` over `m` on the
    /// shorter arc between `i` and `j`.
    pub bounded_turning: f64,
    pub triples: usize,
}

pub fn three_point_ratio(curve: &BoundaryCurve) -> Result<ThreePoint> {
    let n = curve.len();
    if n < MIN_CURVE_POINTS {
        return Err(Error::InsufficientData(format!("need {MIN_CURVE_POINTS} points, got {n}")));
    }
    let w = &curve.points;
    for i in 0..n {
        if w[i] == w[(i + 1) % n] {
            return Err(Error::InsufficientData(format!("repeated point at index {i}")));
        }
    }
    let z = curve.seeds();
    let ladder = offset_ladder(n);
    let per_i = 2 * ladder.len() * (ladder.len() - 1) / 2;
    let stride = (n * per_i).div_ceil(MAX_TRIPLES).max(1);
    let starts: Vec<usize> = (0..n).step_by(stride).collect();

    let ratios: Vec<Result<(f64, usize)>> = starts
        .par_iter()
        .map(|&i| {
            let mut best = 0.0f64;
            let mut count = 0;
            for dir in [1isize, -1] {
                let at = |d: usize| (i as isize + dir * d as isize).rem_euclid(n as isize) as usize;
                for (a, &dk) in ladder.iter().enumerate() {
                    let k = at(dk);
                    let wk = (w[i] - w[k]).norm();
                    let zk = (z[i] - z[k]).norm();
                    if wk == 0.0 {
                        return Err(Error::InsufficientData(format!("points {i} and {k} coincide")));
                    }
                    for &dj in &ladder[..a] {
                        let j = at(dj);
                        let r = ((w[i] - w[j]).norm() / wk) / ((z[i] - z[j]).norm() / zk);
                        best = best.max(r);
                        count += 1;
                    }
                }
            }
            Ok((best, count))
        })
        .collect();
    let mut ratio = 0.0f64;
    let mut triples = 0;
    for r in ratios {
        let (b, c) = r?;
        ratio = ratio.max(b);
        triples += c;
    }

    let pairs: Vec<(usize, usize)> = starts
        .iter()
        .flat_map(|&i| ladder.iter().filter(|&&d| d >= 2 && d <= n / 2).map(move |&d| (i, d)))
        .collect();
    let bounded_turning = pairs
        .par_iter()
        .map(|&(i, d)| {
            let j = (i + d) % n;
            let chord = (w[i] - w[j]).norm();
            (1..d)
                .map(|m| {
                    let p = w[(i + m) % n];
                    ((w[i] - p).norm() + (p - w[j]).norm()) / chord
                })
                .fold(1.0f64, f64::max)
        })
        .collect::<Vec<f64>>()
        .into_iter()
        .fold(1.0f64, f64::max);

    Ok(ThreePoint { ratio, bounded_turning, triples })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rectifiability {
    /// `(points, polyline length)` for each resolution.
    pub lengths: Vec<(usize, f64)>,
    pub length: f64,
    pub converged: bool,
}

pub const RECTIFIABILITY_RESOLUTIONS: [usize; 3] = [256, 512, 1024];

/// Polyline lengths of the trace at 256, 512 and 1024 points; converged
/// when the last doubling changes the length by less than 0.5%.
pub fn rectifiability(field: &FlowField, time: f64, radius: f64) -> Result<Rectifiability> {
    let mut lengths = Vec::new();
    for n in RECTIFIABILITY_RESOLUTIONS {
        lengths.push((n, trace_boundary(field, time, radius, n)?.length()));
    }
    let (coarse, fine) = (lengths[lengths.len() - 2].1, lengths[lengths.len() - 1].1);
    let converged = (fine - coarse).abs() < 0.005 * fine;
    Ok(Rectifiability { length: lengths[lengths.len() - 1].1, lengths, converged })
}

/// True iff no two non-adjacent segments of the closed polyline meet.
pub fn jordan_check(curve: &BoundaryCurve) -> bool {
    first_self_intersection(&curve.points).is_none()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InverseModulus {
    pub deltas: Vec<f64>,
    /// Largest seed distance over image pairs at most `δ` apart.
    pub moduli: Vec<f64>,
}

impl InverseModulus {
    pub fn is_monotone(&self) -> bool {
        self.moduli.windows(2).all(|w| w[0] <= w[1])
    }

    /// Best constant `C` for `modulus(δ) ≈ C δ^β` in the minimax log sense,
    /// with the largest log-scale deviation.
    pub fn fit_with_exponent(&self, beta: f64) -> Option<(f64, f64)> {
        let offsets: Vec<f64> = self
            .deltas
            .iter()
            .zip(&self.moduli)
            .filter(|(_, m)| **m > 0.0)
            .map(|(d, m)| m.ln() - beta * d.ln())
            .collect();
        if offsets.len() < 2 {
            return None;
        }
        let lo = offsets.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = offsets.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Some((((lo + hi) / 2.0).exp(), (hi - lo) / 2.0))
    }
}

/// Empirical modulus of continuity of `w^{-1}` on the traced boundary.
pub fn inverse_modulus(curve: &BoundaryCurve, deltas: &[f64]) -> InverseModulus {
    let n = curve.len();
    let z = curve.seeds();
    let w = &curve.points;
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .into_par_iter()
        .flat_map_iter(|i| {
            let z = &z;
            (i + 1..n).map(move |j| ((w[i] - w[j]).norm(), (z[i] - z[j]).norm()))
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let mut prefix = Vec::with_capacity(pairs.len());
    let mut m = 0.0f64;
    for p in &pairs {
        m = m.max(p.1);
        prefix.push(m);
    }
    let moduli = deltas
        .iter()
        .map(|&d| {
            let k = pairs.partition_point(|p| p.0 <= d);
            if k == 0 {
                0.0
            } else {
                prefix[k - 1]
            }
        })
        .collect();
    InverseModulus { deltas: deltas.to_vec(), moduli }
}

/// Test points for composition checks: a golden-angle spiral filling
/// `|z| <= 0.9`.
pub fn composition_probes(n: usize) -> Vec<Complex64> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|k| Complex64::from_polar(0.9 * ((k as f64 + 0.5) / n as f64).sqrt(), golden * k as f64))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowCheck {
    pub pairs: usize,
    pub passed: usize,
    pub min_ratio: f64,
    pub max_ratio: f64,
}

impl WindowCheck {
    pub fn all_passed(&self) -> bool {
        self.passed == self.pairs
    }
}

#[derive(Debug, Clone)]
pub struct SplitComposition {
    /// Sub-flows in application order: the direct map is
    /// `pieces[n-1] ∘ ... ∘ pieces[0]`.
    pub pieces: Vec<FlowField>,
    pub max_deviation: f64,
    pub tolerance: f64,
    /// `max |w_z - 1|` of each piece on the 64-angle grid.
    pub piece_distortion: Vec<f64>,
    /// Present when every piece has distortion at most 1/4.
    pub window: Option<Vec<WindowCheck>>,
}

pub const DISTORTION_WINDOW: f64 = 0.25;
const DISTORTION_ANGLES: usize = 64;
pub const WINDOW_PAIRS: usize = 1000;

/// Splits `[0, time]` into `n` equal pieces with time-shifted terms and
/// checks that composing the pieces reproduces the direct flow at 100
/// probes (`|z| <= 0.9`).
pub fn split_composition(field: &FlowField, time: f64, n: usize) -> Result<SplitComposition> {
    if n == 0 {
        return Err(Error::Parameter("need at least one piece".into()));
    }
    let tau = time / n as f64;
    let pieces: Vec<FlowField> = (0..n)
        .map(|i| {
            let mut piece = field.until(tau)?;
            piece.term = field.term.clone().shifted(i as f64 * tau);
            Ok(piece)
        })
        .collect::<Result<_>>()?;

    let probes = composition_probes(100);
    let direct = flow_to_time(field, time, &probes)?;
    let mut current = probes.clone();
    for piece in &pieces {
        current = flow_to_time(piece, tau, &current)?.into_iter().map(|s| s.w).collect();
    }
    let tol = field.tolerances;
    let tolerance = 10.0 * (tol.abs + tol.rel);
    let mut max_deviation = 0.0f64;
    for (d, c) in direct.iter().zip(&current) {
        let scale = 1.0f64.max(d.w.norm());
        max_deviation = max_deviation.max((d.w - c).norm() / scale);
    }
    if !(max_deviation <= tolerance) {
        return Err(Error::CompositionMismatch { deviation: max_deviation, tolerance });
    }

    let mut piece_distortion = Vec::with_capacity(n);
    for piece in &pieces {
        piece_distortion.push(max_distortion(piece, tau, DEFAULT_TRACE_RADIUS, DISTORTION_ANGLES)?);
    }
    let window = if piece_distortion.iter().all(|d| *d <= DISTORTION_WINDOW) {
        Some(
            pieces
                .iter()
                .enumerate()
                .map(|(i, p)| window_check(p, tau, WINDOW_PAIRS, i as u64))
                .collect::<Result<_>>()?,
        )
    } else {
        None
    };
    Ok(SplitComposition { pieces, max_deviation, tolerance, piece_distortion, window })
}

/// `max |w_z(r e^{iθ}, time) - 1|` over `n` equispaced angles from 0.
pub fn max_distortion(field: &FlowField, time: f64, radius: f64, n: usize) -> Result<f64> {
    let seeds = circle_seeds(radius, n, 0.0);
    Ok(flow_to_time(field, time, &seeds)?.iter().map(|s| (s.wz - 1.0).norm()).fold(0.0, f64::max))
}

/// Checks `3/4 |z1 - z2| <= |w(z1) - w(z2)| <= 5/4 |z1 - z2|` on seeded
/// random pairs of the trace circle.
pub fn window_check(field: &FlowField, time: f64, pairs: usize, seed: u64) -> Result<WindowCheck> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed ^ seed);
    let r = DEFAULT_TRACE_RADIUS;
    let mut seeds = Vec::with_capacity(2 * pairs);
    for _ in 0..pairs {
        let a: f64 = rng.random_range(0.0..TAU);
        let b: f64 = rng.random_range(0.0..TAU);
        seeds.push(Complex64::from_polar(r, a));
        seeds.push(Complex64::from_polar(r, b));
    }
    let images = flow_to_time(field, time, &seeds)?;
    let mut check = WindowCheck { pairs, passed: 0, min_ratio: f64::INFINITY, max_ratio: 0.0 };
    for k in 0..pairs {
        let dz = (seeds[2 * k] - seeds[2 * k + 1]).norm();
        if dz == 0.0 {
            check.passed += 1;
            continue;
        }
        let q = (images[2 * k].w - images[2 * k + 1].w).norm() / dz;
        check.min_ratio = check.min_ratio.min(q);
        check.max_ratio = check.max_ratio.max(q);
        if (0.75..=1.25).contains(&q) {
            check.passed += 1;
        }
    }
    Ok(check)
}

/// Largest `t <= horizon` with `max |w_z - 1| <= target` on the 64-angle
/// grid at the trace radius, by bisection.
pub fn small_time_window(field: &FlowField, horizon: f64, target: f64) -> Result<f64> {
    let g = |t: f64| max_distortion(field, t, DEFAULT_TRACE_RADIUS, DISTORTION_ANGLES);
    if g(horizon)? <= target {
        return Ok(horizon);
    }
    let (mut lo, mut hi) = (0.0, horizon);
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        if mid <= 0.0 {
            break;
        }
        if g(mid)? <= target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-6 * hi {
            break;
        }
    }
    if lo == 0.0 {
        return Err(Error::InsufficientData("no positive time satisfies the distortion window".into()));
    }
    Ok(lo)
}

/// Largest number of pieces examined one by one for a time-dependent term.
pub const MAX_WINDOW_PIECES: usize = 4096;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QcWindow {
    /// Piece length from [`small_time_window`].
    pub t0: f64,
    /// Number of pieces covering `[0, time]`.
    pub pieces: usize,
    /// `(piece index, max |w_z - 1|, pair check)` for each examined piece.
    pub checked: Vec<(usize, f64, WindowCheck)>,
    /// Three-point ratio of the curve traced at `t0`.
    pub three_point: ThreePoint,
}

impl QcWindow {
    pub fn all_passed(&self) -> bool {
        self.checked.iter().all(|(_, d, w)| *d <= DISTORTION_WINDOW && w.all_passed())
    }
}

/// Cuts `[0, time]` into pieces short enough for `max |w_z - 1| <= 1/4` and
/// checks the two-point window `3/4 <= |Δw| / |Δz| <= 5/4` on each piece.
///
/// Pieces of a time-independent term are one and the same map, so only the
/// first, middle and last piece are examined; otherwise every piece is,
/// up to [`MAX_WINDOW_PIECES`].
pub fn quasiconformal_window(field: &FlowField, time: f64) -> Result<QcWindow> {
    let t0 = small_time_window(field, time, DISTORTION_WINDOW)?;
    let n = (time / t0).ceil().max(1.0) as usize;
    let tau = time / n as f64;
    let indices: Vec<usize> = if field.term.is_autonomous() {
        let mut v = vec![0, n / 2, n - 1];
        v.dedup();
        v
    } else if n <= MAX_WINDOW_PIECES {
        (0..n).collect()
    } else {
        return Err(Error::InsufficientData(format!(
            "{n} pieces needed for the distortion window, more than {MAX_WINDOW_PIECES}"
        )));
    };
    let mut checked = Vec::with_capacity(indices.len());
    for i in indices {
        let mut piece = field.until(tau)?;
        piece.term = field.term.clone().shifted(i as f64 * tau);
        let d = max_distortion(&piece, tau, DEFAULT_TRACE_RADIUS, DISTORTION_ANGLES)?;
        checked.push((i, d, window_check(&piece, tau, WINDOW_PAIRS, i as u64)?));
    }
    let curve = trace_boundary(field, t0, DEFAULT_TRACE_RADIUS, 1024)?;
    Ok(QcWindow { t0, pieces: n, checked, three_point: three_point_ratio(&curve)? })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegularityReport {
    pub holder: HolderEstimate,
    pub qc_three_point: ThreePoint,
    pub rectifiability: Rectifiability,
    pub jordan: bool,
    pub inverse_modulus: InverseModulus,
}

/// Log-spaced `δ` values between a few trace spacings and a quarter of the
/// curve's extent.
pub fn default_deltas(curve: &BoundaryCurve, count: usize) -> Vec<f64> {
    let n = curve.len();
    let spacing = (0..n).map(|i| (curve.points[(i + 1) % n] - curve.points[i]).norm()).fold(0.0f64, f64::max);
    let extent = curve.points.iter().map(|p| (p - curve.points[0]).norm()).fold(0.0f64, f64::max);
    let (lo, hi) = ((4.0 * spacing).ln(), (0.25 * extent).ln());
    let count = count.max(2);
    (0..count).map(|i| (lo + (hi - lo) * i as f64 / (count - 1) as f64).exp()).collect()
}

/// Runs every boundary measurement at `time`.
pub fn regularity_report(field: &FlowField, time: f64, holder: HolderConfig) -> Result<RegularityReport> {
    let curve = trace_boundary(field, time, DEFAULT_TRACE_RADIUS, 1024)?;
    let deltas = default_deltas(&curve, 16);
    Ok(RegularityReport {
        holder: estimate_holder(field, time, holder)?,
        qc_three_point: three_point_ratio(&curve)?,
        rectifiability: rectifiability(field, time, DEFAULT_TRACE_RADIUS)?,
        jordan: jordan_check(&curve),
        inverse_modulus: inverse_modulus(&curve, &deltas),
    })
}

/// `w(z, time)` for a single point.
pub fn map_point(field: &FlowField, time: f64, z: Complex64) -> Result<Sample> {
    let tr = integrate(&field.until(time)?, z)?;
    match tr.exit {
        TrajectoryExit::HorizonReached => Ok(*tr.last()),
        other => Err(Error::Integration { angle: z.arg(), reason: format!("{other:?}") }),
    }
}
