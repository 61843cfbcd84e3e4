//! Analytic characteristics of a driving term, estimated on polar grids.
//!
//! * `H(p) = sup (1 - |z|^2) |p'(z)| / Re p(z)`; `k = H / 2` predicts the
//!   boundary Hölder exponent `1 - k`.
//! * Growth fits of `|p| / Re p <= C1 (1 - r)^-α` and `Re p >= C2 (1 - r)^α`.
//! * Verdicts for the hypotheses of the boundary-regularity results.
//! * The `sqrt`-Hölder seminorm of a point-kernel driver.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::driving::DrivingTerm;
use crate::regression::{fit_line, golden_max};
use crate::{Error, Result};

/// Innermost distance to the circle ever sampled.
pub const MIN_GAP: f64 = 1e-6;

const GOLDEN_ITERS: usize = 48;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HGrid {
    pub n_r: usize,
    pub n_theta: usize,
    /// Number of best grid cells handed to the local polish.
    pub polish: usize,
    /// Also evaluate at doubled resolution and report convergence.
    pub refine: bool,
}

impl Default for HGrid {
    fn default() -> Self {
        Self { n_r: 256, n_theta: 256, polish: 16, refine: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HEstimate {
    /// Largest value actually evaluated: a lower bound of the supremum.
    pub value: f64,
    pub argmax: Complex64,
    /// Estimate at the base resolution.
    pub coarse: f64,
    /// Relative change on doubling the resolution is below 1%.
    pub converged: bool,
}

/// `(1 - |z|^2) |p'(z)| / Re p(z)`.
pub fn h_integrand(term: &DrivingTerm, z: Complex64, t: f64) -> Result<f64> {
    let (p, dp) = term.evaluate_with_derivative(z, t)?;
    if !(p.re > 0.0) {
        return Err(Error::NotPositive { z, t, re: p.re });
    }
    Ok((1.0 - z.norm_sqr()) * dp.norm() / p.re)
}

/// Radii for sup estimation: half linear on `[0, 0.9)`, half with `1 - r`
/// log-spaced from `0.1` down to [`MIN_GAP`].
pub fn polar_radii(n: usize) -> Vec<f64> {
    let n = n.max(4);
    let n_lin = n / 2;
    let n_log = n - n_lin;
    let mut out: Vec<f64> = (0..n_lin).map(|i| 0.9 * i as f64 / n_lin as f64).collect();
    let span = (0.1f64 / MIN_GAP).log10();
    out.extend((0..n_log).map(|j| 1.0 - 0.1 * 10f64.powf(-span * j as f64 / (n_log - 1) as f64)));
    out
}

fn gap_log(r: f64) -> f64 {
    (1.0 - r).ln()
}

fn from_gap_log(u: f64) -> f64 {
    1.0 - u.clamp(MIN_GAP.ln(), 0.0).exp()
}

fn h_pass(term: &DrivingTerm, t: f64, n_r: usize, n_theta: usize, polish: usize) -> Result<(f64, Complex64)> {
    let radii = polar_radii(n_r);
    let rows: Vec<Result<Vec<f64>>> = radii
        .par_iter()
        .map(|&r| {
            (0..n_theta)
                .map(|j| h_integrand(term, Complex64::from_polar(r, TAU * j as f64 / n_theta as f64), t))
                .collect()
        })
        .collect();
    let mut cells = Vec::with_capacity(n_r * n_theta);
    for (i, row) in rows.into_iter().enumerate() {
        for (j, v) in row?.into_iter().enumerate() {
            cells.push((v, i, j));
        }
    }
    cells.sort_by(|a, b| b.0.total_cmp(&a.0).then((a.1, a.2).cmp(&(b.1, b.2))));
    let (v0, i0, j0) = cells[0];
    let mut best = (v0, Complex64::from_polar(radii[i0], TAU * j0 as f64 / n_theta as f64));

    let dtheta = TAU / n_theta as f64;
    let eval = |u: f64, th: f64| {
        h_integrand(term, Complex64::from_polar(from_gap_log(u), th), t).unwrap_or(f64::NEG_INFINITY)
    };
    let polished: Vec<(f64, f64, f64)> = cells[..polish.min(cells.len())]
        .par_iter()
        .map(|&(v, i, j)| {
            let mut u = gap_log(radii[i]);
            let lo_u = gap_log(radii[i.saturating_sub(1)]);
            let hi_u = gap_log(radii[(i + 1).min(radii.len() - 1)]);
            let mut du = (lo_u - u).abs().max((hi_u - u).abs()).max(1e-3);
            let mut th = dtheta * j as f64;
            let mut dt = dtheta;
            let mut val = v;
            for _ in 0..3 {
                let (x, fx) = golden_max(|x| eval(u, x), th - dt, th + dt, GOLDEN_ITERS);
                if fx > val {
                    val = fx;
                    th = x;
                }
                let a = (u - du).max(MIN_GAP.ln());
                let b = (u + du).min(0.0);
                let (x, fx) = golden_max(|x| eval(x, th), a, b, GOLDEN_ITERS);
                if fx > val {
                    val = fx;
                    u = x;
                }
                dt *= 0.5;
                du *= 0.5;
            }
            (val, u, th)
        })
        .collect();
    for (val, u, th) in polished {
        if val > best.0 {
            best = (val, Complex64::from_polar(from_gap_log(u), th));
        }
    }
    Ok(best)
}

/// Grid supremum of [`h_integrand`] at time `t`, polished by golden-section
/// search in `(ln(1 - r), θ)` around the best cells.
pub fn estimate_h(term: &DrivingTerm, t: f64, grid: HGrid) -> Result<HEstimate> {
    if grid.n_r < 4 || grid.n_theta < 4 {
        return Err(Error::Parameter("H grid needs at least 4x4 cells".into()));
    }
    let (coarse, at) = h_pass(term, t, grid.n_r, grid.n_theta, grid.polish)?;
    if !grid.refine {
        return Ok(HEstimate { value: coarse, argmax: at, coarse, converged: false });
    }
    let (fine, at_fine) = h_pass(term, t, 2 * grid.n_r, 2 * grid.n_theta, grid.polish)?;
    let converged = (fine - coarse).abs() <= 0.01 * fine.abs().max(1e-12);
    let (value, argmax) = if fine >= coarse { (fine, at_fine) } else { (coarse, at) };
    Ok(HEstimate { value, argmax, coarse, converged })
}

/// Predicted Hölder exponent `1 - H/2`, defined for `H < 2`.
pub fn predicted_holder(h: f64) -> Option<f64> {
    (h < 2.0).then(|| (1.0 - h / 2.0).clamp(f64::MIN_POSITIVE, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GrowthKind {
    /// `|p| / Re p <= C1 / (1 - r)^α`
    Est1,
    /// `Re p >= C2 (1 - r)^α`
    Est2,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthConfig {
    pub n_rays: usize,
    pub n_radii: usize,
    pub r_min: f64,
    pub r_max: f64,
    /// Largest tolerated log-scale violation of the fitted bound.
    pub residual_slack: f64,
}

impl Default for GrowthConfig {
    fn default() -> Self {
        Self { n_rays: 256, n_radii: 40, r_min: 0.9, r_max: 0.9999, residual_slack: 0.1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthFit {
    pub kind: GrowthKind,
    pub c: f64,
    pub alpha: f64,
    pub residual: f64,
    pub satisfied: bool,
    pub r_squared: f64,
}

/// Maximum over the circle `|z| = r` of `f(θ)`: equispaced angles, then
/// golden-section polish of the three best.
pub fn circle_max<F>(f: F, n: usize) -> (f64, f64)
where
    F: Fn(f64) -> f64 + Sync,
{
    let n = n.max(8);
    let step = TAU / n as f64;
    let mut vals: Vec<(f64, usize)> = (0..n).map(|j| (f(step * j as f64), j)).collect();
    vals.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let mut best = (step * vals[0].1 as f64, vals[0].0);
    for &(_, j) in &vals[..3] {
        let c = step * j as f64;
        let (x, v) = golden_max(&f, c - step, c + step, GOLDEN_ITERS);
        if v > best.1 {
            best = (x, v);
        }
    }
    best
}

/// Fits the requested growth condition along rays at time `t`.
pub fn fit_growth(term: &DrivingTerm, which: GrowthKind, t: f64, cfg: GrowthConfig) -> Result<GrowthFit> {
    if !(cfg.r_min > 0.0 && cfg.r_min < cfg.r_max && cfg.r_max <= 1.0 - MIN_GAP && cfg.n_radii >= 3) {
        return Err(Error::Parameter(format!("invalid growth window {cfg:?}")));
    }
    let (g0, g1) = ((1.0 - cfg.r_min).ln(), (1.0 - cfg.r_max).ln());
    let radii: Vec<f64> = (0..cfg.n_radii)
        .map(|i| 1.0 - (g0 + (g1 - g0) * i as f64 / (cfg.n_radii - 1) as f64).exp())
        .collect();
    let quantity = |p: Complex64| match which {
        GrowthKind::Est1 => p.norm() / p.re,
        GrowthKind::Est2 => -p.re,
    };
    let shells: Vec<Result<f64>> = radii
        .par_iter()
        .map(|&r| {
            // reject the whole shell if Re p vanishes anywhere on its grid
            for j in 0..cfg.n_rays {
                let z = Complex64::from_polar(r, TAU * j as f64 / cfg.n_rays as f64);
                let p = term.evaluate(z, t)?;
                if !(p.re > 0.0) {
                    return Err(Error::NotPositive { z, t, re: p.re });
                }
            }
            let f = |th: f64| match term.evaluate(Complex64::from_polar(r, th), t) {
                Ok(p) if p.re > 0.0 => quantity(p),
                _ => f64::NEG_INFINITY,
            };
            Ok(circle_max(f, cfg.n_rays).1)
        })
        .collect();
    let mut x = Vec::with_capacity(radii.len());
    let mut y = Vec::with_capacity(radii.len());
    for (r, q) in radii.iter().zip(shells) {
        let q = q?;
        let value = match which {
            GrowthKind::Est1 => q,
            GrowthKind::Est2 => -q,
        };
        x.push((1.0 - r).ln());
        y.push(value.ln());
    }
    let line = fit_line(&x, &y)?;
    let (alpha, sign) = match which {
        GrowthKind::Est1 => (-line.slope, 1.0),
        GrowthKind::Est2 => (line.slope, -1.0),
    };
    let c = line.intercept.exp();
    let residual = x
        .iter()
        .zip(&y)
        .map(|(xi, yi)| sign * (yi - (line.intercept + line.slope * xi)))
        .fold(0.0f64, f64::max);
    Ok(GrowthFit {
        kind: which,
        c,
        alpha: alpha.max(0.0),
        residual,
        satisfied: residual <= cfg.residual_slack,
        r_squared: line.r_squared,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    HoldsOnGrid { extrema: BTreeMap<String, f64> },
    FailsAt { z: Option<Complex64>, t: f64, detail: String },
    NotApplicable { reason: String },
}

impl Verdict {
    pub fn holds(&self) -> bool {
        matches!(self, Verdict::HoldsOnGrid { .. })
    }

    pub fn label(&self) -> &'static str {
        match self {
            Verdict::HoldsOnGrid { .. } => "holds_on_grid",
            Verdict::FailsAt { .. } => "fails",
            Verdict::NotApplicable { .. } => "not_applicable",
        }
    }

    fn holding<const N: usize>(pairs: [(&str, f64); N]) -> Self {
        Verdict::HoldsOnGrid { extrema: pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect() }
    }
}

/// Hypothesis names used as keys of [`check_hypotheses`].
pub mod hypothesis {
    /// Growth conditions on `|p|/Re p` and `Re p`: the inverse map extends
    /// continuously to the boundary.
    pub const INVERSE_CONTINUITY: &str = "inverse_continuity";
    /// `H(p) < 2`: boundary Hölder continuity with exponent `1 - H/2`.
    pub const HOLDER_BOUNDARY: &str = "holder_boundary";
    /// `Re(z p') / (|z| Re p) = O((1 - r)^-α)`, `α < 1`: rectifiable,
    /// quasiconformal boundary.
    pub const RECTIFIABLE_QUASICONFORMAL: &str = "rectifiable_quasiconformal";
    /// `Re p >= k > 0`.
    pub const REAL_PART_LOWER_BOUND: &str = "real_part_lower_bound";
    /// `a < Re p < b`.
    pub const REAL_PART_STRIP: &str = "real_part_strip";
    /// `|Im p| / Re p < C`.
    pub const BOUNDED_ARGUMENT: &str = "bounded_argument";
    /// Point-kernel driver with `sqrt`-Hölder seminorm below 4.
    pub const DRIVER_QUASISLIT: &str = "driver_quasislit";

    pub const ALL: [&str; 7] = [
        INVERSE_CONTINUITY,
        HOLDER_BOUNDARY,
        RECTIFIABLE_QUASICONFORMAL,
        REAL_PART_LOWER_BOUND,
        REAL_PART_STRIP,
        BOUNDED_ARGUMENT,
        DRIVER_QUASISLIT,
    ];
}

/// Seminorm bound below which a driver produces quasislits.
pub const QUASISLIT_BOUND: f64 = 4.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsConfig {
    /// Times at which the term is examined.
    pub times: Vec<f64>,
    pub h_grid: HGrid,
    pub growth: GrowthConfig,
    /// Relative slack on `H` when comparing with 2.
    pub h_slack: f64,
    /// Slack on fitted exponents compared with 1.
    pub alpha_slack: f64,
    /// A shell extremum may drift by this factor between `1 - 1e-4` and
    /// `1 - 1e-6` and still count as bounded.
    pub stability: f64,
    pub n_theta: usize,
    /// Horizon over which a driver is sampled.
    pub horizon: f64,
    pub driver_samples: usize,
    pub driver_window: f64,
}

impl Default for DiagnosticsConfig {
    fn default() -> Self {
        Self {
            times: vec![0.0],
            h_grid: HGrid::default(),
            growth: GrowthConfig::default(),
            h_slack: 0.02,
            alpha_slack: 0.05,
            stability: 1.01,
            n_theta: 256,
            horizon: 1.0,
            driver_samples: 2001,
            driver_window: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    pub term: String,
    pub h: HEstimate,
    pub est1: GrowthFit,
    pub est2: GrowthFit,
    pub predicted_holder: Option<f64>,
    pub hypotheses: BTreeMap<String, Verdict>,
    pub driver_sqrt_norm: Option<f64>,
}

impl DiagnosticsReport {
    /// Flat `key = value` pairs in a stable order.
    pub fn key_values(&self) -> Vec<(String, String)> {
        let mut out = vec![
            ("term".to_string(), self.term.clone()),
            ("h".into(), fmt_f(self.h.value)),
            ("h_converged".into(), self.h.converged.to_string()),
            ("h_argmax_re".into(), fmt_f(self.h.argmax.re)),
            ("h_argmax_im".into(), fmt_f(self.h.argmax.im)),
        ];
        for fit in [&self.est1, &self.est2] {
            let tag = match fit.kind {
                GrowthKind::Est1 => "est1",
                GrowthKind::Est2 => "est2",
            };
            out.push((format!("{tag}_c"), fmt_f(fit.c)));
            out.push((format!("{tag}_alpha"), fmt_f(fit.alpha)));
            out.push((format!("{tag}_residual"), fmt_f(fit.residual)));
            out.push((format!("{tag}_satisfied"), fit.satisfied.to_string()));
        }
        out.push((
            "predicted_holder".into(),
            self.predicted_holder.map_or_else(|| "undefined".into(), fmt_f),
        ));
        out.push((
            "driver_sqrt_norm".into(),
            self.driver_sqrt_norm.map_or_else(|| "undefined".into(), fmt_f),
        ));
        for (name, verdict) in &self.hypotheses {
            out.push((format!("hypothesis.{name}"), verdict.label().into()));
            match verdict {
                Verdict::HoldsOnGrid { extrema } => {
                    for (k, v) in extrema {
                        out.push((format!("hypothesis.{name}.{k}"), fmt_f(*v)));
                    }
                }
                Verdict::FailsAt { z, t, detail } => {
                    if let Some(z) = z {
                        out.push((format!("hypothesis.{name}.z"), format!("{} {}", fmt_f(z.re), fmt_f(z.im))));
                    }
                    out.push((format!("hypothesis.{name}.t"), fmt_f(*t)));
                    out.push((format!("hypothesis.{name}.detail"), detail.clone()));
                }
                Verdict::NotApplicable { reason } => {
                    out.push((format!("hypothesis.{name}.reason"), reason.clone()));
                }
            }
        }
        out
    }
}

pub(crate) fn fmt_f(v: f64) -> String {
    format!("{v:.12e}")
}

/// Estimates everything in one report. `H` and the growth fits are taken
/// at the first configured time.
pub fn diagnose(term: &DrivingTerm, cfg: &DiagnosticsConfig) -> Result<DiagnosticsReport> {
    let t0 = cfg.times.first().copied().unwrap_or(0.0);
    let h = estimate_h(term, t0, cfg.h_grid)?;
    let est1 = fit_growth(term, GrowthKind::Est1, t0, cfg.growth)?;
    let est2 = fit_growth(term, GrowthKind::Est2, t0, cfg.growth)?;
    let driver_sqrt_norm = term.driver().map(|d| {
        driver_sqrt_norm(&d.samples(cfg.horizon, cfg.driver_samples), cfg.driver_window).value
    });
    let hypotheses = verdicts(term, cfg, &h, &est1, &est2, driver_sqrt_norm)?;
    Ok(DiagnosticsReport {
        term: term.to_string(),
        predicted_holder: predicted_holder(h.value),
        h,
        est1,
        est2,
        hypotheses,
        driver_sqrt_norm,
    })
}

/// Hypothesis verdicts only; runs the same estimates as [`diagnose`].
pub fn check_hypotheses(term: &DrivingTerm, cfg: &DiagnosticsConfig) -> Result<BTreeMap<String, Verdict>> {
    Ok(diagnose(term, cfg)?.hypotheses)
}

/// Extremum of `f(p)` on the circle `|z| = r` over all configured times,
/// with its location.
fn shell_extreme<F>(term: &DrivingTerm, r: f64, times: &[f64], n: usize, f: F) -> (f64, Complex64, f64)
where
    F: Fn(Complex64) -> f64 + Sync,
{
    let mut best = (f64::NEG_INFINITY, Complex64::new(r, 0.0), 0.0);
    for &t in times {
        let g = |th: f64| term.evaluate(Complex64::from_polar(r, th), t).map(&f).unwrap_or(f64::NEG_INFINITY);
        let (th, v) = circle_max(g, n);
        if v > best.0 {
            best = (v, Complex64::from_polar(r, th), t);
        }
    }
    best
}

const INNER_SHELL: f64 = 1.0 - 1e-4;
const OUTER_SHELL: f64 = 1.0 - MIN_GAP;

struct ShellPair {
    inner: f64,
    outer: f64,
    at: Complex64,
    t: f64,
}

fn shells<F>(term: &DrivingTerm, cfg: &DiagnosticsConfig, f: F) -> ShellPair
where
    F: Fn(Complex64) -> f64 + Sync + Copy,
{
    let (inner, _, _) = shell_extreme(term, INNER_SHELL, &cfg.times, cfg.n_theta, f);
    let (outer, at, t) = shell_extreme(term, OUTER_SHELL, &cfg.times, cfg.n_theta, f);
    ShellPair { inner, outer, at, t }
}

fn verdicts(
    term: &DrivingTerm,
    cfg: &DiagnosticsConfig,
    h: &HEstimate,
    est1: &GrowthFit,
    est2: &GrowthFit,
    driver_norm: Option<f64>,
) -> Result<BTreeMap<String, Verdict>> {
    use hypothesis::*;
    let times = if cfg.times.is_empty() { vec![0.0] } else { cfg.times.clone() };
    let cfg = &DiagnosticsConfig { times: times.clone(), ..cfg.clone() };
    let t0 = times[0];
    let mut out = BTreeMap::new();

    // Both bounds stay true when α grows, so a common exponent is the larger one.
    let alpha = est1.alpha.max(est2.alpha);
    let v = if est1.satisfied && est2.satisfied && alpha < 1.0 - cfg.alpha_slack {
        Verdict::holding([("alpha", alpha), ("c1", est1.c), ("c2", est2.c)])
    } else {
        Verdict::FailsAt {
            z: None,
            t: t0,
            detail: format!(
                "est1 alpha={:.4} residual={:.3e}, est2 alpha={:.4} residual={:.3e}",
                est1.alpha, est1.residual, est2.alpha, est2.residual
            ),
        }
    };
    out.insert(INVERSE_CONTINUITY.to_string(), v);

    let v = if h.value * (1.0 + cfg.h_slack) < 2.0 {
        Verdict::holding([("h", h.value), ("k", h.value / 2.0)])
    } else {
        Verdict::FailsAt { z: Some(h.argmax), t: t0, detail: format!("H estimate {:.6} is not below 2", h.value) }
    };
    out.insert(HOLDER_BOUNDARY.to_string(), v);

    out.insert(RECTIFIABLE_QUASICONFORMAL.to_string(), rectifiability_verdict(term, cfg, t0)?);

    // Re p bounded below: the shell minimum must not keep dropping.
    let neg_re = |p: Complex64| -p.re;
    let low = shells(term, cfg, neg_re);
    let (min_inner, min_outer) = (-low.inner, -low.outer);
    let lower_ok = min_outer > 0.0 && min_outer * cfg.stability >= min_inner;
    let lower_fail = || Verdict::FailsAt {
        z: Some(low.at),
        t: low.t,
        detail: format!("min Re p drops from {min_inner:.6e} to {min_outer:.6e} towards the circle"),
    };
    out.insert(
        REAL_PART_LOWER_BOUND.to_string(),
        if lower_ok { Verdict::holding([("min_re_p", min_outer)]) } else { lower_fail() },
    );

    let high = shells(term, cfg, |p: Complex64| p.re);
    let upper_ok = high.outer <= cfg.stability * high.inner;
    let v = if !upper_ok {
        Verdict::FailsAt {
            z: Some(high.at),
            t: high.t,
            detail: format!("max Re p grows from {:.6e} to {:.6e} towards the circle", high.inner, high.outer),
        }
    } else if !lower_ok {
        lower_fail()
    } else {
        Verdict::holding([("min_re_p", min_outer), ("max_re_p", high.outer)])
    };
    out.insert(REAL_PART_STRIP.to_string(), v);

    let arg = shells(term, cfg, |p: Complex64| p.im.abs() / p.re);
    let v = if arg.outer <= cfg.stability * arg.inner {
        Verdict::holding([("max_arg_ratio", arg.outer.max(arg.inner))])
    } else {
        Verdict::FailsAt {
            z: Some(arg.at),
            t: arg.t,
            detail: format!("|Im p|/Re p grows from {:.6e} to {:.6e} towards the circle", arg.inner, arg.outer),
        }
    };
    out.insert(BOUNDED_ARGUMENT.to_string(), v);

    let v = match driver_norm {
        None => Verdict::NotApplicable { reason: format!("{} has no point-kernel driver", term.family_name()) },
        Some(n) if n < QUASISLIT_BOUND => Verdict::holding([("driver_sqrt_norm", n)]),
        Some(n) => Verdict::FailsAt {
            z: None,
            t: t0,
            detail: format!("driver seminorm {n:.6} is not below {QUASISLIT_BOUND}"),
        },
    };
    out.insert(DRIVER_QUASISLIT.to_string(), v);
    Ok(out)
}

/// Exponent of the growth of `max_{|z|=r} Re(z p') / (|z| Re p)` as r -> 1.
pub fn rectifiability_growth_exponent(term: &DrivingTerm, t: f64, cfg: GrowthConfig) -> Result<(f64, Complex64)> {
    let (g0, g1) = ((1.0 - cfg.r_min).ln(), (1.0 - cfg.r_max).ln());
    let rows: Vec<(f64, f64, Complex64)> = (0..cfg.n_radii)
        .into_par_iter()
        .map(|i| {
            let r = 1.0 - (g0 + (g1 - g0) * i as f64 / (cfg.n_radii - 1) as f64).exp();
            let f = |th: f64| {
                let z = Complex64::from_polar(r, th);
                match term.evaluate_with_derivative(z, t) {
                    Ok((p, dp)) if p.re > 0.0 => (z * dp).re / (r * p.re),
                    _ => f64::NEG_INFINITY,
                }
            };
            let (th, v) = circle_max(f, cfg.n_rays);
            (r, v, Complex64::from_polar(r, th))
        })
        .collect();
    // a quantity that never becomes positive does not grow
    if rows.iter().all(|(_, v, _)| *v <= 1e-300) {
        return Ok((0.0, rows[rows.len() - 1].2));
    }
    let floor = rows.iter().map(|r| r.1).fold(0.0f64, f64::max) * 1e-12;
    let x: Vec<f64> = rows.iter().map(|(r, _, _)| (1.0 - r).ln()).collect();
    let y: Vec<f64> = rows.iter().map(|(_, v, _)| v.max(floor).ln()).collect();
    let line = fit_line(&x, &y)?;
    Ok((-line.slope, rows[rows.len() - 1].2))
}

fn rectifiability_verdict(term: &DrivingTerm, cfg: &DiagnosticsConfig, t0: f64) -> Result<Verdict> {
    let mut worst = (f64::NEG_INFINITY, Complex64::new(0.0, 0.0), t0);
    for &t in &cfg.times {
        let (e, z) = rectifiability_growth_exponent(term, t, cfg.growth)?;
        if e > worst.0 {
            worst = (e, z, t);
        }
    }
    let (exponent, z, t) = worst;
    Ok(if exponent < 1.0 - cfg.alpha_slack {
        Verdict::holding([("growth_exponent", exponent.max(0.0))])
    } else {
        Verdict::FailsAt {
            z: Some(z),
            t,
            detail: format!("Re(z p')/(|z| Re p) grows like (1-r)^-{exponent:.4}"),
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SqrtNorm {
    pub value: f64,
    /// No sample pair was closer than the window.
    pub empty_window: bool,
}

/// `max |u(t) - u(s)| / sqrt|t - s|` over sample pairs with
/// `0 < |t - s| < window`. Samples must be sorted by time.
pub fn driver_sqrt_norm(samples: &[(f64, f64)], window: f64) -> SqrtNorm {
    let mut best = 0.0f64;
    let mut any = false;
    for (i, &(t, u)) in samples.iter().enumerate() {
        for &(s, v) in &samples[i + 1..] {
            let dt = s - t;
            if dt >= window {
                break;
            }
            if dt > 0.0 {
                any = true;
                best = best.max((v - u).abs() / dt.sqrt());
            }
        }
    }
    if !any {
        log::warn!("no sample pair closer than the window {window}");
    }
    SqrtNorm { value: best, empty_window: !any }
}
