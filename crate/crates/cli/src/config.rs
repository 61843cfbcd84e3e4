//! Experiment files (TOML). Every table rejects unknown keys, and
//! [`ExperimentConfig::validate`] builds everything that can fail before any
//! computation starts.

use std::path::PathBuf;

use loewner::apps::CoupledState;
use loewner::boundary::DEFAULT_TRACE_RADIUS;
use loewner::diagnostics::hypothesis;
use loewner::driving::{herglotz_from_samples, Atom, Driver, DrivingTerm, SelfMap, SpectralMeasure};
use loewner::flow::{FlowDirection, FlowField, Tolerances};
use loewner::Complex64;
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub name: Option<String>,
    pub term: TermSpec,
    #[serde(default)]
    pub flow: FlowSpec,
    #[serde(default)]
    pub analyses: Analyses,
    #[serde(default)]
    pub output: OutputSpec,
}

/// A driving term. Gain, time shift and normalisation are wrappers around a
/// `base` term.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum TermSpec {
    Constant {
        re: f64,
        #[serde(default)]
        im: f64,
    },
    HalfPlane {
        k: f64,
    },
    Strip {
        a: f64,
        b: f64,
    },
    /// Give either the aperture constant `c` or the exponent `alpha`.
    Sector {
        #[serde(default)]
        c: Option<f64>,
        #[serde(default)]
        alpha: Option<f64>,
    },
    PointKernel {
        driver: DriverSpec,
    },
    /// Give either `atoms` as `[angle, weight]` pairs (rescaled to unit mass)
    /// or density `samples` at the midpoint angles.
    Measure {
        #[serde(default)]
        atoms: Option<Vec<[f64; 2]>>,
        #[serde(default)]
        samples: Option<Vec<f64>>,
    },
    Composed {
        base: Box<TermSpec>,
        map: SelfMap,
    },
    Schedule {
        pieces: Vec<PieceSpec>,
    },
    Scaled {
        gain: f64,
        base: Box<TermSpec>,
    },
    Shifted {
        offset: f64,
        base: Box<TermSpec>,
    },
    Normalized {
        base: Box<TermSpec>,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PieceSpec {
    pub start: f64,
    pub term: TermSpec,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DriverSpec {
    Constant { angle: f64 },
    Linear { start: f64, rate: f64 },
    SqrtTime { scale: f64 },
    Sampled { times: Vec<f64>, values: Vec<f64> },
    Brownian { kappa: f64, step: f64, duration: f64, seed: u64 },
}

impl DriverSpec {
    pub fn build(&self) -> loewner::Result<Driver> {
        Ok(match self {
            DriverSpec::Constant { angle } => Driver::Constant { angle: *angle },
            DriverSpec::Linear { start, rate } => Driver::Linear { start: *start, rate: *rate },
            DriverSpec::SqrtTime { scale } => Driver::SqrtTime { scale: *scale },
            DriverSpec::Sampled { times, values } => Driver::Sampled { times: times.clone(), values: values.clone() },
            DriverSpec::Brownian { kappa, step, duration, seed } => Driver::brownian(*kappa, *step, *duration, *seed)?,
        })
    }
}

impl TermSpec {
    pub fn build(&self) -> loewner::Result<DrivingTerm> {
        use loewner::Error::Parameter;
        match self {
            TermSpec::Constant { re, im } => DrivingTerm::constant(Complex64::new(*re, *im)),
            TermSpec::HalfPlane { k } => DrivingTerm::half_plane(*k),
            TermSpec::Strip { a, b } => DrivingTerm::strip(*a, *b),
            TermSpec::Sector { c: Some(c), alpha: None } => DrivingTerm::sector(*c),
            TermSpec::Sector { c: None, alpha: Some(a) } => DrivingTerm::sector_with_alpha(*a),
            TermSpec::Sector { .. } => Err(Parameter("sector needs exactly one of `c` and `alpha`".into())),
            TermSpec::PointKernel { driver } => DrivingTerm::point_kernel(driver.build()?),
            TermSpec::Measure { atoms: Some(atoms), samples: None } => {
                let atoms = atoms.iter().map(|[angle, weight]| Atom { angle: *angle, weight: *weight }).collect();
                Ok(DrivingTerm::measure(SpectralMeasure::from_weights(atoms)?))
            }
            TermSpec::Measure { atoms: None, samples: Some(s) } => {
                Ok(DrivingTerm::measure(herglotz_from_samples(s)?))
            }
            TermSpec::Measure { .. } => Err(Parameter("measure needs exactly one of `atoms` and `samples`".into())),
            TermSpec::Composed { base, map } => DrivingTerm::composed(base.build()?, map.clone()),
            TermSpec::Schedule { pieces } => {
                let pieces = pieces.iter().map(|p| Ok((p.start, p.term.build()?))).collect::<loewner::Result<_>>()?;
                DrivingTerm::schedule(pieces)
            }
            TermSpec::Scaled { gain, base } => base.build()?.scaled(*gain),
            TermSpec::Shifted { offset, base } => Ok(base.build()?.shifted(*offset)),
            TermSpec::Normalized { base } => Ok(base.build()?.normalized()),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FlowSpec {
    pub direction: FlowDirection,
    pub horizon: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub boundary_tol: f64,
    /// `[re, im]` seeds for the trajectory analysis.
    pub seeds: Vec<[f64; 2]>,
}

impl Default for FlowSpec {
    fn default() -> Self {
        let t = Tolerances::default();
        Self {
            direction: FlowDirection::Forward,
            horizon: 1.0,
            rel_tol: t.rel,
            abs_tol: t.abs,
            boundary_tol: t.boundary,
            seeds: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Analyses {
    pub diagnostics: Option<DiagnosticsSpec>,
    pub trajectories: Option<TrajectoriesSpec>,
    pub boundary: Option<CurveSpec>,
    pub holder: Option<HolderSpec>,
    pub qc: Option<QcSpec>,
    pub rectifiability: Option<RectifiabilitySpec>,
    pub jordan: Option<CurveSpec>,
    pub inverse: Option<InverseSpec>,
    pub split: Option<SplitSpec>,
    pub hele_shaw: Option<HeleShawSpec>,
    pub dla: Option<DlaSpec>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DiagnosticsSpec {
    pub time: f64,
    /// Hypotheses that must hold; a failing one sets exit code 4.
    pub assert: Vec<String>,
}

impl Default for DiagnosticsSpec {
    fn default() -> Self {
        Self { time: 0.0, assert: Vec::new() }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectoriesSpec {}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CurveSpec {
    pub points: usize,
    pub radius: f64,
}

impl Default for CurveSpec {
    fn default() -> Self {
        Self { points: 1024, radius: DEFAULT_TRACE_RADIUS }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HolderSpec {
    pub min_gap: f64,
    pub max_gap: f64,
    pub n_radii: usize,
    pub n_rays: usize,
    pub trace_points: usize,
    pub trace_radius: f64,
}

impl Default for HolderSpec {
    fn default() -> Self {
        let c = loewner::boundary::HolderConfig::default();
        Self {
            min_gap: c.min_gap,
            max_gap: c.max_gap,
            n_radii: c.n_radii,
            n_rays: c.n_rays,
            trace_points: c.trace_points,
            trace_radius: c.trace_radius,
        }
    }
}

impl HolderSpec {
    pub fn to_config(&self) -> loewner::boundary::HolderConfig {
        loewner::boundary::HolderConfig {
            min_gap: self.min_gap,
            max_gap: self.max_gap,
            n_radii: self.n_radii,
            n_rays: self.n_rays,
            trace_points: self.trace_points,
            trace_radius: self.trace_radius,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QcSpec {
    /// Resolution of the curve at the horizon for the full-curve ratio.
    pub points: usize,
    pub radius: f64,
}

impl Default for QcSpec {
    fn default() -> Self {
        Self { points: 1024, radius: DEFAULT_TRACE_RADIUS }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RectifiabilitySpec {
    pub radius: f64,
}

impl Default for RectifiabilitySpec {
    fn default() -> Self {
        Self { radius: DEFAULT_TRACE_RADIUS }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InverseSpec {
    pub points: usize,
    pub radius: f64,
    /// Explicit δ values; otherwise `count` log-spaced defaults.
    pub deltas: Option<Vec<f64>>,
    pub count: usize,
    /// Exponent of the fitted `C δ^β`; by default `1 - α` from the
    /// `|p|/Re p` growth fit.
    pub exponent: Option<f64>,
}

impl Default for InverseSpec {
    fn default() -> Self {
        Self { points: 1024, radius: DEFAULT_TRACE_RADIUS, deltas: None, count: 16, exponent: None }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitSpec {
    pub n: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HeleShawSpec {
    pub steps: usize,
    pub dt: f64,
    pub radius: f64,
    pub points: usize,
    /// `[re, im]` coefficients of the initial polynomial map; identity if empty.
    pub initial: Vec<[f64; 2]>,
    /// Write a state snapshot every this many steps (0: none).
    pub snapshot_every: usize,
    /// Also measure the local splitting error at `dt` and `dt/2`.
    pub step_halving: bool,
}

impl Default for HeleShawSpec {
    fn default() -> Self {
        Self {
            steps: 10,
            dt: 0.01,
            radius: 0.5,
            points: 256,
            initial: Vec::new(),
            snapshot_every: 1,
            step_halving: false,
        }
    }
}

impl HeleShawSpec {
    pub fn initial_state(&self) -> loewner::Result<CoupledState> {
        if self.initial.is_empty() {
            CoupledState::circle(self.radius, self.points)
        } else {
            let c = self.initial.iter().map(|[re, im]| Complex64::new(*re, *im)).collect();
            CoupledState::from_polynomial(c, self.radius, self.points)
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DlaSpec {
    pub delta: f64,
    #[serde(default = "DlaSpec::default_angles")]
    pub angles: usize,
    #[serde(default = "DlaSpec::default_points")]
    pub points: usize,
    #[serde(default = "DlaSpec::default_radius")]
    pub radius: f64,
}

impl DlaSpec {
    fn default_angles() -> usize {
        64
    }
    fn default_points() -> usize {
        512
    }
    fn default_radius() -> f64 {
        DEFAULT_TRACE_RADIUS
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSpec {
    pub dir: PathBuf,
    pub formats: Vec<Format>,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self { dir: PathBuf::from("out"), formats: vec![Format::Text] }
    }
}

/// A config that passed validation, with the term and field built.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub term: DrivingTerm,
    pub field: FlowField,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn validate(self) -> Result<Experiment, CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        let term = self.term.build().map_err(|e| CliError::Config(format!("term: {e}")))?;
        let f = &self.flow;
        let tol = Tolerances { rel: f.rel_tol, abs: f.abs_tol, boundary: f.boundary_tol };
        let field = FlowField::with_tolerances(term.clone(), f.direction, f.horizon, tol)
            .map_err(|e| CliError::Config(format!("flow: {e}")))?;
        if self.output.formats.is_empty() {
            return bad("output.formats must not be empty".into());
        }
        let a = &self.analyses;
        let needs_forward = a.boundary.is_some()
            || a.holder.is_some()
            || a.qc.is_some()
            || a.rectifiability.is_some()
            || a.jordan.is_some()
            || a.inverse.is_some()
            || a.split.is_some()
            || a.dla.is_some();
        if needs_forward && f.direction != FlowDirection::Forward {
            return bad("boundary analyses need flow.direction = \"forward\"".into());
        }
        if a.trajectories.is_some() && f.seeds.is_empty() {
            return bad("analyses.trajectories needs flow.seeds".into());
        }
        for s in &f.seeds {
            if !(s[0].hypot(s[1]) < 1.0) {
                return bad(format!("seed {s:?} is outside the unit disc"));
            }
        }
        if let Some(d) = &a.diagnostics {
            for name in &d.assert {
                if !hypothesis::ALL.contains(&name.as_str()) {
                    return bad(format!("unknown hypothesis `{name}`; expected one of {:?}", hypothesis::ALL));
                }
            }
        }
        let curve_ok = |what: &str, points: usize, radius: f64| {
            if points < loewner::boundary::MIN_CURVE_POINTS || !(0.9..1.0 - 1e-6).contains(&radius) {
                Err(CliError::Config(format!(
                    "{what}: need points >= {} and radius in [0.9, 1 - 1e-6), got {points} and {radius}",
                    loewner::boundary::MIN_CURVE_POINTS
                )))
            } else {
                Ok(())
            }
        };
        if let Some(c) = &a.boundary {
            curve_ok("boundary", c.points, c.radius)?;
        }
        if let Some(c) = &a.jordan {
            curve_ok("jordan", c.points, c.radius)?;
        }
        if let Some(c) = &a.qc {
            curve_ok("qc", c.points, c.radius)?;
        }
        if let Some(c) = &a.rectifiability {
            curve_ok("rectifiability", 1024, c.radius)?;
        }
        if let Some(h) = &a.holder {
            curve_ok("holder", h.trace_points, h.trace_radius)?;
            if !(h.min_gap > 0.0 && h.min_gap < h.max_gap && h.max_gap < 1.0 && h.n_radii >= 3 && h.n_rays >= 8) {
                return bad(format!("holder: invalid window {h:?}"));
            }
        }
        if let Some(i) = &a.inverse {
            curve_ok("inverse", i.points, i.radius)?;
            if let Some(d) = &i.deltas {
                if d.is_empty() || d.iter().any(|x| !(*x > 0.0)) {
                    return bad("inverse.deltas must be positive and non-empty".into());
                }
            } else if i.count < 2 {
                return bad("inverse.count must be at least 2".into());
            }
            if let Some(b) = i.exponent {
                if !(b > 0.0 && b <= 1.0) {
                    return bad(format!("inverse.exponent must lie in (0, 1], got {b}"));
                }
            }
        }
        if let Some(s) = &a.split {
            if s.n == 0 {
                return bad("split.n must be at least 1".into());
            }
        }
        if let Some(h) = &a.hele_shaw {
            if !(h.radius > 0.0 && h.radius < 1.0) || h.points < loewner::boundary::MIN_CURVE_POINTS {
                return bad(format!("hele_shaw: need radius in (0, 1) and points >= 16, got {h:?}"));
            }
            if !(h.dt >= 0.0 && h.dt.is_finite()) {
                return bad(format!("hele_shaw.dt must be non-negative, got {}", h.dt));
            }
            if h.step_halving && h.dt == 0.0 {
                return bad("hele_shaw.step_halving needs dt > 0".into());
            }
            h.initial_state().map_err(|e| CliError::Config(format!("hele_shaw.initial: {e}")))?;
        }
        if let Some(d) = &a.dla {
            curve_ok("dla", d.points, d.radius)?;
            if !(d.delta > 0.0) || d.angles == 0 {
                return bad(format!("dla: need delta > 0 and angles >= 1, got {d:?}"));
            }
        }
        Ok(Experiment { config: self, term, field })
    }
}
