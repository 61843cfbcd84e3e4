//! Executes the analyses of a validated experiment and writes the artifacts.

use std::fs;
use std::path::Path;

use loewner::apps::{carleson_makarov_density, hele_shaw_step, step_halving, CoupledConfig};
use loewner::boundary::{
    default_deltas, estimate_holder, inverse_modulus, jordan_check, map_point, quasiconformal_window,
    rectifiability, split_composition, three_point_ratio, trace_boundary,
};
use loewner::diagnostics::{diagnose, fit_growth, DiagnosticsConfig, GrowthConfig, GrowthKind};
use loewner::driving::midpoint_angle;
use loewner::flow::integrate_grid;
use loewner::geometry::first_self_intersection;
use loewner::Complex64;
use rayon::prelude::*;

use crate::config::{Experiment, Format};
use crate::output::{columns, curve_text, fmt_f, key_values, manifest, trajectory_text, write_atomic, Artifact, MANIFEST};
use crate::{CliError, RunSummary};

#[derive(Debug, Clone, PartialEq)]
pub enum Status {
    Ok,
    /// Asserted hypotheses that did not hold.
    HypothesisFailed(Vec<String>),
    Error(String),
}

impl Status {
    fn describe(&self) -> String {
        match self {
            Status::Ok => "ok".into(),
            Status::HypothesisFailed(h) => format!("hypothesis failed: {}", h.join(", ")),
            Status::Error(e) => format!("error: {e}"),
        }
    }
}

struct Outcome {
    artifacts: Vec<Artifact>,
    status: Status,
}

impl Outcome {
    fn ok(artifacts: Vec<Artifact>) -> Self {
        Self { artifacts, status: Status::Ok }
    }
}

type Job<'a> = (&'static str, Box<dyn Fn() -> loewner::Result<Outcome> + Send + Sync + 'a>);

/// Emits the text artifact and, if requested, the JSON one.
fn emit<T: serde::Serialize>(exp: &Experiment, stem: &str, text: String, json: &T) -> Vec<Artifact> {
    let mut out = Vec::new();
    let formats = &exp.config.output.formats;
    if formats.contains(&Format::Text) {
        out.push(Artifact::text(format!("{stem}.txt"), text));
    }
    if formats.contains(&Format::Json) {
        out.push(Artifact::json(format!("{stem}.json"), json));
    }
    out
}

fn jobs(exp: &Experiment) -> Vec<Job<'_>> {
    let a = &exp.config.analyses;
    let field = &exp.field;
    let time = exp.config.flow.horizon;
    let mut jobs: Vec<Job<'_>> = Vec::new();

    if let Some(spec) = &a.diagnostics {
        jobs.push((
            "diagnostics",
            Box::new(move || {
                let cfg = DiagnosticsConfig { times: vec![spec.time], horizon: time, ..Default::default() };
                let report = diagnose(&exp.term, &cfg)?;
                let failed: Vec<String> = spec
                    .assert
                    .iter()
                    .filter(|name| !report.hypotheses.get(name.as_str()).is_some_and(|v| v.holds()))
                    .cloned()
                    .collect();
                let artifacts = emit(exp, "diagnostics", key_values(&report.key_values()), &report);
                let status = if failed.is_empty() { Status::Ok } else { Status::HypothesisFailed(failed) };
                Ok(Outcome { artifacts, status })
            }),
        ));
    }
    if a.trajectories.is_some() {
        jobs.push((
            "trajectories",
            Box::new(move || {
                let seeds: Vec<Complex64> =
                    exp.config.flow.seeds.iter().map(|s| Complex64::new(s[0], s[1])).collect();
                let trs = integrate_grid(field, &seeds).into_iter().collect::<loewner::Result<Vec<_>>>()?;
                let mut out = Vec::new();
                if exp.config.output.formats.contains(&Format::Text) {
                    for (i, tr) in trs.iter().enumerate() {
                        out.push(Artifact::text(format!("trajectory_{i:03}.txt"), trajectory_text(tr)));
                    }
                }
                if exp.config.output.formats.contains(&Format::Json) {
                    out.push(Artifact::json("trajectories.json", &trs));
                }
                Ok(Outcome::ok(out))
            }),
        ));
    }
    if let Some(spec) = &a.boundary {
        jobs.push((
            "boundary",
            Box::new(move || {
                let curve = trace_boundary(field, time, spec.radius, spec.points)?;
                Ok(Outcome::ok(emit(exp, "boundary", curve_text(&curve), &curve)))
            }),
        ));
    }
    if let Some(spec) = &a.holder {
        jobs.push((
            "holder",
            Box::new(move || {
                let h = estimate_holder(field, time, spec.to_config())?;
                let kv = vec![
                    ("exponent", fmt_f(h.exponent)),
                    ("constant", fmt_f(h.constant)),
                    ("derivative_slope", fmt_f(h.derivative_slope)),
                    ("pairwise_exponent", h.pairwise_exponent.map_or("none".into(), fmt_f)),
                    ("disagreement", h.disagreement.to_string()),
                    ("insufficient_range", h.insufficient_range.to_string()),
                    ("radii_used", h.radii_used.to_string()),
                ];
                Ok(Outcome::ok(emit(exp, "holder", key_values(&kv), &h)))
            }),
        ));
    }
    if let Some(spec) = &a.qc {
        jobs.push((
            "qc",
            Box::new(move || {
                let w = quasiconformal_window(field, time)?;
                let curve = trace_boundary(field, time, spec.radius, spec.points)?;
                let full = three_point_ratio(&curve)?;
                let mut kv = vec![
                    ("t0".to_string(), fmt_f(w.t0)),
                    ("pieces".into(), w.pieces.to_string()),
                    ("pieces_checked".into(), w.checked.len().to_string()),
                    ("window_passed".into(), w.all_passed().to_string()),
                    ("three_point_ratio".into(), fmt_f(w.three_point.ratio)),
                    ("bounded_turning".into(), fmt_f(w.three_point.bounded_turning)),
                    ("three_point_bound".into(), fmt_f(5.0 / 3.0)),
                    ("curve_three_point_ratio".into(), fmt_f(full.ratio)),
                    ("curve_bounded_turning".into(), fmt_f(full.bounded_turning)),
                ];
                for (i, d, c) in &w.checked {
                    kv.push((
                        format!("piece.{i}"),
                        format!("{} {}/{} {} {}", fmt_f(*d), c.passed, c.pairs, fmt_f(c.min_ratio), fmt_f(c.max_ratio)),
                    ));
                }
                #[derive(serde::Serialize)]
                struct Qc<'a> {
                    window: &'a loewner::boundary::QcWindow,
                    curve: loewner::boundary::ThreePoint,
                }
                Ok(Outcome::ok(emit(exp, "qc", key_values(&kv), &Qc { window: &w, curve: full })))
            }),
        ));
    }
    if let Some(spec) = &a.rectifiability {
        jobs.push((
            "rectifiability",
            Box::new(move || {
                let r = rectifiability(field, time, spec.radius)?;
                let mut kv: Vec<(String, String)> =
                    r.lengths.iter().map(|(n, l)| (format!("length.{n}"), fmt_f(*l))).collect();
                kv.push(("length".into(), fmt_f(r.length)));
                kv.push(("converged".into(), r.converged.to_string()));
                Ok(Outcome::ok(emit(exp, "rectifiability", key_values(&kv), &r)))
            }),
        ));
    }
    if let Some(spec) = &a.jordan {
        jobs.push((
            "jordan",
            Box::new(move || {
                let curve = trace_boundary(field, time, spec.radius, spec.points)?;
                let jordan = jordan_check(&curve);
                let hit = first_self_intersection(&curve.points);
                let kv = vec![
                    ("jordan", jordan.to_string()),
                    ("points", spec.points.to_string()),
                    ("radius", fmt_f(spec.radius)),
                    ("first_intersection", hit.map_or("none".into(), |(i, j)| format!("{i} {j}"))),
                ];
                #[derive(serde::Serialize)]
                struct Jordan {
                    jordan: bool,
                    first_intersection: Option<(usize, usize)>,
                }
                Ok(Outcome::ok(emit(exp, "jordan", key_values(&kv), &Jordan { jordan, first_intersection: hit })))
            }),
        ));
    }
    if let Some(spec) = &a.inverse {
        jobs.push((
            "inverse",
            Box::new(move || {
                let curve = trace_boundary(field, time, spec.radius, spec.points)?;
                let deltas = spec.deltas.clone().unwrap_or_else(|| default_deltas(&curve, spec.count));
                let m = inverse_modulus(&curve, &deltas);
                let (alpha, beta) = match spec.exponent {
                    Some(b) => (None, b),
                    None => {
                        let fit = fit_growth(&exp.term, GrowthKind::Est1, 0.0, GrowthConfig::default())?;
                        (Some(fit.alpha), 1.0 - fit.alpha)
                    }
                };
                let fit = if beta > 0.0 { m.fit_with_exponent(beta) } else { None };
                let kv = vec![
                    ("alpha_fit", alpha.map_or("none".into(), fmt_f)),
                    ("exponent", fmt_f(beta)),
                    ("monotone", m.is_monotone().to_string()),
                    ("constant", fit.map_or("none".into(), |f| fmt_f(f.0))),
                    ("residual", fit.map_or("none".into(), |f| fmt_f(f.1))),
                ];
                let mut out = emit(exp, "inverse", key_values(&kv), &m);
                if exp.config.output.formats.contains(&Format::Text) {
                    let rows = m.deltas.iter().zip(&m.moduli).map(|(d, v)| vec![*d, *v]);
                    out.push(Artifact::text("inverse_modulus.txt", columns(&["delta", "modulus"], rows)));
                }
                Ok(Outcome::ok(out))
            }),
        ));
    }
    if let Some(spec) = &a.split {
        jobs.push((
            "split",
            Box::new(move || {
                let s = split_composition(field, time, spec.n)?;
                let mut kv = vec![
                    ("n".to_string(), spec.n.to_string()),
                    ("max_deviation".into(), fmt_f(s.max_deviation)),
                    ("tolerance".into(), fmt_f(s.tolerance)),
                    ("passed".into(), (s.max_deviation <= s.tolerance).to_string()),
                ];
                for (i, d) in s.piece_distortion.iter().enumerate() {
                    kv.push((format!("distortion.{i}"), fmt_f(*d)));
                }
                #[derive(serde::Serialize)]
                struct Split<'a> {
                    n: usize,
                    max_deviation: f64,
                    tolerance: f64,
                    piece_distortion: &'a [f64],
                    window: &'a Option<Vec<loewner::boundary::WindowCheck>>,
                }
                let json = Split {
                    n: spec.n,
                    max_deviation: s.max_deviation,
                    tolerance: s.tolerance,
                    piece_distortion: &s.piece_distortion,
                    window: &s.window,
                };
                Ok(Outcome::ok(emit(exp, "split", key_values(&kv), &json)))
            }),
        ));
    }
    if let Some(spec) = &a.hele_shaw {
        jobs.push(("hele_shaw", Box::new(move || hele_shaw(exp, spec))));
    }
    if let Some(spec) = &a.dla {
        jobs.push((
            "dla",
            Box::new(move || {
                let curve = trace_boundary(field, time, spec.radius, spec.points)?;
                let angles: Vec<f64> = (0..spec.angles).map(|j| midpoint_angle(j, spec.angles)).collect();
                let r = spec.radius;
                let map = |z: Complex64| map_point(field, time, r * z).map(|s| s.w);
                let d = carleson_makarov_density(map, &curve.points, &angles, spec.delta)?;
                let mut text = format!("# delta = {}\n# flagged = {}\n", fmt_f(d.delta), d.flagged_count());
                let rows = (0..angles.len()).map(|j| vec![d.angles[j], d.xi[j], f64::from(u8::from(d.flagged[j]))]);
                text.push_str(&columns(&["theta", "xi", "flagged"], rows));
                Ok(Outcome::ok(emit(exp, "dla", text, &d)))
            }),
        ));
    }
    jobs
}

fn hele_shaw(exp: &Experiment, spec: &crate::config::HeleShawSpec) -> loewner::Result<Outcome> {
    let cfg = CoupledConfig::default();
    let text = exp.config.output.formats.contains(&Format::Text);
    let json = exp.config.output.formats.contains(&Format::Json);
    let mut state = spec.initial_state()?;
    let mut artifacts = Vec::new();
    let mut rows = Vec::new();
    let mut halted = None;
    let snapshot = |s: &loewner::apps::CoupledState, out: &mut Vec<Artifact>| {
        if text {
            let rows = s.boundary.points.iter().zip(&s.derivative_samples).map(|(w, (th, m))| {
                vec![*th, w.re, w.im, *m, 1.0 / (m * m)]
            });
            out.push(Artifact::text(
                format!("hele_shaw_snapshot_{:04}.txt", s.step),
                columns(&["theta", "re_w", "im_w", "abs_wz", "xi"], rows),
            ));
        }
        if json {
            out.push(Artifact::json(format!("hele_shaw_snapshot_{:04}.json", s.step), s));
        }
    };
    let row = |s: &loewner::apps::CoupledState| {
        vec![s.step as f64, s.time, s.timescale_accumulated, s.conformal_radius(), s.circularity_deviation(), s.area()]
    };
    if spec.snapshot_every > 0 {
        snapshot(&state, &mut artifacts);
    }
    rows.push(row(&state));
    for _ in 0..spec.steps {
        match hele_shaw_step(&state, spec.dt, &cfg) {
            Ok(next) => state = next,
            Err(e) => {
                halted = Some(e.to_string());
                break;
            }
        }
        rows.push(row(&state));
        if spec.snapshot_every > 0 && state.step % spec.snapshot_every == 0 {
            snapshot(&state, &mut artifacts);
        }
    }
    let mut kv = vec![
        ("steps_completed".to_string(), state.step.to_string()),
        ("halted".into(), halted.clone().unwrap_or_else(|| "no".into())),
        ("conformal_radius".into(), fmt_f(state.conformal_radius())),
        ("circularity_deviation".into(), fmt_f(state.circularity_deviation())),
        ("physical_time".into(), fmt_f(state.timescale_accumulated)),
    ];
    if spec.step_halving {
        let h = step_halving(&spec.initial_state()?, spec.dt, &cfg)?;
        kv.push(("splitting_error_dt".into(), fmt_f(h.coarse)));
        kv.push(("splitting_error_half_dt".into(), fmt_f(h.fine)));
        kv.push(("step_halving_ratio".into(), fmt_f(h.ratio)));
    }
    if text {
        artifacts.push(Artifact::text("hele_shaw.txt", key_values(&kv)));
        artifacts.push(Artifact::text(
            "hele_shaw_steps.txt",
            columns(&["step", "time", "physical_time", "conformal_radius", "circularity", "area"], rows),
        ));
    }
    if json {
        let map: std::collections::BTreeMap<_, _> = kv.into_iter().collect();
        artifacts.push(Artifact::json("hele_shaw.json", &map));
    }
    let status = match halted {
        Some(reason) => Status::Error(reason),
        None => Status::Ok,
    };
    Ok(Outcome { artifacts, status })
}

/// Runs every requested analysis, writes the artifacts of each as soon as it
/// finishes, then `summary.txt` and finally the manifest.
pub fn run_experiment(exp: &Experiment, out_dir: &Path, sequential: bool) -> Result<RunSummary, CliError> {
    fs::create_dir_all(out_dir).map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", out_dir.display())))?;
    let jobs = jobs(exp);
    let run_one = |(name, job): &Job<'_>| -> (String, Result<Vec<Artifact>, String>, Status) {
        log::info!("running {name}");
        let outcome = job().unwrap_or_else(|e| Outcome { artifacts: Vec::new(), status: Status::Error(e.to_string()) });
        let written = outcome
            .artifacts
            .iter()
            .try_for_each(|a| write_atomic(out_dir, &a.name, &a.bytes))
            .map(|_| outcome.artifacts)
            .map_err(|e| e.to_string());
        log::info!("{name}: {}", outcome.status.describe());
        (name.to_string(), written, outcome.status)
    };
    let results: Vec<_> = if sequential { jobs.iter().map(run_one).collect() } else { jobs.par_iter().map(run_one).collect() };

    let mut artifacts = Vec::new();
    let mut statuses = Vec::new();
    for (name, written, status) in results {
        match written {
            Ok(a) => artifacts.extend(a),
            Err(e) => return Err(CliError::Runtime(format!("writing {name} artifacts: {e}"))),
        }
        statuses.push((name, status));
    }
    let mut summary = vec![
        ("name".to_string(), exp.config.name.clone().unwrap_or_default()),
        ("term".into(), exp.term.to_string()),
        ("direction".into(), exp.field.direction.name().to_string()),
        ("horizon".into(), fmt_f(exp.field.horizon)),
    ];
    for (name, status) in &statuses {
        summary.push((format!("analysis.{name}"), status.describe()));
    }
    let summary = Artifact::text("summary.txt", key_values(&summary));
    write_atomic(out_dir, &summary.name, &summary.bytes).map_err(|e| CliError::Runtime(e.to_string()))?;
    artifacts.push(summary);
    let m = manifest(&artifacts);
    write_atomic(out_dir, MANIFEST, m.as_bytes()).map_err(|e| CliError::Runtime(e.to_string()))?;
    let mut names: Vec<String> = artifacts.into_iter().map(|a| a.name).collect();
    names.sort();
    Ok(RunSummary { out_dir: out_dir.to_path_buf(), artifacts: names, statuses })
}
