use std::fs;
use std::path::Path;
use std::process::Command;

use loewner_cli::catalogue::list_catalogue;

fn loewner() -> Command {
    Command::new(env!("CARGO_BIN_EXE_loewner"))
}

fn write_config(dir: &Path, name: &str, body: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p
}

fn run(config: &Path, out: &Path) -> (i32, String, String) {
    let o = loewner().arg("run").arg(config).arg("--out").arg(out).output().unwrap();
    (
        o.status.code().unwrap(),
        String::from_utf8_lossy(&o.stdout).into_owned(),
        String::from_utf8_lossy(&o.stderr).into_owned(),
    )
}

fn report(path: &Path) -> Vec<(String, String)> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter_map(|l| l.split_once(" = ").map(|(k, v)| (k.to_string(), v.to_string())))
        .collect()
}

fn value(kv: &[(String, String)], key: &str) -> f64 {
    kv.iter().find(|(k, _)| k == key).unwrap_or_else(|| panic!("missing {key}")).1.parse().unwrap()
}

const CONSTANT: &str = r#"
[term]
family = "constant"
re = 1.0

[flow]
horizon = 1.0
seeds = [[0.5, 0.0]]

[analyses]
boundary = { points = 128 }
trajectories = {}

[output]
formats = ["text", "json"]
"#;

#[test]
fn constant_flow_traces_a_circle() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", CONSTANT);
    let out = dir.path().join("out");
    let (code, _, err) = run(&cfg, &out);
    assert_eq!(code, 0, "{err}");
    let expected = (1.0 - 1e-4) * (-1f64).exp();
    let text = fs::read_to_string(out.join("boundary.txt")).unwrap();
    let rows: Vec<Vec<f64>> = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split_whitespace().map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 128);
    for r in &rows {
        assert!((r[1].hypot(r[2]) - expected).abs() < 1e-9);
    }
    let tr = fs::read_to_string(out.join("trajectory_000.txt")).unwrap();
    assert!(tr.contains("# t re_w im_w re_wz im_wz"));
    let json: serde_json::Value = serde_json::from_slice(&fs::read(out.join("boundary.json")).unwrap()).unwrap();
    assert_eq!(json["points"].as_array().unwrap().len(), 128);

    let manifest = fs::read_to_string(out.join("manifest.txt")).unwrap();
    for name in ["boundary.txt", "boundary.json", "trajectory_000.txt", "trajectories.json", "summary.txt"] {
        assert!(manifest.lines().any(|l| l.ends_with(&format!("  {name}"))), "{name} missing from manifest");
    }
}

#[test]
fn unknown_keys_are_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let body = CONSTANT.replace("horizon = 1.0", "horizon = 1.0\nspeling_mistake = 3");
    let cfg = write_config(dir.path(), "bad.toml", &body);
    let (code, _, err) = run(&cfg, &dir.path().join("out"));
    assert_eq!(code, 2);
    assert!(err.contains("speling_mistake"), "{err}");
    assert!(!dir.path().join("out").exists(), "nothing may run before validation");

    let nested = CONSTANT.replace("re = 1.0", "re = 1.0\nfoo = 2");
    let (code, _, err) = run(&write_config(dir.path(), "n.toml", &nested), &dir.path().join("out"));
    assert_eq!(code, 2);
    assert!(err.contains("foo"), "{err}");
}

#[test]
fn semantic_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        CONSTANT.replace("re = 1.0", "re = -1.0"),
        CONSTANT.replace("horizon = 1.0", "horizon = 1.0\ndirection = \"backward\""),
        CONSTANT.replace("trajectories = {}", "trajectories = {}\ndiagnostics = { assert = [\"no_such\"] }"),
        CONSTANT.replace("seeds = [[0.5, 0.0]]", "seeds = []"),
        CONSTANT.replace("family = \"constant\"\nre = 1.0", "family = \"sector\"\nc = 1.0\nalpha = 0.5"),
    ];
    for (i, body) in cases.iter().enumerate() {
        let (code, _, err) = run(&write_config(dir.path(), &format!("{i}.toml"), body), &dir.path().join("out"));
        assert_eq!(code, 2, "case {i}: {err}");
    }
    let missing = loewner().args(["run", "/nonexistent/x.toml"]).output().unwrap();
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn sector_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let body = r#"
[term]
family = "sector"
alpha = 0.5

[analyses]
diagnostics = { assert = ["holder_boundary", "inverse_continuity"] }
holder = {}
qc = {}
"#;
    let out = dir.path().join("out");
    let (code, _, err) = run(&write_config(dir.path(), "s.toml", body), &out);
    assert_eq!(code, 0, "{err}");
    let d = report(&out.join("diagnostics.txt"));
    assert!((value(&d, "h") - 1.0).abs() < 0.02);
    let h = report(&out.join("holder.txt"));
    assert!((value(&h, "exponent") - 0.5).abs() <= 0.1);
    let q = report(&out.join("qc.txt"));
    assert!(value(&q, "three_point_ratio") <= 5.0 / 3.0 + 0.05);
    assert!(q.iter().any(|(k, v)| k == "window_passed" && v == "true"));
}

#[test]
fn failing_assertion_exits_with_four() {
    let dir = tempfile::tempdir().unwrap();
    let body = r#"
[term]
family = "sector"
alpha = 0.5

[analyses]
diagnostics = { assert = ["real_part_lower_bound"] }
"#;
    let out = dir.path().join("out");
    let (code, _, _) = run(&write_config(dir.path(), "a.toml", body), &out);
    assert_eq!(code, 4);
    let summary = fs::read_to_string(out.join("summary.txt")).unwrap();
    assert!(summary.contains("hypothesis failed: real_part_lower_bound"), "{summary}");
}

#[test]
fn runtime_failure_is_isolated() {
    let dir = tempfile::tempdir().unwrap();
    // a backward step of length 1 pushes the seed circle r = 0.9 out of the disc
    let body = r#"
[term]
family = "constant"
re = 1.0

[analyses]
boundary = { points = 64 }
hele_shaw = { steps = 3, dt = 1.0, radius = 0.9, points = 64 }
"#;
    let out = dir.path().join("out");
    let (code, _, _) = run(&write_config(dir.path(), "r.toml", body), &out);
    assert_eq!(code, 3);
    let manifest = fs::read_to_string(out.join("manifest.txt")).unwrap();
    assert!(manifest.contains("  boundary.txt"));
    let hs = report(&out.join("hele_shaw.txt"));
    assert!(hs.iter().any(|(k, v)| k == "halted" && v.contains("halted at step 0")), "{hs:?}");
}

#[test]
fn runs_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let body = r#"
[term]
family = "half_plane"
k = 0.3

[flow]
seeds = [[0.3, 0.2], [-0.5, 0.1]]

[analyses]
trajectories = {}
boundary = { points = 256 }
split = { n = 4 }
hele_shaw = { steps = 3, initial = [[0.0, 0.0], [1.0, 0.0], [0.1, 0.0]] }

[output]
formats = ["text", "json"]
"#;
    let cfg = write_config(dir.path(), "h.toml", body);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert_eq!(run(&cfg, &a).0, 0);
    let seq = loewner().arg("run").arg(&cfg).arg("--out").arg(&b).arg("--sequential").output().unwrap();
    assert_eq!(seq.status.code(), Some(0));
    let ma = fs::read(a.join("manifest.txt")).unwrap();
    assert_eq!(ma, fs::read(b.join("manifest.txt")).unwrap());
    assert!(!ma.is_empty());
}

#[test]
fn catalogue_listing() {
    let a = loewner().arg("catalogue").output().unwrap();
    let b = loewner().arg("catalogue").output().unwrap();
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert_eq!(text, list_catalogue());
    for family in ["HalfPlane", "Strip", "Sector", "PointKernel", "Measure", "Composed", "Constant"] {
        assert!(text.lines().any(|l| l == family), "{family}");
    }
    assert_eq!(text.matches("hypotheses: ").count(), 7);
}

#[test]
fn catalogue_matches_measured_verdicts() {
    use loewner::diagnostics::{check_hypotheses, DiagnosticsConfig};
    use loewner::driving::standard_catalogue;
    use loewner_cli::catalogue::ENTRIES;

    for term in standard_catalogue() {
        let entry = ENTRIES
            .iter()
            .find(|e| e.config.split(' ').next() == Some(term.family_name()))
            .unwrap_or_else(|| panic!("{term} not listed"));
        let verdicts = check_hypotheses(&term, &DiagnosticsConfig::default()).unwrap();
        let mut holding: Vec<&str> = verdicts.iter().filter(|(_, v)| v.holds()).map(|(k, _)| k.as_str()).collect();
        let mut listed = entry.hypotheses.to_vec();
        holding.sort_unstable();
        listed.sort_unstable();
        assert_eq!(listed, holding, "{term}");
    }
}
