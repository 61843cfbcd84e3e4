//! Artifact formats and atomic file output.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use loewner::boundary::BoundaryCurve;
use loewner::flow::Trajectory;
use sha2::{Digest, Sha256};

pub const MANIFEST: &str = "manifest.txt";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

impl Artifact {
    pub fn text(name: impl Into<String>, text: String) -> Self {
        Self { name: name.into(), bytes: text.into_bytes() }
    }

    pub fn json<T: serde::Serialize>(name: impl Into<String>, value: &T) -> Self {
        let mut bytes = serde_json::to_vec_pretty(value).expect("report types serialise");
        bytes.push(b'\n');
        Self { name: name.into(), bytes }
    }

    pub fn sha256(&self) -> String {
        hex::encode(Sha256::digest(&self.bytes))
    }
}

pub fn fmt_f(x: f64) -> String {
    format!("{x:.12e}")
}

/// `key = value` lines.
pub fn key_values<K: AsRef<str>, V: AsRef<str>>(pairs: &[(K, V)]) -> String {
    let mut s = String::new();
    for (k, v) in pairs {
        writeln!(s, "{} = {}", k.as_ref(), v.as_ref()).unwrap();
    }
    s
}

/// Whitespace-separated columns under a `#` header.
pub fn columns(header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> String {
    let mut s = format!("# {}\n", header.join(" "));
    for row in rows {
        let cells: Vec<String> = row.iter().map(|x| fmt_f(*x)).collect();
        s.push_str(&cells.join(" "));
        s.push('\n');
    }
    s
}

/// `t re_w im_w re_wz im_wz`, preceded by the seed and exit status.
pub fn trajectory_text(tr: &Trajectory) -> String {
    let mut s = format!("# seed = {} {}\n# exit = {:?}\n", fmt_f(tr.seed.re), fmt_f(tr.seed.im), tr.exit);
    s.push_str(&columns(
        &["t", "re_w", "im_w", "re_wz", "im_wz"],
        tr.samples.iter().map(|p| vec![p.t, p.w.re, p.w.im, p.wz.re, p.wz.im]),
    ));
    s
}

/// `theta re_w im_w`.
pub fn curve_text(curve: &BoundaryCurve) -> String {
    let mut s = format!("# time = {}\n# radius = {}\n", fmt_f(curve.time), fmt_f(curve.radius));
    s.push_str(&columns(
        &["theta", "re_w", "im_w"],
        curve.points.iter().enumerate().map(|(i, w)| vec![curve.angle(i), w.re, w.im]),
    ));
    s
}

/// Writes to a temporary sibling, then renames over `name`.
pub fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> std::io::Result<()> {
    let tmp = dir.join(format!(".{name}.tmp"));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, dir.join(name))
}

/// `sha256  name` per artifact, sorted by name.
pub fn manifest(artifacts: &[Artifact]) -> String {
    let mut lines: Vec<(String, String)> = artifacts.iter().map(|a| (a.name.clone(), a.sha256())).collect();
    lines.sort();
    lines.into_iter().map(|(n, h)| format!("{h}  {n}\n")).collect()
}
