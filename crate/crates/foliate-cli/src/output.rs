//! Deterministic CSV and JSON emission: fixed float formatting, no
//! timestamps, no map types, so identical inputs produce identical bytes.

use std::fs;
use std::path::Path;

use anyhow::Context;
use serde::Serialize;

use foliate::verify::{GridSpec, ResidualReport};

/// Scientific notation with 17 significant digits — enough to round-trip
/// any finite f64 and byte-stable across platforms.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// File-name slug for a scenario name: lowercase alphanumerics with
/// single underscores between runs of anything else.
pub fn slug(name: &str) -> String {
    let mut out = String::new();
    let mut gap = false;
    for ch in name.chars() {
        if ch.is_ascii_alphanumeric() {
            if gap && !out.is_empty() {
                out.push('_');
            }
            out.push(ch.to_ascii_lowercase());
            gap = false;
        } else {
            gap = true;
        }
    }
    if out.is_empty() {
        out.push_str("scenario");
    }
    out
}

/// In-memory CSV buffer written in one shot.
pub struct Csv {
    buf: String,
    cols: usize,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        let mut buf = header.join(",");
        buf.push('\n');
        Csv {
            buf,
            cols: header.len(),
        }
    }

    pub fn row(&mut self, cells: &[String]) {
        debug_assert_eq!(cells.len(), self.cols);
        self.buf.push_str(&cells.join(","));
        self.buf.push('\n');
    }

    pub fn write(&self, path: &Path) -> anyhow::Result<()> {
        fs::write(path, &self.buf).with_context(|| format!("writing {}", path.display()))
    }
}

/// The residual lattice as CSV, one row per lattice point in lattice order.
/// Points the domain guards excluded are kept with `included = 0` and a NaN
/// residual, so the lattice geometry is reconstructible from the file alone.
pub fn residual_csv(grid: &GridSpec, report: &ResidualReport) -> Csv {
    let mut csv = Csv::new(&["q", "p", "t", "residual", "included"]);
    let mut samples = report.samples.iter().peekable();
    for i in 0..grid.len() {
        let x = grid.state(i);
        let hit = matches!(samples.peek(), Some((s, _)) if *s == x);
        if hit {
            let (_, r) = samples.next().unwrap();
            csv.row(&[
                fmt_f64(x.q),
                fmt_f64(x.p),
                fmt_f64(x.t),
                fmt_f64(*r),
                "1".to_string(),
            ]);
        } else {
            csv.row(&[
                fmt_f64(x.q),
                fmt_f64(x.p),
                fmt_f64(x.t),
                fmt_f64(f64::NAN),
                "0".to_string(),
            ]);
        }
    }
    debug_assert!(samples.next().is_none());
    csv
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(value)
        .with_context(|| format!("encoding {}", path.display()))?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// Distribution of a residual scan, mirrored into the JSON summary.
#[derive(Serialize)]
pub struct ResidualStats {
    pub mean_abs: f64,
    pub p50: f64,
    pub p90: f64,
    pub p99: f64,
}

/// One verification check's outcome inside a `verify` run.
#[derive(Serialize)]
pub struct CheckSummary {
    pub check: &'static str,
    pub pass: bool,
    pub threshold: f64,
    pub measured: f64,
    pub included: usize,
    pub excluded: usize,
    pub detail: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual_stats: Option<ResidualStats>,
}

#[derive(Serialize)]
pub struct VerifySummary {
    pub name: String,
    pub kind: &'static str,
    pub seed: u64,
    pub pass: bool,
    pub checks: Vec<CheckSummary>,
    /// Files this run wrote, relative to the output directory.
    pub artifacts: Vec<String>,
    pub duration_seconds: f64,
}

#[derive(Serialize)]
pub struct TrajectorySummary {
    pub name: String,
    pub kind: &'static str,
    pub q0: f64,
    pub p0: f64,
    pub t0: f64,
    pub t_end_requested: f64,
    pub t_final: f64,
    pub q_final: f64,
    pub p_final: f64,
    pub steps_accepted: usize,
    pub steps_rejected: usize,
    /// Time at which the integration stopped on a domain guard, if it did.
    pub guard_exit: Option<f64>,
    pub invariant_initial: Option<f64>,
    pub invariant_final: Option<f64>,
    pub max_drift_rel: Option<f64>,
}

#[derive(Serialize)]
pub struct ScanSummary {
    pub name: String,
    pub kind: &'static str,
    pub pass: bool,
    pub threshold: f64,
    pub max_abs: f64,
    pub mean_abs: f64,
    pub p50: f64,
    pub p90: f64,
    pub p99: f64,
    pub included: usize,
    pub excluded: usize,
}
