//! Flat output rows and their CSV/JSON encodings.

use std::io::Write;
use std::path::Path;

use ftsim::{OverheadPoint, SweepResult, ThresholdEstimate};
use serde::Serialize;

/// One sweep point. Column order is the field order; the four ancilla
/// columns are present only when ancilla statistics were requested.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Row {
    pub gamma: f64,
    pub scheme: String,
    pub checks: usize,
    pub rounds: Option<u64>,
    pub crashes: Option<u64>,
    pub crash_rate: Option<f64>,
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
    pub mean_time_units: Option<f64>,
    pub rejections_l1: u64,
    pub rejections_l2: u64,
    pub aborts: u64,
    pub xz_correlation: Option<f64>,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ancilla_physical_rate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ancilla_logical_rate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ancilla_any_physical_rate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ancilla_any_logical_rate: Option<f64>,
}

pub const COLUMNS: [&str; 14] = [
    "gamma",
    "scheme",
    "checks",
    "rounds",
    "crashes",
    "crash_rate",
    "ci_low",
    "ci_high",
    "mean_time_units",
    "rejections_l1",
    "rejections_l2",
    "aborts",
    "xz_correlation",
    "seed",
];

pub const ANCILLA_COLUMNS: [&str; 4] = [
    "ancilla_physical_rate",
    "ancilla_logical_rate",
    "ancilla_any_physical_rate",
    "ancilla_any_logical_rate",
];

impl Row {
    pub fn from_sweep(r: &SweepResult) -> Self {
        let a = r.ancilla;
        Row {
            gamma: r.gamma,
            scheme: r.scheme.to_string(),
            checks: r.checks,
            rounds: Some(r.rounds),
            crashes: Some(r.crashes),
            crash_rate: Some(r.crash_rate),
            ci_low: Some(r.ci_low),
            ci_high: Some(r.ci_high),
            mean_time_units: r.mean_time_units,
            rejections_l1: r.rejections_l1,
            rejections_l2: r.rejections_l2,
            aborts: r.aborts,
            xz_correlation: r.xz_correlation,
            seed: r.seed,
            ancilla_physical_rate: a.map(|a| a.leak_physical_rate()),
            ancilla_logical_rate: a.map(|a| a.leak_logical_rate()),
            ancilla_any_physical_rate: a.map(|a| a.physical_rate()),
            ancilla_any_logical_rate: a.map(|a| a.logical_rate()),
        }
    }

    /// Crash columns stay empty; `aborts` is 1 and `mean_time_units` empty
    /// when the retry budget ran out.
    pub fn from_overhead(p: &OverheadPoint, ancilla_stats: bool) -> Self {
        let a = ancilla_stats.then_some(p.ancilla);
        Row {
            gamma: p.gamma,
            scheme: p.scheme.to_string(),
            checks: p.checks,
            rounds: None,
            crashes: None,
            crash_rate: None,
            ci_low: None,
            ci_high: None,
            mean_time_units: p.time_units,
            rejections_l1: p.stats.rejections_l1,
            rejections_l2: p.stats.rejections_l2,
            aborts: p.exhausted as u64,
            xz_correlation: None,
            seed: p.seed,
            ancilla_physical_rate: a.map(|a| a.leak_physical_rate()),
            ancilla_logical_rate: a.map(|a| a.leak_logical_rate()),
            ancilla_any_physical_rate: a.map(|a| a.physical_rate()),
            ancilla_any_logical_rate: a.map(|a| a.logical_rate()),
        }
    }

    pub fn has_ancilla_columns(&self) -> bool {
        self.ancilla_physical_rate.is_some()
    }
}

/// One decoder-audit line.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AuditRow {
    pub check: String,
    pub patterns: u64,
    pub failures: u64,
    pub result: String,
}

#[derive(Serialize)]
struct Document<'a, R> {
    command: &'a str,
    rows: &'a [R],
    #[serde(skip_serializing_if = "Option::is_none")]
    threshold: Option<&'a ThresholdEstimate>,
}

/// CSV with a header line. An empty table still gets the header.
pub fn to_csv<R: Serialize>(rows: &[R], header: &[&str]) -> std::io::Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new().has_headers(!rows.is_empty()).from_writer(Vec::new());
    if rows.is_empty() {
        w.write_record(header)?;
    }
    for r in rows {
        w.serialize(r)?;
    }
    w.into_inner().map_err(|e| e.into_error())
}

pub fn to_json<R: Serialize>(command: &str, rows: &[R], threshold: Option<&ThresholdEstimate>) -> std::io::Result<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(&Document {
        command,
        rows,
        threshold,
    })?;
    out.push(b'\n');
    Ok(out)
}

/// Writes through a temporary file in the destination directory and renames
/// it into place, so readers see either the old file or the complete new one.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}
