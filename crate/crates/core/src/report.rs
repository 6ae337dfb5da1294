//! Check records, the run report and its JSON and text renderings.

use std::io;

use serde::{Deserialize, Serialize};
use serde_json::ser::Formatter;

use crate::config::RunConfig;

/// Whether a check passes by staying under its tolerance or, for negative
/// controls, by exceeding it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Expect {
    Below,
    Above,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub suite: String,
    pub name: String,
    pub paper_anchor: String,
    /// `None` when the check could not be evaluated; see `notes`.
    pub max_residual: Option<f64>,
    pub tolerance: f64,
    pub expect: Expect,
    pub pass: bool,
    pub notes: String,
}

impl CheckRecord {
    pub fn new(suite: &str, name: &str, anchor: &str, residual: Option<f64>, tolerance: f64, expect: Expect, notes: String) -> Self {
        let pass = match (residual, expect) {
            (Some(r), Expect::Below) => r.is_finite() && r < tolerance,
            (Some(r), Expect::Above) => r.is_nan() || r > tolerance,
            (None, _) => false,
        };
        CheckRecord {
            suite: suite.into(),
            name: name.into(),
            paper_anchor: anchor.into(),
            max_residual: residual.map(|r| if r.is_finite() { r } else { f64::MAX }),
            tolerance,
            expect,
            pass,
            notes,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub toolkit: String,
    pub version: String,
    /// Seconds since the Unix epoch; the only field that varies between
    /// identical runs.
    pub generated_at: u64,
    pub seed: u64,
    pub config: RunConfig,
    pub checks: Vec<CheckRecord>,
    pub pass: bool,
}

impl Report {
    pub fn new(config: RunConfig, checks: Vec<CheckRecord>) -> Self {
        let pass = !checks.is_empty() && checks.iter().all(|c| c.pass);
        let generated_at = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        Report {
            toolkit: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            generated_at,
            seed: config.seed,
            config,
            checks,
            pass,
        }
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckRecord> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Text,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" => Ok(Format::Json),
            "text" => Ok(Format::Text),
            other => Err(format!("unknown format `{other}` (expected json or text)")),
        }
    }
}

/// Compact JSON with every float written to 17 significant digits.
struct SignificantDigits;

impl Formatter for SignificantDigits {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }
}

pub fn to_json(report: &Report) -> Vec<u8> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, SignificantDigits);
    report.serialize(&mut ser).expect("report serializes");
    out.push(b'\n');
    out
}

fn sci(x: Option<f64>) -> String {
    x.map_or_else(|| "error".to_string(), |v| format!("{v:.3e}"))
}

pub fn to_text(report: &Report) -> Vec<u8> {
    let rows: Vec<[String; 6]> = report
        .checks
        .iter()
        .map(|c| {
            let bound = match c.expect {
                Expect::Below => format!("< {}", sci(Some(c.tolerance))),
                Expect::Above => format!("> {}", sci(Some(c.tolerance))),
            };
            [
                if c.pass { "PASS" } else { "FAIL" }.to_string(),
                c.suite.clone(),
                c.name.clone(),
                sci(c.max_residual),
                bound,
                c.paper_anchor.clone(),
            ]
        })
        .collect();
    let header = ["", "suite", "check", "residual", "bound", "anchor"].map(String::from);
    let mut widths = [0usize; 6];
    for r in rows.iter().chain(std::iter::once(&header)) {
        for (w, cell) in widths.iter_mut().zip(r) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |r: &[String; 6]| {
        let cells: Vec<String> = r.iter().zip(widths).map(|(c, w)| format!("{c:<w$}")).collect();
        cells.join("  ").trim_end().to_string() + "\n"
    };
    let mut out = format!("{} {} (seed {})\n", report.toolkit, report.version, report.seed);
    out += &line(&header);
    for (r, c) in rows.iter().zip(&report.checks) {
        out += &line(r);
        if !c.notes.is_empty() {
            out += &format!("      {}\n", c.notes);
        }
    }
    let failed = report.failures().count();
    out += &format!(
        "overall: {} ({} checks, {} failed)\n",
        if report.pass { "PASS" } else { "FAIL" },
        report.checks.len(),
        failed
    );
    out.into_bytes()
}

pub fn emit(report: &Report, format: Format) -> Vec<u8> {
    match format {
        Format::Json => to_json(report),
        Format::Text => to_text(report),
    }
}

/// JSON rendering with the timestamp zeroed, for byte comparisons.
pub fn canonical_json(report: &Report) -> Vec<u8> {
    let mut r = report.clone();
    r.generated_at = 0;
    to_json(&r)
}
