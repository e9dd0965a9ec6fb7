//! Tables, reports and atomic artifact writes.

use std::io::Write;
use std::path::{Path, PathBuf};

use metric_spectral::{Check, CheckList};
use serde::Serialize;

use crate::config::{ExperimentConfig, Format, SCHEMA_VERSION};
use crate::error::CliError;

/// A CSV table with a frozen header. Missing cells are written empty.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<Option<f64>>>,
}

impl Table {
    pub fn new(name: impl Into<String>, header: &[&str]) -> Self {
        Self {
            name: name.into(),
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Option<f64>>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row
                .iter()
                .map(|c| c.map(format_cell).unwrap_or_default())
                .collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

/// Shortest round-trip form; integers print without a fraction and very
/// small or large magnitudes use an exponent.
fn format_cell(x: f64) -> String {
    if x.is_finite() && x.fract() == 0.0 && x.abs() < 1e15 {
        format!("{}", x as i64)
    } else if x.is_finite() && (x.abs() < 1e-4 || x.abs() >= 1e15) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}


/// A reported number with where it came from.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Estimate {
    pub name: String,
    pub value: f64,
    pub tolerance: Option<f64>,
    pub oracle: Option<String>,
    pub module: &'static str,
    pub operation: &'static str,
}

impl Estimate {
    pub fn new(
        name: impl Into<String>,
        value: f64,
        module: &'static str,
        operation: &'static str,
    ) -> Self {
        Self {
            name: name.into(),
            value,
            tolerance: None,
            oracle: None,
            module,
            operation,
        }
    }

    pub fn within(mut self, tolerance: f64, oracle: impl Into<String>) -> Self {
        self.tolerance = Some(tolerance);
        self.oracle = Some(oracle.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportCheck {
    pub module: &'static str,
    pub operation: &'static str,
    #[serde(flatten)]
    pub check: Check,
}

/// Everything one experiment produced, before it is written out.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub estimates: Vec<Estimate>,
    pub checks: Vec<ReportCheck>,
    pub tables: Vec<Table>,
}

impl Outcome {
    pub fn estimate(&mut self, e: Estimate) {
        self.estimates.push(e);
    }

    pub fn check(&mut self, module: &'static str, operation: &'static str, check: Check) {
        self.checks.push(ReportCheck {
            module,
            operation,
            check,
        });
    }

    pub fn checks(&mut self, module: &'static str, operation: &'static str, list: CheckList) {
        for check in list.0 {
            self.check(module, operation, check);
        }
    }

    /// Like [`Outcome::checks`] with `prefix: ` prepended to each name.
    pub fn labelled(
        &mut self,
        module: &'static str,
        operation: &'static str,
        prefix: &str,
        list: CheckList,
    ) {
        for mut check in list.0 {
            check.name = format!("{prefix}: {}", check.name);
            self.check(module, operation, check);
        }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.check.passed)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport<'a> {
    pub schema: u32,
    pub tool_version: &'static str,
    pub experiment: &'static str,
    pub passed: bool,
    pub config: &'a ExperimentConfig,
    pub estimates: &'a [Estimate],
    pub checks: &'a [ReportCheck],
    /// Artifact file names, relative to the output directory.
    pub artifacts: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Timing {
    pub experiment: &'static str,
    pub wall_seconds: f64,
}

/// Writes `contents` to `dir/name` through a temporary file in `dir`.
pub fn write_atomic(dir: &Path, name: &str, contents: &[u8]) -> Result<PathBuf, CliError> {
    let target = dir.join(name);
    let io = |e: std::io::Error| CliError::Io(format!("writing {}: {e}", target.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(contents).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(&target).map_err(|e| io(e.error))?;
    Ok(target)
}

/// Writes the CSV tables, `report.json` and `timing.json`; returns the written paths.
pub fn write_artifacts(
    dir: &Path,
    config: &ExperimentConfig,
    outcome: &Outcome,
    wall_seconds: f64,
) -> Result<Vec<PathBuf>, CliError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::Io(format!("creating {}: {e}", dir.display())))?;
    let mut written = Vec::new();
    let mut artifacts = Vec::new();
    if config.output.formats.contains(&Format::Csv) {
        for table in &outcome.tables {
            let name = format!("{}.csv", table.name);
            written.push(write_atomic(dir, &name, table.to_csv().as_bytes())?);
            artifacts.push(name);
        }
    }
    if config.output.formats.contains(&Format::Json) {
        artifacts.push("timing.json".into());
        let report = RunReport {
            schema: SCHEMA_VERSION,
            tool_version: env!("CARGO_PKG_VERSION"),
            experiment: config.experiment.name(),
            passed: outcome.passed(),
            config,
            estimates: &outcome.estimates,
            checks: &outcome.checks,
            artifacts: artifacts.clone(),
        };
        written.push(write_atomic(
            dir,
            "report.json",
            pretty(&report).as_bytes(),
        )?);
        let timing = Timing {
            experiment: config.experiment.name(),
            wall_seconds,
        };
        written.push(write_atomic(
            dir,
            "timing.json",
            pretty(&timing).as_bytes(),
        )?);
    }
    Ok(written)
}

fn pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}
