//! Experiment results and their on-disk form.

use serde::Serialize;
use serde_json::{Map, Value};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::config::{OutputFormat, RunConfig};
use crate::CliError;

pub const SUMMARY_SCHEMA: &str = "reldiff.summary/1";

/// A numeric CSV table.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(name: impl Into<String>, header: &[&'static str]) -> Self {
        Table { name: name.into(), header: header.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    /// Header plus rows, 17 significant digits, LF line endings.
    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            for (i, v) in row.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write!(out, "{v:.16e}").expect("writing to a String cannot fail");
            }
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Comparison {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">=")]
    AtLeast,
}

/// One thresholded statistic.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub comparison: Comparison,
    pub pass: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Check { name: name.into(), value, threshold, comparison: Comparison::AtMost, pass: value <= threshold }
    }

    pub fn at_least(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Check { name: name.into(), value, threshold, comparison: Comparison::AtLeast, pass: value >= threshold }
    }
}

/// Everything an experiment produces before it is written out.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub statistics: Map<String, Value>,
    pub checks: Vec<Check>,
    pub tables: Vec<Table>,
}

impl Outcome {
    pub fn stat(&mut self, key: impl Into<String>, value: impl Into<Value>) {
        self.statistics.insert(key.into(), value.into());
    }

    pub fn check(&mut self, check: Check) {
        if !check.pass {
            log::warn!("{} = {:e} fails threshold {:e}", check.name, check.value, check.threshold);
        }
        self.checks.push(check);
    }

    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// JSON number, or `null` for non-finite values.
pub fn number(x: f64) -> Value {
    serde_json::Number::from_f64(x).map(Value::Number).unwrap_or(Value::Null)
}

pub fn summary_json(config: &RunConfig, outcome: &Outcome) -> Result<String, CliError> {
    let mut checks = Map::new();
    for c in &outcome.checks {
        checks.insert(c.name.clone(), serde_json::to_value(c)?);
    }
    let mut root = Map::new();
    root.insert("schema".into(), SUMMARY_SCHEMA.into());
    root.insert("experiment".into(), config.experiment.name().into());
    root.insert("config".into(), serde_json::to_value(config)?);
    root.insert("statistics".into(), Value::Object(outcome.statistics.clone()));
    root.insert("thresholds".into(), serde_json::to_value(&config.thresholds)?);
    root.insert("checks".into(), Value::Object(checks));
    root.insert("pass".into(), outcome.pass().into());
    let mut text = serde_json::to_string_pretty(&Value::Object(root))?;
    text.push('\n');
    Ok(text)
}

/// Writes the CSV tables and `summary.json`; returns the paths written.
pub fn write_outcome(config: &RunConfig, outcome: &Outcome, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    if config.writes(OutputFormat::Csv) {
        for t in &outcome.tables {
            let path = dir.join(format!("{}.csv", t.name));
            fs::write(&path, t.to_csv())?;
            written.push(path);
        }
    }
    if config.writes(OutputFormat::Json) {
        let path = dir.join("summary.json");
        fs::write(&path, summary_json(config, outcome)?)?;
        written.push(path);
    }
    Ok(written)
}
