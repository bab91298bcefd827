//! Report schema, JSON and CSV output.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::error::HarnessError;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChargeRow {
    pub gen: String,
    pub t: f64,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">=")]
    AtLeast,
}

/// One residual against its tolerance. NaN values never pass.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub relation: Relation,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self { name: name.into(), value, relation: Relation::AtMost, tolerance, pass: value <= tolerance }
    }

    pub fn at_least(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self { name: name.into(), value, relation: Relation::AtLeast, tolerance, pass: value >= tolerance }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionSummary {
    pub id: usize,
    pub title: String,
    pub checks: Vec<String>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct Results {
    pub charges: Vec<ChargeRow>,
    pub residuals: BTreeMap<String, f64>,
    pub checks: Vec<Check>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pca: Option<Value>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub criteria: Vec<CriterionSummary>,
    pub pass: bool,
}

impl Results {
    pub fn residual(&mut self, name: impl Into<String>, value: f64) {
        self.residuals.insert(name.into(), value);
    }

    pub fn check(&mut self, c: Check) {
        self.checks.push(c);
    }

    /// Sets `pass` from the checks and criteria.
    pub fn finalize(&mut self) {
        self.pass = self.checks.iter().all(|c| c.pass) && self.criteria.iter().all(|c| c.pass);
    }
}

/// `runtime_s` and `timing` are wall-clock values and sit after the
/// deterministic part of the document.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub config: Value,
    pub results: Results,
    pub runtime_s: f64,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub timing: BTreeMap<String, f64>,
}

pub const TIMING_KEYS: [&str; 2] = ["runtime_s", "timing"];

impl Report {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("gen,t,value\n");
        for r in &self.results.charges {
            s.push_str(&format!("{},{},{}\n", r.gen, r.t, r.value));
        }
        s
    }
}

/// The report without its wall-clock fields, serialized; equal for equal
/// configurations.
pub fn deterministic_part(json: &str) -> serde_json::Result<String> {
    let mut v: Value = serde_json::from_str(json)?;
    if let Value::Object(m) = &mut v {
        for k in TIMING_KEYS {
            m.remove(k);
        }
    }
    serde_json::to_string_pretty(&v)
}

/// CSV file next to a JSON report path.
pub fn csv_path(json_path: &Path) -> PathBuf {
    json_path.with_extension("csv")
}

/// Writes `path` (JSON) and its sibling CSV, creating parent directories.
pub fn emit_report(r: &Report, path: &Path) -> Result<(), HarnessError> {
    let io = |p: &Path| {
        let p = p.to_path_buf();
        move |source| HarnessError::Io { path: p, source }
    };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io(dir))?;
    }
    write_file(path, &r.to_json()).map_err(io(path))?;
    let csv = csv_path(path);
    write_file(&csv, &r.to_csv()).map_err(io(&csv))
}

fn write_file(path: &Path, contents: &str) -> std::io::Result<()> {
    let mut f = fs::File::create(path)?;
    f.write_all(contents.as_bytes())?;
    f.sync_all()
}
