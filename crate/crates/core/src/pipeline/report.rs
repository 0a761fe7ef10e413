//! Persisted record of a pipeline execution.
//!
//! `run.json` holds the configuration, every stage with its checks, and a
//! failures section. Tables go to `tables/<name>.csv` and fields to
//! `fields/<name>.csv`. Wall-clock times live in `timings.json` so that the
//! other files are byte-identical across reruns of the same configuration.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use crate::grid::io::write_field_csv;
use crate::grid::ScalarField;
use crate::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cell {
    Num(f64),
    Text(String),
}

impl From<f64> for Cell {
    /// Non-finite numbers become text, which JSON and CSV both keep.
    fn from(v: f64) -> Self {
        if v.is_finite() {
            Cell::Num(v)
        } else {
            Cell::Text(v.to_string())
        }
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Num(v as f64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Text(String::new()), Cell::from)
    }
}

fn csv_field(cell: &Cell) -> String {
    match cell {
        Cell::Num(v) => format!("{v:e}"),
        Cell::Text(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
        Cell::Text(s) => s.clone(),
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(csv_field).collect();
            let _ = writeln!(out, "{}", line.join(","));
        }
        out
    }
}

/// Builds a table row from heterogeneous values.
#[macro_export]
macro_rules! row {
    ($($v:expr),* $(,)?) => {
        vec![$($crate::pipeline::report::Cell::from($v)),*]
    };
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// Measured quantity; absent when it is not a number.
    pub value: Option<f64>,
    /// Human-readable acceptance condition.
    pub condition: String,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stage {
    pub name: String,
    pub checks: Vec<Check>,
    pub tables: Vec<String>,
    pub fields: Vec<String>,
    /// Stage-specific scalars such as condition numbers or constants.
    pub summary: BTreeMap<String, Cell>,
}

/// Collects one stage's outputs.
#[derive(Debug)]
pub struct StageRecorder {
    stage: Stage,
    tables: Vec<(String, Table)>,
    fields: Vec<(String, ScalarField)>,
}

impl StageRecorder {
    fn new(name: &str) -> Self {
        StageRecorder {
            stage: Stage {
                name: name.to_string(),
                checks: Vec::new(),
                tables: Vec::new(),
                fields: Vec::new(),
                summary: BTreeMap::new(),
            },
            tables: Vec::new(),
            fields: Vec::new(),
        }
    }

    fn qualified(&self, name: &str) -> String {
        format!("{}.{name}", self.stage.name)
    }

    pub fn check(&mut self, name: &str, passed: bool, value: f64, condition: impl Into<String>, detail: impl Into<String>) {
        let value = value.is_finite().then_some(value);
        self.stage.checks.push(Check {
            name: self.qualified(name),
            passed,
            value,
            condition: condition.into(),
            detail: detail.into(),
        });
    }

    /// `value <= bound`.
    pub fn at_most(&mut self, name: &str, value: f64, bound: f64) {
        self.check(name, value <= bound, value, format!("<= {bound:e}"), "");
    }

    /// `lo <= value <= hi`.
    pub fn within(&mut self, name: &str, value: f64, lo: f64, hi: f64) {
        self.check(name, (lo..=hi).contains(&value), value, format!("in [{lo}, {hi}]"), "");
    }

    pub fn summary(&mut self, key: &str, value: impl Into<Cell>) {
        self.stage.summary.insert(key.to_string(), value.into());
    }

    pub fn table(&mut self, name: &str, table: Table) {
        let q = self.qualified(name);
        self.stage.tables.push(q.clone());
        self.tables.push((q, table));
    }

    pub fn field(&mut self, name: &str, field: ScalarField) {
        let q = self.qualified(name);
        self.stage.fields.push(q.clone());
        self.fields.push((q, field));
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub check: String,
    pub value: Option<f64>,
    pub condition: String,
    pub detail: String,
}

/// Contents of `run.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub config: Option<ExperimentConfig>,
    pub stages: Vec<Stage>,
    pub passed: bool,
    pub failures: Vec<Failure>,
}

impl RunSummary {
    pub fn load(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }

    /// 0 iff every check passed.
    pub fn exit_code(&self) -> i32 {
        if self.passed {
            0
        } else {
            1
        }
    }
}

#[derive(Debug, Default)]
pub struct ExperimentRun {
    pub config: Option<ExperimentConfig>,
    pub stages: Vec<Stage>,
    pub tables: BTreeMap<String, Table>,
    pub fields: BTreeMap<String, ScalarField>,
    /// Seconds per stage, in execution order.
    pub timings: Vec<(String, f64)>,
}

impl ExperimentRun {
    pub fn new(config: Option<ExperimentConfig>) -> Self {
        ExperimentRun {
            config,
            ..Default::default()
        }
    }

    /// Runs `body` as stage `name`. An error inside the stage is recorded
    /// as a failed `error` check instead of aborting the run.
    pub fn stage(&mut self, name: &str, body: impl FnOnce(&mut StageRecorder) -> Result<()>) {
        let start = Instant::now();
        let mut rec = StageRecorder::new(name);
        if let Err(e) = body(&mut rec) {
            log::error!("stage {name} failed: {e}");
            rec.check("error", false, f64::NAN, "stage completes", e.to_string());
        }
        self.timings.push((name.to_string(), start.elapsed().as_secs_f64()));
        self.tables.extend(rec.tables);
        self.fields.extend(rec.fields);
        self.stages.push(rec.stage);
    }

    pub fn summary(&self) -> RunSummary {
        let failures: Vec<Failure> = self
            .stages
            .iter()
            .flat_map(|s| &s.checks)
            .filter(|c| !c.passed)
            .map(|c| Failure {
                check: c.name.clone(),
                value: c.value,
                condition: c.condition.clone(),
                detail: c.detail.clone(),
            })
            .collect();
        RunSummary {
            config: self.config.clone(),
            stages: self.stages.clone(),
            passed: failures.is_empty(),
            failures,
        }
    }

    /// Writes every artifact into `dir` and returns the summary.
    pub fn write(&self, dir: &Path) -> Result<RunSummary> {
        let summary = self.summary();
        std::fs::create_dir_all(dir)?;
        let json = serde_json::to_string_pretty(&summary)?;
        std::fs::write(dir.join("run.json"), json + "\n")?;
        let timings: BTreeMap<&str, f64> = self.timings.iter().map(|(k, v)| (k.as_str(), *v)).collect();
        std::fs::write(dir.join("timings.json"), serde_json::to_string_pretty(&timings)? + "\n")?;
        if !self.tables.is_empty() {
            let tdir = dir.join("tables");
            std::fs::create_dir_all(&tdir)?;
            for (name, t) in &self.tables {
                std::fs::write(tdir.join(format!("{name}.csv")), t.to_csv())?;
            }
        }
        if !self.fields.is_empty() {
            let fdir = dir.join("fields");
            std::fs::create_dir_all(&fdir)?;
            for (name, f) in &self.fields {
                write_field_csv(&fdir.join(format!("{name}.csv")), f)?;
            }
        }
        Ok(summary)
    }
}

/// One line per check, then the failures section.
pub fn render_text(summary: &RunSummary) -> String {
    let mut out = String::new();
    for s in &summary.stages {
        for c in &s.checks {
            let v = c.value.map_or("-".to_string(), |v| format!("{v:.4e}"));
            let _ = writeln!(
                out,
                "{} {:<44} {:>12} {}",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                v,
                c.condition
            );
        }
    }
    if summary.failures.is_empty() {
        let _ = writeln!(out, "all {} stage(s) passed", summary.stages.len());
    } else {
        let _ = writeln!(out, "FAILURES");
        for f in &summary.failures {
            let _ = writeln!(out, "  {}: {} {}", f.check, f.condition, f.detail);
        }
    }
    out
}
