//! Experiment reports: metric tables written as CSV, plus a JSON envelope
//! carrying the configuration, seed, tool version and timings.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use crate::HarnessError;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
}

impl Cell {
    /// Integers as-is, floats with 17 significant digits.
    pub fn render(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => format_float(*v),
            Cell::Text(s) => s.clone(),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Text(if v { "pass" } else { "fail" }.into())
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.into())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

/// `{:.16e}` keeps 17 significant digits, enough to round-trip an `f64`.
pub fn format_float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self { name: name.into(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Values of a numeric column; text cells are skipped.
    pub fn floats(&self, name: &str) -> Vec<f64> {
        let Some(i) = self.column(name) else {
            return Vec::new();
        };
        self.rows
            .iter()
            .filter_map(|r| match &r[i] {
                Cell::Float(v) => Some(*v),
                Cell::Int(v) => Some(*v as f64),
                Cell::Text(_) => None,
            })
            .collect()
    }

    pub fn to_csv(&self) -> Result<String, HarnessError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render))?;
        }
        let bytes = w.into_inner().map_err(|e| HarnessError::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    fn to_json(&self) -> Value {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| Value::Object(self.columns.iter().cloned().zip(r.iter().map(|c| json!(c))).collect()))
            .collect();
        json!({ "name": self.name, "columns": self.columns, "rows": rows })
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentReport {
    pub experiment: String,
    pub measure: String,
    pub seed: Option<u64>,
    /// Everything needed to rerun the experiment.
    pub config: Value,
    /// Set when the reported limit law is not a theorem.
    pub conjectural: bool,
    pub notes: Vec<String>,
    pub tables: Vec<Table>,
    /// Wall-clock seconds per grid point; kept out of the CSV output.
    pub timings: Vec<(String, f64)>,
}

impl ExperimentReport {
    pub fn new(experiment: &str, measure: String, seed: Option<u64>, config: Value) -> Self {
        Self {
            experiment: experiment.into(),
            measure,
            seed,
            config,
            conjectural: false,
            notes: Vec::new(),
            tables: Vec::new(),
            timings: Vec::new(),
        }
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    /// All tables, each preceded by a `# name` line, separated by blank lines.
    pub fn to_csv(&self) -> Result<String, HarnessError> {
        let mut out = String::new();
        for (i, t) in self.tables.iter().enumerate() {
            if i > 0 {
                out.push('\n');
            }
            if self.tables.len() > 1 {
                writeln!(out, "# {}", t.name).unwrap();
            }
            out.push_str(&t.to_csv()?);
        }
        Ok(out)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "experiment": self.experiment,
            "measure": self.measure,
            "seed": self.seed,
            "tool_version": TOOL_VERSION,
            "status": if self.conjectural { "CONJECTURAL" } else { "theorem" },
            "config": self.config,
            "notes": self.notes,
            "tables": self.tables.iter().map(Table::to_json).collect::<Vec<_>>(),
            "timings_seconds": self.timings.iter().map(|(k, v)| json!({ "point": k, "seconds": v })).collect::<Vec<_>>(),
        })
    }

    /// Writes one CSV per table next to `path` (the first at `path` itself,
    /// later ones as `<stem>_<table>.csv`) and the envelope as `<stem>.json`.
    pub fn write_csv_files(&self, path: &Path) -> Result<Vec<PathBuf>, HarnessError> {
        let mut written = Vec::new();
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("report").to_string();
        let dir = path.parent().unwrap_or(Path::new(""));
        for (i, t) in self.tables.iter().enumerate() {
            let target = if i == 0 { path.to_path_buf() } else { dir.join(format!("{stem}_{}.csv", t.name)) };
            std::fs::write(&target, t.to_csv()?)?;
            written.push(target);
        }
        let envelope = dir.join(format!("{stem}.json"));
        std::fs::write(&envelope, serde_json::to_string_pretty(&self.to_json())?)?;
        written.push(envelope);
        Ok(written)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for v in [0.1, 1.0 / 3.0, 6.02214076e23, -2.5e-300, 0.0] {
            assert_eq!(format_float(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn csv_has_header_and_rows() {
        let mut t = Table::new("d", &["x", "n", "ok"]);
        t.push(vec![0.5.into(), 3u64.into(), true.into()]);
        assert_eq!(t.to_csv().unwrap(), "x,n,ok\n5.0000000000000000e-1,3,pass\n");
        assert_eq!(t.floats("x"), vec![0.5]);
    }

    #[test]
    fn envelope_excludes_nothing_needed_to_rerun() {
        let mut r = ExperimentReport::new("converge", "power:c=1,beta=0".into(), Some(4), json!({ "tol": 1e-12 }));
        r.timings.push(("x=0.9".into(), 0.01));
        let v = r.to_json();
        assert_eq!(v["seed"], 4);
        assert_eq!(v["config"]["tol"], 1e-12);
        assert_eq!(v["tool_version"], TOOL_VERSION);
        assert!(!r.to_csv().unwrap().contains("0.01"));
    }
}
