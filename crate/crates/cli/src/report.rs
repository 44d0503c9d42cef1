//! Run reports, tables and their on-disk form.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::Scenario;

/// One CSV cell. Floats are written with 17 significant digits.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Bool(bool),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(x) => format_float(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(i: usize) -> Self {
        Cell::Int(i as i64)
    }
}

impl From<u64> for Cell {
    fn from(i: u64) -> Self {
        Cell::Int(i as i64)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Bool(b)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

/// `{:.16e}` with non-finite values spelled `nan`, `inf`, `-inf`.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{x:.16e}")
    }
}

#[derive(Debug, Clone, PartialEq)]
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
        assert_eq!(row.len(), self.columns.len(), "row width for table {}", self.name);
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Vec<u8> {
        let mut writer = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        writer.write_record(&self.columns).expect("in-memory write");
        for row in &self.rows {
            writer.write_record(row.iter().map(Cell::render)).expect("in-memory write");
        }
        writer.into_inner().expect("in-memory flush")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Assertion {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct TableSummary {
    pub name: String,
    pub file: String,
    pub rows: usize,
}

/// Everything a run produced. Tables are kept in memory until written.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub tool: &'static str,
    pub version: &'static str,
    pub scenario: Scenario,
    pub passed: bool,
    pub wall_clock_seconds: f64,
    pub assertions: Vec<Assertion>,
    /// Verdicts that are reported but never fail a run.
    pub findings: BTreeMap<String, serde_json::Value>,
    /// Headline numbers.
    pub values: BTreeMap<String, f64>,
    pub tables: Vec<TableSummary>,
    #[serde(skip)]
    pub table_data: Vec<Table>,
}

impl RunReport {
    pub fn table(&self, name: &str) -> Option<&Table> {
        self.table_data.iter().find(|t| t.name == name)
    }

    pub fn csv_path(out_dir: &Path, output: &str, table: &str) -> PathBuf {
        out_dir.join(format!("{output}.{table}.csv"))
    }

    pub fn summary_path(out_dir: &Path, output: &str) -> PathBuf {
        out_dir.join(format!("{output}.summary.json"))
    }

    /// Writes one CSV per table and the JSON summary; returns the paths.
    pub fn write(&self, out_dir: &Path) -> std::io::Result<Vec<PathBuf>> {
        fs::create_dir_all(out_dir)?;
        let mut written = Vec::new();
        for table in &self.table_data {
            let path = Self::csv_path(out_dir, &self.scenario.output, &table.name);
            fs::write(&path, table.to_csv())?;
            written.push(path);
        }
        let path = Self::summary_path(out_dir, &self.scenario.output);
        let mut json = serde_json::to_vec_pretty(self).map_err(std::io::Error::other)?;
        json.push(b'\n');
        fs::write(&path, json)?;
        written.push(path);
        Ok(written)
    }
}
