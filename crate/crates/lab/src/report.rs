//! Tables written as CSV plus a JSON mirror. Every row ends with the
//! provenance columns `seed`, `reps` and `config_hash`.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{Map, Value};

use crate::config::ExperimentConfig;
use crate::error::Result;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(u64),
    Float(f64),
    Text(String),
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Int(v) => write!(f, "{v}"),
            Cell::Float(v) if v.is_nan() => f.write_str("nan"),
            Cell::Float(v) if v.is_infinite() => f.write_str(if *v > 0.0 { "inf" } else { "-inf" }),
            Cell::Float(v) => write!(f, "{v:e}"),
            Cell::Text(s) => f.write_str(s),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_owned())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl Cell {
    fn to_json(&self) -> Value {
        match self {
            Cell::Int(v) => Value::from(*v),
            Cell::Float(v) if v.is_finite() => Value::from(*v),
            Cell::Float(_) => Value::from(self.to_string()),
            Cell::Text(s) => Value::from(s.as_str()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: &'static str,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &'static str, columns: &[&'static str]) -> Self {
        Table { name, columns: columns.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len(), "row width for {}", self.name);
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| *c == name)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Provenance<'a> {
    pub seed: u64,
    pub reps: usize,
    pub config_hash: &'a str,
}

impl<'a> Provenance<'a> {
    pub fn of(cfg: &ExperimentConfig, hash: &'a str) -> Self {
        Provenance { seed: cfg.seed, reps: cfg.reps, config_hash: hash }
    }

    fn cells(&self) -> [Cell; 3] {
        [Cell::Int(self.seed), Cell::Int(self.reps as u64), Cell::Text(self.config_hash.to_owned())]
    }
}

const PROVENANCE_COLUMNS: [&str; 3] = ["seed", "reps", "config_hash"];

pub fn csv_bytes(table: &Table, prov: Provenance<'_>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let header = table.columns.iter().copied().chain(PROVENANCE_COLUMNS);
    w.write_record(header)?;
    for row in &table.rows {
        let cells = row.iter().cloned().chain(prov.cells()).map(|c| c.to_string());
        w.write_record(cells)?;
    }
    w.flush()?;
    Ok(w.into_inner().map_err(|e| e.into_error())?)
}

#[derive(Serialize)]
struct JsonMirror<'a> {
    table: &'a str,
    config: &'a ExperimentConfig,
    config_hash: &'a str,
    rows: Vec<Map<String, Value>>,
    summary: &'a Map<String, Value>,
}

pub fn json_value(table: &Table, cfg: &ExperimentConfig, prov: Provenance<'_>, summary: &Map<String, Value>) -> Result<Value> {
    let rows = table
        .rows
        .iter()
        .map(|row| {
            let cells = row.iter().cloned().chain(prov.cells());
            table
                .columns
                .iter()
                .copied()
                .chain(PROVENANCE_COLUMNS)
                .zip(cells)
                .map(|(k, v)| (k.to_owned(), v.to_json()))
                .collect()
        })
        .collect();
    let mirror = JsonMirror { table: table.name, config: cfg, config_hash: prov.config_hash, rows, summary };
    Ok(serde_json::to_value(mirror)?)
}

/// Tables of one run plus free-form summary fields copied into every JSON mirror.
#[derive(Debug, Clone, Default)]
pub struct Report {
    pub tables: Vec<Table>,
    pub summary: Map<String, Value>,
}

impl Report {
    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    /// Writes `<name>.csv` and `<name>.json` for every table, returning the paths.
    pub fn write(&self, cfg: &ExperimentConfig, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let hash = cfg.hash();
        let prov = Provenance::of(cfg, &hash);
        let mut written = Vec::new();
        for t in &self.tables {
            let csv_path = dir.join(format!("{}.csv", t.name));
            fs::write(&csv_path, csv_bytes(t, prov)?)?;
            let json_path = dir.join(format!("{}.json", t.name));
            let mut text = serde_json::to_string_pretty(&json_value(t, cfg, prov, &self.summary)?)?;
            text.push('\n');
            fs::write(&json_path, text)?;
            written.push(csv_path);
            written.push(json_path);
        }
        Ok(written)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cells_render_non_finite_values() {
        assert_eq!(Cell::Float(f64::INFINITY).to_string(), "inf");
        assert_eq!(Cell::Float(f64::NAN).to_string(), "nan");
        assert_eq!(Cell::Float(0.25).to_string(), "2.5e-1");
        assert_eq!(Cell::Float(f64::INFINITY).to_json(), Value::from("inf"));
    }

    #[test]
    fn csv_carries_provenance() {
        let mut t = Table::new("t", &["a", "b"]);
        t.push(vec![1u64.into(), 0.5.into()]);
        let prov = Provenance { seed: 7, reps: 3, config_hash: "abcd" };
        let text = String::from_utf8(csv_bytes(&t, prov).unwrap()).unwrap();
        assert_eq!(text, "a,b,seed,reps,config_hash\n1,5e-1,7,3,abcd\n");
    }
}
