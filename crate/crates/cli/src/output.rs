//! Tables and their CSV and JSON renderings.
//!
//! Floats are written as `{:.14e}`, fifteen significant digits, so reruns are
//! byte-identical and every value reloads to exactly what was printed.

use std::io::{self, Read, Write};

use serde::Serialize;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Bool(bool),
    Text(String),
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

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
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

pub fn format_float(x: f64) -> String {
    format!("{x:.14e}")
}

impl Cell {
    pub fn render(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => format_float(*v),
            Cell::Bool(v) => v.to_string(),
            Cell::Text(v) => v.clone(),
        }
    }

    /// Inverse of [`Cell::render`]. Floats are recognised by their exponent.
    pub fn parse(field: &str) -> Cell {
        if let Ok(v) = field.parse::<i64>() {
            return Cell::Int(v);
        }
        if field.contains(['e', 'E']) || field.contains("inf") || field == "NaN" {
            if let Ok(v) = field.parse::<f64>() {
                return Cell::Float(v);
            }
        }
        match field {
            "true" => Cell::Bool(true),
            "false" => Cell::Bool(false),
            _ => Cell::Text(field.to_owned()),
        }
    }

    fn json(&self) -> serde_json::Value {
        match self {
            Cell::Int(v) => (*v).into(),
            Cell::Float(v) => (*v).into(),
            Cell::Bool(v) => (*v).into(),
            Cell::Text(v) => v.clone().into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
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
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<&Cell>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| &r[i]).collect())
    }

    pub fn write_csv<W: Write>(&self, out: W) -> io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render))?;
        }
        w.flush()
    }

    pub fn read_csv<R: Read>(input: R) -> csv::Result<Table> {
        let mut r = csv::Reader::from_reader(input);
        let columns = r.headers()?.iter().map(str::to_owned).collect();
        let rows = r
            .records()
            .map(|rec| rec.map(|rec| rec.iter().map(Cell::parse).collect()))
            .collect::<csv::Result<_>>()?;
        Ok(Table { columns, rows })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// Everything an experiment produces: a plot-ready table, scalar results,
/// and the assertions that decide the exit status.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Report {
    pub experiment: String,
    pub table: Table,
    pub summary: Vec<(String, String)>,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn new(experiment: &str, table: Table) -> Self {
        Report {
            experiment: experiment.to_owned(),
            table,
            ..Report::default()
        }
    }

    pub fn note(&mut self, key: &str, value: impl ToString) {
        self.summary.push((key.to_owned(), value.to_string()));
    }

    pub fn check(&mut self, name: &str, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check {
            name: name.to_owned(),
            passed,
            detail: detail.into(),
        });
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn write_json<W: Write>(&self, mut out: W) -> io::Result<()> {
        let rows: Vec<Vec<serde_json::Value>> = self
            .table
            .rows
            .iter()
            .map(|r| r.iter().map(Cell::json).collect())
            .collect();
        let summary: serde_json::Map<String, serde_json::Value> = self
            .summary
            .iter()
            .map(|(k, v)| (k.clone(), v.clone().into()))
            .collect();
        let doc = serde_json::json!({
            "experiment": self.experiment,
            "columns": self.table.columns,
            "rows": rows,
            "summary": summary,
            "checks": self.checks,
        });
        serde_json::to_writer_pretty(&mut out, &doc)?;
        writeln!(out)
    }

    /// Human-readable summary and check lines.
    pub fn write_log<W: Write>(&self, mut out: W) -> io::Result<()> {
        for (k, v) in &self.summary {
            writeln!(out, "{k} = {v}")?;
        }
        for c in &self.checks {
            let tag = if c.passed { "PASS" } else { "FAIL" };
            writeln!(out, "{tag}  {}: {}", c.name, c.detail)?;
        }
        Ok(())
    }
}
