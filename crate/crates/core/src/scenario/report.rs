//! Tabular report type and byte-stable CSV/JSON emission.
//!
//! Float cells print through Rust's shortest round-trip formatting in both
//! formats, so re-parsing reproduces every f64 bit-exactly and two runs of
//! the same scenario emit identical bytes.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// One table cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Int(i64),
    Float(f64),
    Str(String),
}

impl Value {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Value::Int(v) => Some(*v as f64),
            Value::Float(v) => Some(*v),
            Value::Str(_) => None,
        }
    }
}

impl std::fmt::Display for Value {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Value::Int(v) => write!(f, "{v}"),
            Value::Float(v) => write!(f, "{v}"),
            Value::Str(v) => f.write_str(v),
        }
    }
}

impl From<u32> for Value {
    fn from(v: u32) -> Value {
        Value::Int(v as i64)
    }
}

impl From<u64> for Value {
    fn from(v: u64) -> Value {
        Value::Int(v as i64)
    }
}

impl From<f64> for Value {
    fn from(v: f64) -> Value {
        Value::Float(v)
    }
}

impl From<&str> for Value {
    fn from(v: &str) -> Value {
        Value::Str(v.to_string())
    }
}

impl From<String> for Value {
    fn from(v: String) -> Value {
        Value::Str(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<ReportFormat> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(Error::unknown("report format", other)),
        }
    }
}

/// Rectangular result table with an ordered metadata block.
#[derive(Debug, Clone)]
pub struct ReportTable {
    pub metadata: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl ReportTable {
    pub fn new(columns: Vec<String>) -> ReportTable {
        ReportTable {
            metadata: Vec::new(),
            columns,
            rows: Vec::new(),
        }
    }

    pub fn meta(&mut self, key: impl Into<String>, value: impl ToString) {
        self.metadata.push((key.into(), value.to_string()));
    }

    pub fn push_row(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// All values of one column as f64, for assertions over reports.
    pub fn column_f64(&self, name: &str) -> Result<Vec<f64>> {
        let idx = self
            .column_index(name)
            .ok_or_else(|| Error::unknown("column", name))?;
        self.rows
            .iter()
            .map(|row| {
                row[idx]
                    .as_f64()
                    .ok_or_else(|| Error::invalid(format!("column `{name}`"), "not numeric"))
            })
            .collect()
    }

    pub fn emit(&self, format: ReportFormat) -> String {
        match format {
            ReportFormat::Csv => self.to_csv(),
            ReportFormat::Json => self.to_json(),
        }
    }

    /// CSV with `# key = value` metadata comments, a header row, one line
    /// per data row, and a trailing newline. Cell values never contain
    /// commas by construction.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (key, value) in &self.metadata {
            out.push_str("# ");
            out.push_str(key);
            out.push_str(" = ");
            out.push_str(value);
            out.push('\n');
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let mut first = true;
            for cell in row {
                if !first {
                    out.push(',');
                }
                first = false;
                out.push_str(&cell.to_string());
            }
            out.push('\n');
        }
        out
    }

    /// JSON object with sorted-key "metadata" (including the column list)
    /// and "rows" as arrays of cells.
    pub fn to_json(&self) -> String {
        let meta: BTreeMap<&str, serde_json::Value> = self
            .metadata
            .iter()
            .map(|(k, v)| (k.as_str(), serde_json::Value::String(v.clone())))
            .chain(std::iter::once((
                "columns",
                serde_json::Value::Array(
                    self.columns
                        .iter()
                        .map(|c| serde_json::Value::String(c.clone()))
                        .collect(),
                ),
            )))
            .collect();
        let rows: Vec<serde_json::Value> = self
            .rows
            .iter()
            .map(|row| {
                serde_json::Value::Array(row.iter().map(json_cell).collect())
            })
            .collect();
        let doc = serde_json::json!({ "metadata": meta, "rows": rows });
        let mut text = serde_json::to_string_pretty(&doc).expect("report serialization");
        text.push('\n');
        text
    }
}

fn json_cell(value: &Value) -> serde_json::Value {
    match value {
        Value::Int(v) => serde_json::Value::from(*v),
        Value::Float(v) => {
            serde_json::Number::from_f64(*v).map_or(serde_json::Value::Null, serde_json::Value::Number)
        }
        Value::Str(v) => serde_json::Value::String(v.clone()),
    }
}
