//! Rendering of results as JSON or CSV with 12 significant digits.

use std::io::Write;
use std::path::Path;

use serde_json::{Map, Number, Value};

use crate::CliError;

pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

/// Round every floating-point number in a JSON tree.
pub fn round_value(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = round_sig(n.as_f64().unwrap_or(0.0));
            Number::from_f64(x).map_or(Value::Null, Value::Number)
        }
        Value::Array(items) => Value::Array(items.into_iter().map(round_value).collect()),
        Value::Object(map) => Value::Object(map.into_iter().map(|(k, v)| (k, round_value(v))).collect()),
        other => other,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

fn cell(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

fn object_row(map: &Map<String, Value>, header: &[String]) -> Vec<String> {
    header.iter().map(|k| map.get(k).map(cell).unwrap_or_default()).collect()
}

impl Table {
    /// One row per object (or per array element); nested values are written
    /// as compact JSON.
    pub fn from_value(v: &Value) -> Table {
        match v {
            Value::Object(map) => {
                let header: Vec<String> = map.keys().cloned().collect();
                let rows = vec![object_row(map, &header)];
                Table { header, rows }
            }
            Value::Array(items) if items.iter().all(Value::is_object) && !items.is_empty() => {
                let mut header: Vec<String> = Vec::new();
                for item in items {
                    for k in item.as_object().into_iter().flat_map(|m| m.keys()) {
                        if !header.contains(k) {
                            header.push(k.clone());
                        }
                    }
                }
                let rows = items
                    .iter()
                    .filter_map(Value::as_object)
                    .map(|m| object_row(m, &header))
                    .collect();
                Table { header, rows }
            }
            Value::Array(items) => Table {
                header: vec!["value".into()],
                rows: items.iter().map(|x| vec![cell(x)]).collect(),
            },
            other => Table {
                header: vec!["value".into()],
                rows: vec![vec![cell(other)]],
            },
        }
    }

    fn render(&self) -> Result<String, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| CliError::Io(e.to_string());
        w.write_record(&self.header).map_err(io)?;
        for r in &self.rows {
            w.write_record(r).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| CliError::Io(e.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Write a result to `path` or stdout.
pub fn emit(value: Value, table: Option<Table>, format: Format, path: Option<&Path>) -> Result<(), CliError> {
    let value = round_value(value);
    let text = match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&value).map_err(|e| CliError::Io(e.to_string()))?;
            s.push('\n');
            s
        }
        Format::Csv => table.unwrap_or_else(|| Table::from_value(&value)).render()?,
    };
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Io(e.to_string())),
    }
}
