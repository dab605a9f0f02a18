//! Flat key/value records written as a one-row CSV or a JSON object.

use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use ballquad::harness::ReportFormat;
use serde_json::{Map, Value};

#[derive(Debug, Default)]
pub struct Record {
    fields: Vec<(String, Value)>,
}

impl Record {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, key: &str, value: impl Into<Value>) -> &mut Self {
        self.fields.push((key.to_string(), value.into()));
        self
    }

    /// Floats go through the extended form so that `inf` and `nan` survive
    /// in JSON.
    pub fn num(&mut self, key: &str, v: f64) -> &mut Self {
        let value = if v.is_finite() { Value::from(v) } else { Value::from(v.to_string()) };
        self.push(key, value)
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Number(n) => match n.as_f64() {
            Some(f) if n.is_f64() => format!("{f:.16e}"),
            _ => n.to_string(),
        },
        other => other.to_string(),
    }
}

/// Rows sharing one key set, as CSV with a header or a JSON array.
pub fn render(records: &[Record], format: ReportFormat) -> Result<String> {
    match format {
        ReportFormat::Csv => {
            let mut out = String::new();
            if let Some(first) = records.first() {
                let keys: Vec<&str> = first.fields.iter().map(|(k, _)| k.as_str()).collect();
                out.push_str(&keys.join(","));
                out.push('\n');
            }
            for r in records {
                let cells: Vec<String> = r.fields.iter().map(|(_, v)| cell(v)).collect();
                out.push_str(&cells.join(","));
                out.push('\n');
            }
            Ok(out)
        }
        ReportFormat::Json => {
            let rows: Vec<Value> = records
                .iter()
                .map(|r| Value::Object(r.fields.iter().cloned().collect::<Map<_, _>>()))
                .collect();
            let v = if rows.len() == 1 { rows.into_iter().next().unwrap() } else { Value::Array(rows) };
            let mut s = serde_json::to_string_pretty(&v)?;
            s.push('\n');
            Ok(s)
        }
    }
}

/// Writes `text` to `out`, or to stdout when no path is given.
pub fn deliver(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display())),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}
