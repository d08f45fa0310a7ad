use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::args::Format;

pub const SCHEMA_VERSION: u32 = 1;

/// One output row, columns in insertion order.
pub type Row = Map<String, Value>;

/// Everything a subcommand computes; cached as-is.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub rows: Vec<Row>,
    pub summary: Option<Value>,
    /// Identity checks that did not hold.
    pub failures: u64,
}

/// Converts a `json!({...})` object into a row.
pub fn row(v: Value) -> Row {
    match v {
        Value::Object(m) => m,
        other => panic!("row must be an object, got {other}"),
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        Value::Bool(b) => b.to_string(),
        Value::Number(n) => n.to_string(),
        other => other.to_string(),
    }
}

/// Union of row keys in first-seen order.
fn columns(rows: &[Row]) -> Vec<String> {
    let mut cols: Vec<String> = Vec::new();
    for r in rows {
        for k in r.keys() {
            if !cols.iter().any(|c| c == k) {
                cols.push(k.clone());
            }
        }
    }
    cols
}

pub fn render_csv(kind: &str, outcome: &Outcome, wall_time: f64) -> Result<Vec<u8>> {
    let cols = columns(&outcome.rows);
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let mut header = vec!["schema_version".to_string(), "kind".to_string()];
    header.extend(cols.iter().cloned());
    header.push("version".into());
    header.push("wall_time".into());
    w.write_record(&header)?;
    for r in &outcome.rows {
        let mut rec = vec![SCHEMA_VERSION.to_string(), kind.to_string()];
        rec.extend(cols.iter().map(|c| r.get(c).map(cell).unwrap_or_default()));
        rec.push(tqc_core::VERSION.to_string());
        rec.push(format!("{wall_time:.6}"));
        w.write_record(&rec)?;
    }
    w.into_inner().context("flushing CSV")
}

pub fn render_json(kind: &str, config: &Value, outcome: &Outcome, wall_time: f64) -> Result<Vec<u8>> {
    let record = serde_json::json!({
        "schema_version": SCHEMA_VERSION,
        "kind": kind,
        "version": tqc_core::VERSION,
        "config": config,
        "rows": outcome.rows,
        "summary": outcome.summary,
        "failures": outcome.failures,
        "wall_time": wall_time,
    });
    let mut bytes = serde_json::to_vec_pretty(&record)?;
    bytes.push(b'\n');
    Ok(bytes)
}

pub fn render(format: Format, kind: &str, config: &Value, outcome: &Outcome, wall_time: f64) -> Result<Vec<u8>> {
    match format {
        Format::Csv => render_csv(kind, outcome, wall_time),
        Format::Json => render_json(kind, config, outcome, wall_time),
    }
}

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .with_context(|| format!("creating temporary file in {}", dir.display()))?;
    tmp.write_all(bytes)?;
    tmp.persist(path)
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

pub fn emit(path: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match path {
        Some(p) => write_atomic(p, bytes),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()?;
            Ok(())
        }
    }
}
