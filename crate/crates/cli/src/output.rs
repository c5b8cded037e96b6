use std::io::Write;

use mflab_core::report::{Status, SCHEMA_VERSION};
use mflab_core::MflabError;
use serde_json::{json, Map, Value};

use crate::args::{Format, RunConfig};
use crate::{exit_code_for_error, CliError, CliResult};

/// A finished command: the JSON payload plus the rows used for table and CSV output.
#[derive(Debug)]
pub struct Report {
    pub command: String,
    pub status: Status,
    pub trunc: usize,
    pub seed: u64,
    pub body: Map<String, Value>,
    pub rows: Vec<Map<String, Value>>,
    /// Fixed column order; derived from the rows when absent.
    pub columns: Option<Vec<String>>,
}

impl Report {
    pub fn new(command: &str, status: Status, trunc: usize, seed: u64, body: Value) -> Self {
        let body = match body {
            Value::Object(m) => m,
            other => Map::from_iter([("value".to_string(), other)]),
        };
        Report {
            command: command.to_string(),
            status,
            trunc,
            seed,
            body,
            rows: Vec::new(),
            columns: None,
        }
    }

    pub fn with_rows(mut self, rows: Vec<Map<String, Value>>) -> Self {
        self.rows = rows;
        self
    }

    pub fn with_columns(mut self, cols: &[&str]) -> Self {
        self.columns = Some(cols.iter().map(|c| c.to_string()).collect());
        self
    }

    pub fn to_json(&self) -> Value {
        let mut out = self.body.clone();
        out.insert("schema_version".into(), json!(SCHEMA_VERSION));
        out.insert("command".into(), json!(self.command));
        out.insert("status".into(), json!(self.status));
        out.insert("trunc".into(), json!(self.trunc));
        out.insert("seed".into(), json!(self.seed));
        Value::Object(out)
    }

    fn columns(&self) -> Vec<String> {
        if let Some(c) = &self.columns {
            return c.clone();
        }
        let mut cols: Vec<String> = Vec::new();
        for key in ["id", "file", "status"] {
            if self.rows.iter().any(|r| r.contains_key(key)) {
                cols.push(key.into());
            }
        }
        for r in &self.rows {
            for k in r.keys() {
                if !cols.contains(k) {
                    cols.push(k.clone());
                }
            }
        }
        cols
    }

    /// (header, rows) for tabular output; scalar body fields when there are no rows.
    fn table(&self) -> (Vec<String>, Vec<Vec<String>>) {
        if self.rows.is_empty() && self.columns.is_none() {
            let header = vec!["field".to_string(), "value".to_string()];
            let rows = self
                .to_json()
                .as_object()
                .unwrap()
                .iter()
                .map(|(k, v)| vec![k.clone(), cell(v)])
                .collect();
            return (header, rows);
        }
        let cols = self.columns();
        let rows = self
            .rows
            .iter()
            .map(|r| cols.iter().map(|c| r.get(c).map_or(String::new(), cell)).collect())
            .collect();
        (cols, rows)
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

/// Flattens an object one level: nested `data` objects are merged into the row.
pub fn row(v: &Value) -> Map<String, Value> {
    let mut out = Map::new();
    if let Value::Object(m) = v {
        for (k, x) in m {
            match (k.as_str(), x) {
                ("data", Value::Object(inner)) => out.extend(inner.clone()),
                _ => {
                    out.insert(k.clone(), x.clone());
                }
            }
        }
    }
    out
}

pub fn render(report: &Report, format: Format) -> CliResult<String> {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&report.to_json()).map_err(|e| CliError::Input(e.to_string()))?;
            s.push('\n');
            Ok(s)
        }
        Format::Table => {
            let (header, rows) = report.table();
            let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
            for r in &rows {
                for (w, c) in widths.iter_mut().zip(r) {
                    *w = (*w).max(c.chars().count());
                }
            }
            let line = |cells: &[String]| {
                let parts: Vec<String> = cells
                    .iter()
                    .zip(&widths)
                    .map(|(c, w)| format!("{c}{}", " ".repeat(w - c.chars().count())))
                    .collect();
                parts.join("  ").trim_end().to_string()
            };
            let mut out = format!(
                "{}: {} (trunc {}, seed {})\n",
                report.command,
                cell(&json!(report.status)),
                report.trunc,
                report.seed
            );
            out += &line(&header);
            out.push('\n');
            out += &line(&widths.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>());
            out.push('\n');
            for r in &rows {
                out += &line(r);
                out.push('\n');
            }
            Ok(out)
        }
        Format::Csv => {
            let (header, rows) = report.table();
            let mut w = csv::Writer::from_writer(Vec::new());
            let io = |e: csv::Error| CliError::Input(e.to_string());
            w.write_record(&header).map_err(io)?;
            for r in &rows {
                w.write_record(r).map_err(io)?;
            }
            let bytes = w.into_inner().map_err(|e| CliError::Input(e.to_string()))?;
            String::from_utf8(bytes).map_err(|e| CliError::Input(e.to_string()))
        }
    }
}

pub fn emit_report(report: &Report, config: &RunConfig) -> CliResult<()> {
    let text = render(report, config.format)?;
    let mut out = std::io::stdout().lock();
    out.write_all(text.as_bytes())
        .map_err(|e| CliError::Input(e.to_string()))
}

fn kind(e: &MflabError) -> String {
    let dbg = format!("{e:?}");
    dbg.split(|c: char| !c.is_alphanumeric())
        .next()
        .unwrap_or_default()
        .to_string()
}

/// Machine-readable error payload on stdout (JSON format only).
pub fn error_json(e: &CliError, command: &str, config: &RunConfig) -> Value {
    let mut err = Map::new();
    err.insert("message".into(), json!(e.to_string()));
    match e {
        CliError::Input(_) => {
            err.insert("kind".into(), json!("InputError"));
        }
        CliError::Engine(me) => {
            err.insert("kind".into(), json!(kind(me)));
            match me {
                MflabError::Parse { pos, .. } => {
                    err.insert("position".into(), json!(pos));
                }
                MflabError::NotStabilized {
                    suggested,
                    value_low,
                    value_high,
                    ..
                } => {
                    err.insert("suggested_trunc".into(), json!(suggested));
                    err.insert("values".into(), json!([value_low, value_high]));
                }
                MflabError::PrecisionTooLow { suggested, .. } => {
                    err.insert("suggested_trunc".into(), json!(suggested));
                }
                _ => {}
            }
        }
    }
    json!({
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "error": err,
        "exit_code": exit_code_for_error(e),
        "trunc": config.trunc,
        "seed": config.seed,
    })
}

pub fn emit_error(e: &CliError, command: &str, config: &RunConfig) {
    if config.format == Format::Json {
        if let Ok(s) = serde_json::to_string_pretty(&error_json(e, command, config)) {
            println!("{s}");
        }
    }
}
