//! CSV and JSON emitters.
//!
//! CSV: `#`-prefixed metadata lines, one header row, then data rows; `\n`
//! line endings; reals written as `{:.16e}` (17 significant digits) so that
//! parsing returns the identical `f64`. JSON: a versioned envelope
//! `{schema, schema_version, metadata, result}` with keys in sorted order.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde_json::{json, Map, Value};

use super::{Command, Format, RunConfig};
use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Real(f64),
    Int(u64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Real(v) => format!("{v:.16e}"),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: Vec<S>) -> Self {
        Table {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// Two-column `quantity,value` table listing every leaf of a JSON value,
    /// with paths such as `qcrb_nm2[1]` or `matrix.rows[0][2]`.
    pub fn flattened(value: &Value) -> Self {
        let mut t = Table::new(vec!["quantity", "value"]);
        flatten_into(&mut t, String::new(), value);
        t
    }
}

fn flatten_into(t: &mut Table, path: String, v: &Value) {
    match v {
        Value::Object(m) => {
            for (k, child) in m {
                let p = if path.is_empty() {
                    k.clone()
                } else {
                    format!("{path}.{k}")
                };
                flatten_into(t, p, child);
            }
        }
        Value::Array(items) => {
            for (i, child) in items.iter().enumerate() {
                flatten_into(t, format!("{path}[{i}]"), child);
            }
        }
        Value::Number(n) => {
            let cell = match n.as_u64() {
                Some(u) => Cell::Int(u),
                None => Cell::Real(n.as_f64().unwrap_or(f64::NAN)),
            };
            t.push(vec![Cell::Text(path), cell]);
        }
        Value::String(s) => t.push(vec![Cell::Text(path), Cell::Text(s.clone())]),
        Value::Bool(b) => t.push(vec![Cell::Text(path), Cell::Text(b.to_string())]),
        Value::Null => t.push(vec![Cell::Text(path), Cell::Text("null".into())]),
    }
}

/// Result of one command, ready to be written in either format.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub command: Command,
    pub config: RunConfig,
    /// Quadrature actually used, when one was.
    pub quadrature: Option<(usize, usize)>,
    pub result: Value,
    pub table: Table,
}

impl RunOutput {
    pub fn metadata(&self) -> Value {
        let params: Map<String, Value> = self
            .config
            .params
            .iter()
            .map(|(k, v)| (k.clone(), Value::String(v.clone())))
            .collect();
        json!({
            "tool": env!("CARGO_PKG_NAME"),
            "version": env!("CARGO_PKG_VERSION"),
            "command": self.command.name(),
            "parameters": params,
            "seed": if self.command.is_stochastic() { json!(self.config.seed) } else { Value::Null },
            "quadrature": self.quadrature.map(|(t, p)| json!({"n_theta": t, "n_phi": p})),
        })
    }

    pub fn to_json(&self) -> String {
        let doc = json!({
            "schema": format!("qloc/{}", self.command.name()),
            "schema_version": SCHEMA_VERSION,
            "metadata": self.metadata(),
            "result": self.result,
        });
        let mut s = serde_json::to_string_pretty(&doc).expect("JSON values always serialize");
        s.push('\n');
        s
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# tool: {}", env!("CARGO_PKG_NAME"));
        let _ = writeln!(s, "# version: {}", env!("CARGO_PKG_VERSION"));
        let _ = writeln!(s, "# command: {}", self.command.name());
        for (k, v) in &self.config.params {
            let _ = writeln!(s, "# param.{k}: {v}");
        }
        if self.command.is_stochastic() {
            let _ = writeln!(s, "# seed: {}", self.config.seed);
        }
        if let Some((t, p)) = self.quadrature {
            let _ = writeln!(s, "# quadrature: {t}x{p}");
        }
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        let write = || -> csv::Result<Vec<u8>> {
            w.write_record(&self.table.columns)?;
            for row in &self.table.rows {
                w.write_record(row.iter().map(Cell::render))?;
            }
            w.into_inner().map_err(|e| e.into_error().into())
        };
        let body = write().expect("writing CSV to memory cannot fail");
        s.push_str(std::str::from_utf8(&body).expect("CSV fields are UTF-8"));
        s
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

pub fn emit_csv(out: &RunOutput, path: &Path) -> Result<()> {
    write_file(path, &out.to_csv())
}

pub fn emit_json(out: &RunOutput, path: &Path) -> Result<()> {
    write_file(path, &out.to_json())
}

/// Writes to the configured path, or returns the text for standard output.
pub fn emit(out: &RunOutput) -> Result<Option<String>> {
    let text = out.render(out.config.format);
    match &out.config.output {
        Some(p) => write_file(p, &text).map(|_| None),
        None => Ok(Some(text)),
    }
}

/// A parsed CSV file as written by [`RunOutput::to_csv`].
#[derive(Debug, Clone, PartialEq)]
pub struct CsvFile {
    pub metadata: BTreeMap<String, String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvFile {
    pub fn column(&self, name: &str) -> Option<Vec<&str>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i].as_str()).collect())
    }

    pub fn column_f64(&self, name: &str) -> Result<Vec<f64>> {
        self.column(name)
            .ok_or_else(|| Error::Config(format!("no column {name:?}")))?
            .into_iter()
            .map(|v| {
                v.parse::<f64>()
                    .map_err(|_| Error::Config(format!("not a number: {v:?}")))
            })
            .collect()
    }
}

pub fn read_csv(text: &str) -> Result<CsvFile> {
    let mut metadata = BTreeMap::new();
    let mut rest = text;
    while let Some(line) = rest.strip_prefix('#') {
        let (meta, tail) = line.split_once('\n').unwrap_or((line, ""));
        if let Some((k, v)) = meta.trim().split_once(": ") {
            metadata.insert(k.to_string(), v.to_string());
        }
        rest = tail;
    }
    let bad = |e: csv::Error| Error::Config(format!("malformed CSV: {e}"));
    let mut reader = csv::Reader::from_reader(rest.as_bytes());
    let columns: Vec<String> = reader
        .headers()
        .map_err(bad)?
        .iter()
        .map(str::to_string)
        .collect();
    let rows = reader
        .records()
        .map(|r| r.map(|rec| rec.iter().map(str::to_string).collect()))
        .collect::<csv::Result<Vec<Vec<String>>>>()
        .map_err(bad)?;
    Ok(CsvFile {
        metadata,
        columns,
        rows,
    })
}
