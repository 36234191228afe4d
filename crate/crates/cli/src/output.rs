use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::Value;

use crate::args::Format;

/// Run metadata written ahead of every dataset.
#[derive(Debug, Clone, Serialize)]
pub struct Meta {
    pub tool: String,
    pub version: String,
    pub backend: String,
    pub precision: u32,
    pub seed: u64,
    pub config: Value,
    pub references: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Int(i64),
    Real(f64),
    Bool(bool),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Real(x) => fmt_real(*x),
            Cell::Bool(b) => (if *b { "1" } else { "0" }).to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Real(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

/// Shortest round-trip representation in scientific notation.
pub fn fmt_real(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else {
        format!("{x:e}")
    }
}

#[derive(Debug, Clone)]
pub enum Body {
    Table {
        columns: Vec<&'static str>,
        rows: Vec<Vec<Cell>>,
    },
    Record(Value),
}

#[derive(Debug, Clone)]
pub struct Dataset {
    pub name: String,
    pub meta: Meta,
    pub body: Body,
}

impl Dataset {
    pub fn table(name: impl Into<String>, meta: Meta, columns: Vec<&'static str>) -> Self {
        Dataset {
            name: name.into(),
            meta,
            body: Body::Table {
                columns,
                rows: Vec::new(),
            },
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        if let Body::Table { columns, rows } = &mut self.body {
            debug_assert_eq!(row.len(), columns.len());
            rows.push(row);
        }
    }

    pub fn reference(&mut self, key: &str, value: f64) {
        self.meta.references.insert(key.into(), value);
    }

    pub fn render(&self, format: Format) -> Result<Vec<u8>> {
        match format {
            Format::Csv => self.render_csv(),
            Format::Json => self.render_json(),
        }
    }

    fn render_csv(&self) -> Result<Vec<u8>> {
        let m = &self.meta;
        let mut out = Vec::new();
        writeln!(out, "# tool: {} {}", m.tool, m.version)?;
        writeln!(out, "# dataset: {}", self.name)?;
        writeln!(out, "# backend: {}", m.backend)?;
        writeln!(out, "# precision: {}", m.precision)?;
        writeln!(out, "# seed: {}", m.seed)?;
        writeln!(out, "# config: {}", serde_json::to_string(&m.config)?)?;
        for (k, v) in &m.references {
            writeln!(out, "# ref {k}: {}", fmt_real(*v))?;
        }
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        match &self.body {
            Body::Table { columns, rows } => {
                w.write_record(columns)?;
                for r in rows {
                    w.write_record(r.iter().map(Cell::render))?;
                }
            }
            Body::Record(Value::Object(map)) => {
                w.write_record(["key", "value"])?;
                for (k, v) in map {
                    let s = match v {
                        Value::String(s) => s.clone(),
                        Value::Number(x) => match x.as_f64() {
                            Some(f) if !x.is_i64() && !x.is_u64() => fmt_real(f),
                            _ => x.to_string(),
                        },
                        Value::Null => String::new(),
                        other => other.to_string(),
                    };
                    w.write_record([k.as_str(), s.as_str()])?;
                }
            }
            Body::Record(other) => {
                w.write_record(["value"])?;
                w.write_record([other.to_string()])?;
            }
        }
        Ok(w.into_inner().context("flushing csv")?)
    }

    fn render_json(&self) -> Result<Vec<u8>> {
        let body = match &self.body {
            Body::Table { columns, rows } => serde_json::json!({ "columns": columns, "rows": rows }),
            Body::Record(v) => serde_json::json!({ "report": v }),
        };
        let doc = serde_json::json!({ "dataset": self.name, "meta": self.meta, "data": body });
        let mut s = serde_json::to_vec_pretty(&doc)?;
        s.push(b'\n');
        Ok(s)
    }
}

/// Print datasets to stdout, or write `<dir>/<name>.<ext>` for each and list the paths on stderr.
pub fn emit(datasets: &[Dataset], format: Format, dir: Option<&Path>) -> Result<Vec<PathBuf>> {
    let ext = match format {
        Format::Csv => "csv",
        Format::Json => "json",
    };
    let mut written = Vec::new();
    match dir {
        Some(dir) => {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            for d in datasets {
                let path = dir.join(format!("{}.{ext}", d.name));
                fs::write(&path, d.render(format)?)
                    .with_context(|| format!("writing {}", path.display()))?;
                eprintln!("wrote {}", path.display());
                written.push(path);
            }
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            for (i, d) in datasets.iter().enumerate() {
                if i > 0 {
                    writeln!(lock)?;
                }
                lock.write_all(&d.render(format)?)?;
            }
        }
    }
    Ok(written)
}
