//! Deterministic CSV and JSON emission.

use std::io::Write;

use serde_json::{json, Map, Value};

use crate::config::OutputFormat;

pub const CSV_VERSION: &str = "# itflow-csv/1";
pub const JSON_VERSION: &str = "itflow-json/1";

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Empty,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(v) => v.to_string(),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(v) if v.is_finite() => json!(v),
            Cell::Num(_) | Cell::Empty => Value::Null,
            Cell::Int(v) => json!(v),
            Cell::Text(s) => json!(s),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Num)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_owned())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    /// Free-text remarks; trailing comment lines in CSV.
    pub notes: Vec<String>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

pub fn render(table: &Table, command: &str, format: OutputFormat) -> Vec<u8> {
    match format {
        OutputFormat::Csv => {
            let mut out = format!("{CSV_VERSION}\n").into_bytes();
            {
                let mut w = csv::Writer::from_writer(&mut out);
                w.write_record(&table.columns).expect("writing to memory");
                for row in &table.rows {
                    w.write_record(row.iter().map(Cell::csv))
                        .expect("writing to memory");
                }
                w.flush().expect("writing to memory");
            }
            for note in &table.notes {
                writeln!(out, "# {note}").expect("writing to memory");
            }
            out
        }
        OutputFormat::Json => {
            let rows: Vec<Value> = table
                .rows
                .iter()
                .map(|row| {
                    let obj: Map<String, Value> = table
                        .columns
                        .iter()
                        .cloned()
                        .zip(row.iter().map(Cell::json))
                        .collect();
                    Value::Object(obj)
                })
                .collect();
            let doc = json!({
                "format": JSON_VERSION,
                "command": command,
                "columns": table.columns,
                "rows": rows,
                "notes": table.notes,
            });
            let mut out = serde_json::to_vec_pretty(&doc).expect("serializable");
            out.push(b'\n');
            out
        }
    }
}

/// Machine-readable failure record.
pub fn render_error(name: &str, message: &str, command: &str, format: OutputFormat) -> Vec<u8> {
    match format {
        OutputFormat::Csv => {
            let mut t = Table::new(["error", "message"]);
            t.push(vec![name.into(), message.into()]);
            render(&t, command, format)
        }
        OutputFormat::Json => {
            let doc = json!({
                "format": JSON_VERSION,
                "command": command,
                "error": { "name": name, "message": message },
            });
            let mut out = serde_json::to_vec_pretty(&doc).expect("serializable");
            out.push(b'\n');
            out
        }
    }
}
