//! Tables and their CSV/JSON serialization.
//!
//! Floats are written as `{:.16e}` (17 significant digits) in CSV and as shortest round-trip
//! numbers in JSON, so identical inputs give byte-identical files.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};

use crate::config::Format;
use crate::error::Result;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(i64),
    Text(String),
    Bool(bool),
    /// Empty field in CSV, `null` in JSON.
    Missing,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Float(v) if v.is_finite() => format!("{v:.16e}"),
            Cell::Float(v) => v.to_string(),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
            Cell::Missing => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Float(v) => serde_json::Number::from_f64(*v).map_or(Value::Null, Value::Number),
            Cell::Int(v) => json!(v),
            Cell::Text(s) => json!(s),
            Cell::Bool(b) => json!(b),
            Cell::Missing => Value::Null,
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}

impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Missing, Into::into)
    }
}

/// One output artifact: a named table with extra `#` comment lines after the config echo.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    /// File stem, e.g. `spectrum`.
    pub name: String,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    pub notes: Vec<String>,
}

impl Table {
    pub fn new(name: impl Into<String>, columns: &[&'static str]) -> Self {
        Self { name: name.into(), columns: columns.to_vec(), rows: Vec::new(), notes: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn note(&mut self, line: impl Into<String>) {
        self.notes.push(line.into());
    }

    pub fn write_csv<W: Write>(&self, echo: &str, w: W) -> Result<()> {
        let mut w = w;
        writeln!(w, "# config: {echo}")?;
        for n in &self.notes {
            writeln!(w, "# {n}")?;
        }
        let mut csv = csv::WriterBuilder::new().from_writer(w);
        csv.write_record(&self.columns)?;
        for row in &self.rows {
            csv.write_record(row.iter().map(Cell::csv))?;
        }
        csv.flush()?;
        Ok(())
    }

    pub fn to_json(&self, echo: &str) -> Value {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                let obj: Map<String, Value> = self.columns.iter().zip(r).map(|(c, v)| (c.to_string(), v.json())).collect();
                Value::Object(obj)
            })
            .collect();
        json!({ "name": self.name, "config": echo, "notes": self.notes, "columns": self.columns, "rows": rows })
    }
}

/// Writes tables to `<dir>/<name>.<ext>`, or to `stdout` when no directory is given.
/// Returns the files written.
pub fn emit(tables: &[Table], echo: &str, format: Format, dir: Option<&Path>, stdout: &mut dyn Write) -> Result<Vec<PathBuf>> {
    let Some(dir) = dir else {
        match format {
            Format::Csv => {
                for (i, t) in tables.iter().enumerate() {
                    if i > 0 {
                        writeln!(stdout)?;
                    }
                    t.write_csv(echo, &mut *stdout)?;
                }
            }
            Format::Json => {
                let v = match tables {
                    [t] => t.to_json(echo),
                    _ => Value::Array(tables.iter().map(|t| t.to_json(echo)).collect()),
                };
                serde_json::to_writer_pretty(&mut *stdout, &v)?;
                writeln!(stdout)?;
            }
        }
        return Ok(Vec::new());
    };
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for t in tables {
        let path = dir.join(format!("{}.{}", t.name, if format == Format::Csv { "csv" } else { "json" }));
        let file = std::io::BufWriter::new(std::fs::File::create(&path)?);
        match format {
            Format::Csv => t.write_csv(echo, file)?,
            Format::Json => {
                let mut file = file;
                serde_json::to_writer_pretty(&mut file, &t.to_json(echo))?;
                writeln!(file)?;
            }
        }
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_uses_seventeen_digits() {
        let mut t = Table::new("t", &["x", "k", "tag", "gap"]);
        t.push(vec![0.1.into(), 3i64.into(), "a".into(), Cell::Missing]);
        let mut buf = Vec::new();
        t.write_csv("a=1", &mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert_eq!(s, "# config: a=1\nx,k,tag,gap\n1.0000000000000001e-1,3,a,\n");
        let back: f64 = "1.0000000000000001e-1".parse().unwrap();
        assert_eq!(back, 0.1);
    }

    #[test]
    fn json_rows_are_keyed_by_column() {
        let mut t = Table::new("t", &["x", "ok"]);
        t.push(vec![f64::NAN.into(), true.into()]);
        let v = t.to_json("");
        assert_eq!(v["rows"][0]["x"], Value::Null);
        assert_eq!(v["rows"][0]["ok"], json!(true));
    }
}
