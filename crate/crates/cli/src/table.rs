//! Row-oriented output shared by every subcommand.
//!
//! A table has CSV columns followed by optional JSON-only columns. Missing or
//! non-finite numbers become empty CSV cells and JSON `null`.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use clap::ValueEnum;
use serde_json::{Map, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    /// Shortest round-trip representation.
    Num(f64),
    /// 17 significant digits in scientific notation.
    Sci(f64),
    Int(u64),
    Bool(bool),
    Text(String),
    Empty,
}

impl Cell {
    pub fn opt_num(v: Option<f64>) -> Cell {
        v.map_or(Cell::Empty, Cell::Num)
    }

    fn csv(&self) -> String {
        match *self {
            Cell::Num(v) if v.is_finite() => format!("{v:?}"),
            Cell::Sci(v) if v.is_finite() => format!("{v:.16e}"),
            Cell::Int(v) => v.to_string(),
            Cell::Bool(v) => v.to_string(),
            Cell::Text(ref s) => s.clone(),
            _ => String::new(),
        }
    }

    fn json(&self) -> Value {
        match *self {
            Cell::Num(v) | Cell::Sci(v) => serde_json::Number::from_f64(v).map_or(Value::Null, Value::Number),
            Cell::Int(v) => Value::from(v),
            Cell::Bool(v) => Value::Bool(v),
            Cell::Text(ref s) => Value::String(s.clone()),
            Cell::Empty => Value::Null,
        }
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

pub struct Table {
    columns: Vec<&'static str>,
    csv_width: usize,
    rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Table {
            columns: columns.to_vec(),
            csv_width: columns.len(),
            rows: Vec::new(),
        }
    }

    /// Adds columns that appear only in JSON output.
    pub fn with_json_only(mut self, extra: &[&'static str]) -> Self {
        self.columns.extend_from_slice(extra);
        self
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width does not match columns");
        self.rows.push(row);
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|r| {
                    let obj: Map<String, Value> =
                        self.columns.iter().zip(r).map(|(c, v)| (c.to_string(), v.json())).collect();
                    Value::Object(obj)
                })
                .collect(),
        )
    }

    pub fn write(&self, format: Format, w: impl Write) -> io::Result<()> {
        match format {
            Format::Csv => {
                let mut wr = csv::Writer::from_writer(w);
                wr.write_record(&self.columns[..self.csv_width])?;
                for r in &self.rows {
                    wr.write_record(r[..self.csv_width].iter().map(Cell::csv))?;
                }
                wr.flush()
            }
            Format::Json => write_json(&self.to_json(), w),
        }
    }
}

pub fn write_json(v: &Value, mut w: impl Write) -> io::Result<()> {
    serde_json::to_writer_pretty(&mut w, v)?;
    writeln!(w)
}

/// Runs `f` against the file at `out`, or stdout when `out` is `None`.
pub fn with_output(out: Option<&Path>, f: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> io::Result<()> {
    match out {
        Some(p) => {
            let mut w = BufWriter::new(File::create(p)?);
            f(&mut w)?;
            w.flush()
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            f(&mut w)?;
            w.flush()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Table {
        let mut t = Table::new(&["a", "b", "c"]).with_json_only(&["reason"]);
        t.push(vec![Cell::Num(0.1), Cell::Sci(0.4996), Cell::Bool(true), Cell::Empty]);
        t.push(vec![Cell::Num(f64::NAN), Cell::Empty, Cell::Int(3), Cell::Text("bad".into())]);
        t
    }

    #[test]
    fn csv_hides_json_only_columns_and_blanks_missing() {
        let mut buf = Vec::new();
        sample().write(Format::Csv, &mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert_eq!(s, "a,b,c\n0.1,4.9959999999999999e-1,true\n,,3\n");
    }

    #[test]
    fn json_uses_null_for_missing() {
        let v = sample().to_json();
        assert_eq!(v[0]["reason"], Value::Null);
        assert_eq!(v[1]["a"], Value::Null);
        assert_eq!(v[1]["reason"], "bad");
        assert_eq!(v[1]["c"], 3);
    }

    #[test]
    fn tiny_numbers_use_exponent() {
        assert_eq!(Cell::Num(1e-300).csv(), "1e-300");
    }
}
