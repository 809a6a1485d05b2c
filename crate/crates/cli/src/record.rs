//! Run records and their JSON / CSV encodings.

use std::fs::File;
use std::io::{self, BufWriter, Write};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::CliError;

pub const TOOL_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

/// One command invocation. Complex numbers appear as `[re, im]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub command: String,
    pub params: Value,
    pub results: Value,
    pub diagnostics: Value,
    pub tool_version: String,
}

impl RunRecord {
    pub fn new(
        command: &str,
        params: impl Serialize,
        results: impl Serialize,
        diagnostics: impl Serialize,
    ) -> Result<Self, CliError> {
        Ok(Self {
            command: command.into(),
            params: serde_json::to_value(params)?,
            results: serde_json::to_value(results)?,
            diagnostics: serde_json::to_value(diagnostics)?,
            tool_version: TOOL_VERSION.into(),
        })
    }
}

/// Rows for CSV output.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Real(f64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            // 17 significant digits
            Cell::Real(x) => format!("{:.16e}", if *x == 0.0 { 0.0 } else { *x }),
            Cell::Text(s) => s.clone(),
        }
    }
}

fn sink(out: &str) -> Result<Box<dyn Write>, CliError> {
    if out == "-" {
        Ok(Box::new(io::stdout().lock()))
    } else {
        Ok(Box::new(BufWriter::new(File::create(out)?)))
    }
}

pub fn write_json(record: &RunRecord, out: &str) -> Result<(), CliError> {
    let mut w = sink(out)?;
    serde_json::to_writer_pretty(&mut w, record)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub fn write_csv(table: &Table, out: &str) -> Result<(), CliError> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(sink(out)?);
    w.write_record(&table.header)?;
    for row in &table.rows {
        w.write_record(row.iter().map(Cell::render))?;
    }
    w.flush()?;
    Ok(())
}
