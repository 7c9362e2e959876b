//! Tabular CSV files with a single `#`-prefixed JSON header line.
//!
//! Every data file written by the crate has the same layout:
//!
//! ```text
//! # {"kind":"...", ...}
//! col_a,col_b,...
//! 1.0,2.0,...
//! ```

use std::io::{BufRead, BufReader, Read, Write};

use serde_json::Value;

use crate::error::{Error, Result};

/// A parsed CSV table.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Value,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[idx]).collect())
    }
}

pub fn write_table<W, I>(mut out: W, header: &Value, columns: &[&str], rows: I) -> Result<()>
where
    W: Write,
    I: IntoIterator<Item = Vec<f64>>,
{
    writeln!(out, "# {}", serde_json::to_string(header)?)?;
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(columns)?;
    for row in rows {
        if row.len() != columns.len() {
            return Err(Error::Io(format!(
                "row has {} fields, expected {}",
                row.len(),
                columns.len()
            )));
        }
        writer.serialize(row)?;
    }
    writer.flush()?;
    Ok(())
}

pub fn read_table<R: Read>(input: R) -> Result<Table> {
    let mut reader = BufReader::new(input);
    let mut first = String::new();
    reader.read_line(&mut first)?;
    let json = first
        .strip_prefix('#')
        .ok_or_else(|| Error::Io("missing `#` header line".into()))?;
    let header: Value = serde_json::from_str(json.trim())?;

    let mut csv = csv::Reader::from_reader(reader);
    let columns = csv.headers()?.iter().map(str::to_owned).collect();
    let mut rows = Vec::new();
    for record in csv.deserialize() {
        let row: Vec<f64> = record?;
        rows.push(row);
    }
    Ok(Table {
        header,
        columns,
        rows,
    })
}
