//! Deterministic result serialization: CSV tables with fixed 17-significant-
//! digit float formatting and a JSON run manifest, assembled fully in memory
//! before anything touches the filesystem.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// One CSV cell: a float (formatted to 17 significant digits) or a status string.
#[derive(Clone, Debug)]
pub enum Cell {
    F(f64),
    S(String),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Cell {
        Cell::F(x)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Cell {
        Cell::S(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Cell {
        Cell::S(s)
    }
}

/// Locale-independent float rendering: 17 significant digits, `NaN` for the
/// sweep failure sentinel.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "NaN".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{x:.16e}")
    }
}

/// An in-memory CSV table with a fixed column schema.
#[derive(Clone, Debug)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Table {
        Table {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    /// Append a row; its width must match the header.
    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(
            row.len(),
            self.header.len(),
            "row width {} does not match schema width {}",
            row.len(),
            self.header.len()
        );
        self.rows.push(row);
    }

    /// Render to CSV bytes (header + rows, `\n` line endings).
    pub fn render(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)
            .map_err(|e| Error::Io(std::io::Error::other(e)))?;
        for row in &self.rows {
            let rec: Vec<String> = row
                .iter()
                .map(|c| match c {
                    Cell::F(x) => fmt_f64(*x),
                    Cell::S(s) => s.clone(),
                })
                .collect();
            w.write_record(&rec)
                .map_err(|e| Error::Io(std::io::Error::other(e)))?;
        }
        w.into_inner()
            .map_err(|e| Error::Io(std::io::Error::other(e)))
    }
}

/// Write a table to disk.
pub fn write_csv(path: &Path, table: &Table) -> Result<()> {
    fs::write(path, table.render()?)?;
    Ok(())
}
