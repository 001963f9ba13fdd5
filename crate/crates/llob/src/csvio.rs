//! Minimal CSV output: header row, one record per row, floats rendered
//! with Rust's shortest round-trip formatting so reruns are byte-identical
//! and parsing the file back loses nothing.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::Result;

/// A named table: header fields plus numeric rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Table {
            name: name.to_string(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.header.join(","));
        out.push('\n');
        for row in &self.rows {
            for (i, v) in row.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                let _ = write!(out, "{v}");
            }
            out.push('\n');
        }
        out
    }

    pub fn write(&self, dir: &Path) -> Result<std::path::PathBuf> {
        let path = dir.join(&self.name);
        std::fs::write(&path, self.render())?;
        Ok(path)
    }
}
