//! CSV tables with a `#` comment block recording provenance.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::CliError;

pub const TOOL_VERSION: &str = concat!("plsense ", env!("CARGO_PKG_VERSION"));

/// One output file, relative to the output directory.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub path: PathBuf,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(path: impl Into<PathBuf>, header: &[&str]) -> Self {
        Self {
            path: path.into(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    /// File contents: provenance comments, header row, data rows.
    pub fn render(&self, config_hash: &str, seed: u64) -> Result<Vec<u8>, CliError> {
        let mut buf = format!("# tool: {TOOL_VERSION}\n# config_sha256: {config_hash}\n# seed: {seed}\n").into_bytes();
        {
            let mut w = csv::Writer::from_writer(&mut buf);
            w.write_record(&self.header)?;
            for r in &self.rows {
                w.write_record(r)?;
            }
            w.flush()?;
        }
        Ok(buf)
    }
}

/// Shortest representation that reads back to the same `f64`.
pub fn num(v: f64) -> String {
    format!("{v}")
}

/// Writes every table under `out_dir` and returns the paths written.
pub fn write_tables(out_dir: &Path, tables: &[Table], config_hash: &str, seed: u64) -> Result<Vec<PathBuf>, CliError> {
    let mut written = Vec::with_capacity(tables.len());
    for t in tables {
        let path = out_dir.join(&t.path);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(&path, t.render(config_hash, seed)?)?;
        written.push(path);
    }
    Ok(written)
}
