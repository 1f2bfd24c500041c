//! Atomic CSV/JSON writers.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};

/// Writes `bytes` to `dir/name` through a sibling temporary file and a
/// rename, so a reader never sees a partial file.
pub fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> Result<PathBuf> {
    let target = dir.join(name);
    let mut tmp = tempfile::Builder::new()
        .prefix(".roadspeed-")
        .tempfile_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(&target).map_err(|e| Error::Io(e.error))?;
    Ok(target)
}

pub fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<PathBuf> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_atomic(dir, name, text.as_bytes())
}

/// Minimal CSV table: header row first, every row newline-terminated.
/// Cells are numbers or empty; nothing needs quoting.
pub struct Csv {
    text: String,
    columns: usize,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        let mut text = header.join(",");
        text.push('\n');
        Self {
            text,
            columns: header.len(),
        }
    }

    pub fn row(&mut self, cells: &[Option<f64>]) {
        assert_eq!(cells.len(), self.columns);
        let cells: Vec<String> = cells
            .iter()
            .map(|c| c.map(format_number).unwrap_or_default())
            .collect();
        self.text.push_str(&cells.join(","));
        self.text.push('\n');
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }

    pub fn write(&self, dir: &Path, name: &str) -> Result<PathBuf> {
        write_atomic(dir, name, self.text.as_bytes())
    }
}

/// Shortest round-trip decimal form, always with a '.' separator.
pub fn format_number(x: f64) -> String {
    if x.is_finite() {
        format!("{x:?}")
    } else {
        String::new()
    }
}
