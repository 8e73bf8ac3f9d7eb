//! CSV tables with a single `#` metadata line, written atomically.

use crate::error::{CliError, Result};
use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

/// One CSV cell.
#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Text(String),
    Int(u64),
    Float(f64),
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

/// A CSV table: metadata, column names and rows.
#[derive(Clone, Debug)]
pub struct Table {
    pub meta: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(meta: String, columns: impl IntoIterator<Item = impl Into<String>>) -> Self {
        Self {
            meta,
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    /// Appends a row; every float must be finite.
    pub fn push(&mut self, row: Vec<Cell>) -> Result<()> {
        assert_eq!(row.len(), self.columns.len(), "row width");
        for (cell, column) in row.iter().zip(&self.columns) {
            if let Cell::Float(v) = cell {
                if !v.is_finite() {
                    return Err(CliError::NonFinite { column: column.clone() });
                }
            }
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        writeln!(s, "# {}", self.meta).unwrap();
        writeln!(s, "{}", self.columns.join(",")).unwrap();
        for row in &self.rows {
            let cells: Vec<String> = row
                .iter()
                .map(|c| match c {
                    Cell::Text(t) => t.clone(),
                    Cell::Int(v) => v.to_string(),
                    Cell::Float(v) => format!("{v:e}"),
                })
                .collect();
            writeln!(s, "{}", cells.join(",")).unwrap();
        }
        s
    }
}

/// Hex SHA-256 of a canonical spec string.
pub fn spec_hash(canonical: &str) -> String {
    Sha256::digest(canonical.as_bytes()).iter().fold(String::new(), |mut s, b| {
        write!(s, "{b:02x}").unwrap();
        s
    })
}

/// The metadata line: method, spec hash and library version.
pub fn meta_line(method: &str, canonical_spec: &str) -> String {
    format!(
        "method={method} spec_sha256={} version={}",
        spec_hash(canonical_spec),
        env!("CARGO_PKG_VERSION")
    )
}

/// Writes `contents` to `path` through a temporary file in the same
/// directory, so a failure never leaves a partial file; standard output when
/// `path` is `None`.
pub fn write_output(path: Option<&Path>, contents: &str) -> Result<()> {
    let Some(path) = path else {
        let mut out = std::io::stdout().lock();
        return out
            .write_all(contents.as_bytes())
            .and_then(|_| out.flush())
            .map_err(|e| CliError::io("<stdout>", e));
    };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(dir, e))?;
    tmp.write_all(contents.as_bytes()).map_err(|e| CliError::io(tmp.path(), e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_a_single_metadata_line() {
        let mut t = Table::new("method=x".into(), ["a", "b"]);
        t.push(vec![Cell::from("p"), Cell::from(0.5)]).unwrap();
        let text = t.render();
        assert_eq!(text, "# method=x\na,b\np,5e-1\n");
        assert_eq!(text.lines().filter(|l| l.starts_with('#')).count(), 1);
    }

    #[test]
    fn rejects_non_finite_values() {
        let mut t = Table::new(String::new(), ["v"]);
        assert!(matches!(t.push(vec![Cell::from(f64::NAN)]), Err(CliError::NonFinite { .. })));
        assert!(t.rows.is_empty());
    }

    #[test]
    fn hash_is_hex_sha256() {
        assert_eq!(
            spec_hash("abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn floats_round_trip() {
        let v = 0.1 + 0.2;
        assert_eq!(format!("{v:e}").parse::<f64>().unwrap(), v);
    }

    #[test]
    fn atomic_write_replaces_the_target() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        write_output(Some(&path), "first\n").unwrap();
        write_output(Some(&path), "second\n").unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "second\n");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
