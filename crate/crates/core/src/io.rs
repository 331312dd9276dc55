//! CSV and JSON plumbing shared by the CLI and the examples.
//!
//! Numbers are written with 17 significant digits so every value
//! round-trips exactly. Files are written to a temporary sibling and
//! renamed into place.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Round-trip decimal representation (17 significant digits).
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn csv_row<'a>(values: impl IntoIterator<Item = &'a f64>) -> String {
    let mut line = String::new();
    for (i, v) in values.into_iter().enumerate() {
        if i > 0 {
            line.push(',');
        }
        line.push_str(&fmt_f64(*v));
    }
    line
}

/// Matrix as CSV: a `# k=<rows>,r=<rank>` comment line, then one row per line.
pub fn matrix_to_csv(m: &DMatrix<f64>, rank: usize) -> String {
    let mut out = format!("# k={},r={}\n", m.nrows(), rank);
    for row in m.row_iter() {
        let _ = writeln!(out, "{}", csv_row(row.iter()));
    }
    out
}

/// Parses numeric CSV rows, skipping blank lines, `#` comments and a
/// non-numeric header line.
pub fn parse_rows(text: &str) -> Result<Vec<Vec<f64>>> {
    let mut rows = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parsed: std::result::Result<Vec<f64>, _> =
            line.split(',').map(|f| f.trim().parse::<f64>()).collect();
        match parsed {
            Ok(row) => rows.push(row),
            Err(_) if rows.is_empty() && lineno == first_data_line(text) => continue,
            Err(e) => return Err(Error::Parse(format!("line {}: {e}", lineno + 1))),
        }
    }
    if let Some(first) = rows.first() {
        let width = first.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != width) {
            return Err(Error::DimensionMismatch {
                expected: width,
                got: bad.len(),
            });
        }
    }
    Ok(rows)
}

fn first_data_line(text: &str) -> usize {
    text.lines()
        .position(|l| {
            let l = l.trim();
            !l.is_empty() && !l.starts_with('#')
        })
        .unwrap_or(0)
}

pub fn matrix_from_csv(text: &str) -> Result<DMatrix<f64>> {
    let rows = parse_rows(text)?;
    if rows.is_empty() {
        return Err(Error::Parse("no numeric rows".into()));
    }
    let ncols = rows[0].len();
    Ok(DMatrix::from_row_iterator(
        rows.len(),
        ncols,
        rows.into_iter().flatten(),
    ))
}

pub fn vectors_from_csv(text: &str) -> Result<Vec<DVector<f64>>> {
    Ok(parse_rows(text)?.into_iter().map(DVector::from_vec).collect())
}

/// Writes `contents` to `path` through a temporary file in the same
/// directory followed by a rename.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}
