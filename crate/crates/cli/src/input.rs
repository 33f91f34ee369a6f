//! Dense matrix ingestion: JSON `{"rows":p,"cols":q,"data":[[...]]}` with real
//! or `[re, im]` entries, or headerless CSV of real numbers.

use std::fmt;
use std::path::Path;

use mpdo_core::linalg::{CMat, C64};
use mpdo_core::NonnegMatrix;
use serde::Deserialize;
use serde_json::Value;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Json => "json",
            Format::Csv => "csv",
        })
    }
}

#[derive(Debug, Clone)]
pub struct LoadedMatrix {
    pub path: String,
    pub format: Format,
    pub data: CMat,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Entry {
    Real(f64),
    Complex([f64; 2]),
}

impl Entry {
    fn value(&self) -> C64 {
        match *self {
            Entry::Real(x) => C64::new(x, 0.0),
            Entry::Complex([re, im]) => C64::new(re, im),
        }
    }
}

#[derive(Deserialize)]
struct RawMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Vec<Entry>>,
}

/// Byte offset of a 1-based `(line, column)` position.
fn byte_offset(text: &str, line: usize, column: usize) -> usize {
    let start: usize = text
        .split_inclusive('\n')
        .take(line.saturating_sub(1))
        .map(str::len)
        .sum();
    (start + column.saturating_sub(1)).min(text.len())
}

fn json_error(text: &str, e: &serde_json::Error) -> CliError {
    let offset = byte_offset(text, e.line(), e.column());
    CliError::Usage(format!("malformed JSON at byte offset {offset}: {e}"))
}

fn raw_to_matrix(raw: RawMatrix, data_offset: usize) -> CliResult<CMat> {
    let shape_error = |what: String| {
        CliError::Usage(format!("{what} (data starts at byte offset {data_offset})"))
    };
    if raw.rows == 0 || raw.cols == 0 {
        return Err(shape_error("matrix must have at least one row and column".into()));
    }
    if raw.data.len() != raw.rows {
        return Err(shape_error(format!(
            "declared {} rows but data has {}",
            raw.rows,
            raw.data.len()
        )));
    }
    if let Some((i, row)) = raw.data.iter().enumerate().find(|(_, r)| r.len() != raw.cols) {
        return Err(shape_error(format!(
            "row {i} has {} entries, expected {}",
            row.len(),
            raw.cols
        )));
    }
    let m = CMat::from_fn(raw.rows, raw.cols, |i, j| raw.data[i][j].value());
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(shape_error("matrix entries must be finite".into()));
    }
    Ok(m)
}

pub fn parse_json_matrix(text: &str) -> CliResult<CMat> {
    let raw: RawMatrix = serde_json::from_str(text).map_err(|e| json_error(text, &e))?;
    raw_to_matrix(raw, text.find("\"data\"").unwrap_or(0))
}

/// A matrix nested inside an already parsed JSON document.
pub fn matrix_from_value(v: &Value) -> CliResult<CMat> {
    let raw = RawMatrix::deserialize(v)
        .map_err(|e| CliError::Usage(format!("malformed matrix object: {e}")))?;
    raw_to_matrix(raw, 0)
}

pub fn parse_csv_matrix(text: &str) -> CliResult<CMat> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_reader(text.as_bytes());
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for record in reader.byte_records() {
        let record = record.map_err(|e| {
            let offset = e.position().map_or(0, |p| p.byte());
            CliError::Usage(format!("malformed CSV at byte offset {offset}: {e}"))
        })?;
        let start = record.position().map_or(0, |p| p.byte() as usize);
        let mut row = Vec::with_capacity(record.len());
        for (k, field) in record.iter().enumerate() {
            let offset = start + record.range(k).map_or(0, |r| r.start) + k;
            let value = std::str::from_utf8(field)
                .ok()
                .and_then(|s| s.trim().parse::<f64>().ok())
                .filter(|x| x.is_finite())
                .ok_or_else(|| {
                    CliError::Usage(format!(
                        "malformed CSV at byte offset {offset}: '{}' is not a number",
                        String::from_utf8_lossy(field)
                    ))
                })?;
            row.push(value);
        }
        rows.push(row);
    }
    let cols = rows.first().map_or(0, Vec::len);
    if rows.is_empty() || cols == 0 {
        return Err(CliError::Usage("CSV input is empty".into()));
    }
    Ok(CMat::from_fn(rows.len(), cols, |i, j| C64::new(rows[i][j], 0.0)))
}

fn detect_format(path: &Path, text: &str) -> Format {
    match path.extension().and_then(|e| e.to_str()) {
        Some(e) if e.eq_ignore_ascii_case("json") => Format::Json,
        Some(e) if e.eq_ignore_ascii_case("csv") => Format::Csv,
        _ if text.trim_start().starts_with('{') => Format::Json,
        _ => Format::Csv,
    }
}

pub fn load_matrix(path: &Path) -> CliResult<LoadedMatrix> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    let format = detect_format(path, &text);
    let data = match format {
        Format::Json => parse_json_matrix(&text)?,
        Format::Csv => parse_csv_matrix(&text)?,
    };
    Ok(LoadedMatrix {
        path: path.display().to_string(),
        format,
        data,
    })
}

pub fn load_json(path: &Path) -> CliResult<Value> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| json_error(&text, &e))
}

/// Real nonnegative matrix; imaginary parts must vanish.
pub fn to_nonneg(m: &CMat) -> CliResult<NonnegMatrix> {
    if m.iter().any(|z| z.im != 0.0) {
        return Err(CliError::Usage("expected a real matrix".into()));
    }
    NonnegMatrix::new(m.map(|z| z.re)).map_err(|e| CliError::Usage(e.to_string()))
}

/// Parses `a..b` (inclusive) or a single value.
pub fn parse_range(s: &str) -> CliResult<(usize, usize)> {
    let bad = || CliError::Usage(format!("invalid range '{s}', expected a..b or a single number"));
    let (lo, hi) = match s.split_once("..") {
        Some((a, b)) => (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?),
        None => {
            let v = s.trim().parse().map_err(|_| bad())?;
            (v, v)
        }
    };
    if lo > hi {
        return Err(bad());
    }
    Ok((lo, hi))
}

pub fn parse_sites(s: &str) -> CliResult<Vec<usize>> {
    s.split(',')
        .map(|d| {
            d.trim()
                .parse::<usize>()
                .ok()
                .filter(|&d| d > 0)
                .ok_or_else(|| CliError::Usage(format!("invalid site dimension '{d}'")))
        })
        .collect()
}
