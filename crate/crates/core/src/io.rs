//! CSV and `key=value` files.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::symlin::SymMatrix;

/// Writes `contents` to a sibling temp file, then renames it over `path`.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .ok_or_else(|| Error::Io(format!("{} has no file name", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result.map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn fmt_row(row: &[f64]) -> String {
    row.iter().map(|v| format!("{v:.16e}")).collect::<Vec<_>>().join(",")
}

/// One line per row, 17 significant digits.
pub fn rows_to_csv(rows: &[Vec<f64>]) -> String {
    let mut s = String::new();
    for r in rows {
        s.push_str(&fmt_row(r));
        s.push('\n');
    }
    s
}

pub fn matrix_to_csv(m: &SymMatrix) -> String {
    let n = m.n();
    let rows: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| m.get(i, j)).collect()).collect();
    rows_to_csv(&rows)
}

/// Parses numeric rows; blank lines and `#` lines are skipped.
pub fn parse_rows(text: &str) -> Result<Vec<Vec<f64>>> {
    let mut rows = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row = line
            .split(',')
            .map(|f| {
                f.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::InvalidInput(format!("line {}: `{}` is not a number", k + 1, f.trim())))
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    Ok(rows)
}

pub fn parse_matrix(text: &str) -> Result<SymMatrix> {
    let rows = parse_rows(text)?;
    if rows.is_empty() {
        return Err(Error::InvalidInput("empty matrix".into()));
    }
    SymMatrix::from_rows(&rows)
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

pub fn read_matrix(path: &Path) -> Result<SymMatrix> {
    parse_matrix(&read(path)?)
}

pub fn write_matrix(path: &Path, m: &SymMatrix) -> Result<()> {
    write_atomic(path, matrix_to_csv(m).as_bytes())
}

pub fn read_rows(path: &Path) -> Result<Vec<Vec<f64>>> {
    parse_rows(&read(path)?)
}

pub fn write_rows(path: &Path, rows: &[Vec<f64>]) -> Result<()> {
    write_atomic(path, rows_to_csv(rows).as_bytes())
}

/// `key=value` lines; `#` starts a comment. Repeated keys are an error.
pub fn parse_key_values(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::config(format!("line {}", k + 1), format!("expected key=value, got `{line}`")))?;
        let key = key.trim().to_string();
        if key.is_empty() {
            return Err(Error::config(format!("line {}", k + 1), "empty key"));
        }
        if map.insert(key.clone(), value.trim().to_string()).is_some() {
            return Err(Error::config(key, "repeated"));
        }
    }
    Ok(map)
}

pub fn format_key_values(map: &BTreeMap<String, String>) -> String {
    map.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
}

pub fn read_key_values(path: &Path) -> Result<BTreeMap<String, String>> {
    parse_key_values(&read(path)?)
}
