//! CSV and JSON report files.
//!
//! Every file is written to a temporary sibling and renamed into place, so a
//! reader never sees a half-written report.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::checks::Check;
use crate::error::Result;

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    {
        let mut file = fs::File::create(&tmp)?;
        file.write_all(bytes)?;
        file.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Rows as CSV with a header taken from the field names.
pub fn csv_bytes<T: Serialize>(rows: &[T]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(w.into_inner().map_err(|e| e.into_error())?)
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    write_atomic(path, &csv_bytes(rows)?)
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

/// Contents of `summary.json`.
#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub command: String,
    pub pass: bool,
    pub checks: Vec<Check>,
    /// Report files written next to the summary, relative to it.
    pub files: Vec<String>,
    /// Wall-clock time; only present when asked for, since it breaks
    /// byte-for-byte reproducibility.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub runtime_seconds: Option<f64>,
}

impl Summary {
    pub fn new(command: impl Into<String>, checks: Vec<Check>, files: Vec<String>) -> Self {
        let pass = checks.iter().all(|c| c.pass);
        Self { command: command.into(), pass, checks, files, runtime_seconds: None }
    }
}

/// One flat row per check, for `checks.csv`.
#[derive(Debug, Clone, Serialize)]
pub struct CheckRow {
    pub criterion: u8,
    pub id: String,
    pub anchor: String,
    pub pass: bool,
    /// `key=value` pairs separated by `;`.
    pub measured: String,
    pub expectation: String,
}

impl From<&Check> for CheckRow {
    fn from(c: &Check) -> Self {
        let measured = c
            .measured
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join(";");
        Self {
            criterion: c.criterion,
            id: c.id.clone(),
            anchor: c.anchor.clone(),
            pass: c.pass,
            measured,
            expectation: c.expectation.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Serialize)]
    struct Row {
        p: f64,
        value: f64,
    }

    #[test]
    fn csv_has_header_and_nonfinite_values() {
        let rows = [Row { p: 1.0, value: 0.5 }, Row { p: f64::INFINITY, value: f64::NAN }];
        let text = String::from_utf8(csv_bytes(&rows).unwrap()).unwrap();
        assert_eq!(text, "p,value\n1.0,0.5\ninf,NaN\n");
    }

    #[test]
    fn atomic_write_replaces_the_file() {
        let dir = std::env::temp_dir().join(format!("conelab-report-{}", std::process::id()));
        let path = dir.join("nested").join("a.json");
        write_json(&path, &[1, 2]).unwrap();
        write_json(&path, &[3]).unwrap();
        assert_eq!(fs::read_to_string(&path).unwrap(), "[\n  3\n]\n");
        assert!(!path.with_extension("json.tmp").exists());
        fs::remove_dir_all(dir).unwrap();
    }
}
