//! Writers for the files commands leave behind.

use std::path::Path;

use morpi::pinn::EpochLog;
use serde::Serialize;

use crate::error::{CliError, CliResult};

pub fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::data(format!("{}: {e}", path.display()))
}

pub fn ensure_dir(dir: &Path) -> CliResult<()> {
    std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))
}

pub fn write_text(path: &Path, text: &str) -> CliResult<()> {
    if let Some(parent) = path.parent() {
        ensure_dir(parent)?;
    }
    std::fs::write(path, text).map_err(|e| io_err(path, e))
}

pub fn write_json<S: Serialize>(path: &Path, value: &S) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).expect("report serializes");
    text.push('\n');
    write_text(path, &text)
}

/// Writes rows of named numeric columns.
pub fn write_columns(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> CliResult<()> {
    if let Some(parent) = path.parent() {
        ensure_dir(parent)?;
    }
    let mut w = csv::Writer::from_path(path).map_err(|e| io_err(path, e))?;
    w.write_record(header).map_err(|e| io_err(path, e))?;
    for row in rows {
        debug_assert_eq!(row.len(), header.len());
        w.write_record(row.iter().map(f64::to_string))
            .map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

pub fn write_epoch_log(path: &Path, log: &[EpochLog]) -> CliResult<()> {
    let header: Vec<&str> = EpochLog::CSV_HEADER.split(',').collect();
    write_columns(
        path,
        &header,
        log.iter()
            .map(|r| vec![r.epoch as f64, r.data, r.init, r.phys, r.total, r.val_total, r.lr]),
    )
}

pub fn read_epoch_log(path: &Path) -> CliResult<Vec<EpochLog>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| io_err(path, e))?;
    let header = r.headers().map_err(|e| io_err(path, e))?.clone();
    if header.iter().collect::<Vec<_>>().join(",") != EpochLog::CSV_HEADER {
        return Err(CliError::data(format!(
            "{}: expected header `{}`",
            path.display(),
            EpochLog::CSV_HEADER
        )));
    }
    r.deserialize().map(|row| row.map_err(|e| io_err(path, e))).collect()
}
