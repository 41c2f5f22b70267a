//! Atomic report files and the terminal summary.

use std::fs;
use std::path::{Path, PathBuf};

use crate::run::RunReport;
use crate::CliError;

fn io(path: &Path, e: std::io::Error) -> CliError {
    CliError::Runtime(format!("{}: {e}", path.display()))
}

/// Writes `contents` to a sibling temporary file, then renames it into place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    let tmp = path.with_extension(format!(
        "{}.tmp",
        path.extension().and_then(|e| e.to_str()).unwrap_or("out")
    ));
    fs::write(&tmp, contents).map_err(|e| io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| io(path, e))
}

/// Writes `<experiment>.csv` and `<experiment>.json` under `dir`.
pub fn write_report(report: &RunReport, dir: &Path) -> Result<(PathBuf, PathBuf), CliError> {
    fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
    let csv_path = dir.join(format!("{}.csv", report.experiment));
    let json_path = dir.join(format!("{}.json", report.experiment));
    write_atomic(&csv_path, report.table.to_csv()?.as_bytes())?;
    let mut json =
        serde_json::to_vec_pretty(report).map_err(|e| CliError::Runtime(e.to_string()))?;
    json.push(b'\n');
    write_atomic(&json_path, &json)?;
    Ok((csv_path, json_path))
}

/// Human-readable summary printed after a run.
pub fn summary(report: &RunReport) -> String {
    format!(
        "{} (seed {}, config {})\n{}\n{:.3}s",
        report.experiment,
        report.config.seed.unwrap_or_default(),
        &report.config_hash[..12],
        report.table.render(),
        report.wall_clock_seconds
    )
}
