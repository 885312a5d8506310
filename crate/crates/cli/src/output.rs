//! JSON and CSV rendering of reports.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use cpes_core::report::ScoreReport;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

pub fn json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(value).map_err(cpes_core::Error::from)?;
    s.push('\n');
    Ok(s)
}

/// Rows of flat records with a header taken from the field names.
pub fn csv_rows<T: Serialize>(rows: &[T]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    finish(w)
}

/// One row per bus: factor columns named after the criteria, then CQ.
pub fn csv_scores(report: &ScoreReport) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["bus".to_string()];
    header.extend(report.criteria.iter().cloned());
    header.extend(["cq".into(), "flagged".into()]);
    w.write_record(&header)?;
    for row in &report.rows {
        let mut rec = vec![row.bus.to_string()];
        rec.extend(row.factors.iter().map(f64::to_string));
        rec.push(row.cq.to_string());
        rec.push(row.flagged.to_string());
        w.write_record(&rec)?;
    }
    finish(w)
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String, CliError> {
    let bytes = w.into_inner().map_err(|e| CliError::Output(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Output(e.to_string()))
}

pub fn print(text: &str) -> Result<(), CliError> {
    let mut out = std::io::stdout().lock();
    out.write_all(text.as_bytes())
        .and_then(|_| out.flush())
        .map_err(|e| CliError::Output(e.to_string()))
}

/// Writes named files into `dir`, creating it if needed.
pub fn write_all(dir: &Path, files: &[(&str, String)]) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Output(format!("{}: {e}", dir.display())))?;
    for (name, text) in files {
        let path = dir.join(name);
        fs::write(&path, text).map_err(|e| CliError::Output(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}
