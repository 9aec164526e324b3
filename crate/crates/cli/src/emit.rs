//! CSV and JSON reports.
//!
//! The main CSV has one row per parameter value; the distribution goes to a
//! sibling `<stem>_qpd.csv` with one row per (Δ, kind). Floats carry 17
//! significant digits so reports round-trip exactly.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::IoError;
use crate::run::{Metadata, PointRecord, QpdEntry, RunReport, WeightKind};

pub const MAIN_HEADER: [&str; 8] =
    ["param", "K", "K_cl", "K_q1", "K_q2", "negativity", "lgi_violated", "mrps_violated"];
pub const QPD_HEADER: [&str; 4] = ["param", "delta", "weight", "kind"];

/// `x` with 17 significant digits.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn format_opt(x: Option<f64>) -> String {
    x.map(format_float).unwrap_or_default()
}

/// `report.csv` → `report_qpd.csv`.
pub fn qpd_sibling(path: &Path) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "report".into());
    path.with_file_name(format!("{stem}_qpd.csv"))
}

fn write_err(path: &Path) -> impl Fn(csv::Error) -> IoError + '_ {
    move |e| IoError::Write { path: path.to_path_buf(), source: e.into() }
}

fn write_csv(path: &Path, header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<(), IoError> {
    let mut w = csv::Writer::from_path(path).map_err(write_err(path))?;
    w.write_record(header).map_err(write_err(path))?;
    for row in rows {
        w.write_record(&row).map_err(write_err(path))?;
    }
    w.flush().map_err(|e| IoError::Write { path: path.to_path_buf(), source: e })
}

/// Write the main CSV at `path` and the distribution next to it.
pub fn emit_csv(report: &RunReport, path: &Path) -> Result<(), IoError> {
    if report.records.is_empty() {
        return Err(IoError::EmptyReport);
    }
    write_csv(
        path,
        &MAIN_HEADER,
        report.records.iter().map(|r| {
            vec![
                format_float(r.param),
                format_opt(r.k),
                format_opt(r.k_cl),
                format_opt(r.k_q1),
                format_opt(r.k_q2),
                format_float(r.negativity),
                r.lgi_violated.map(|b| b.to_string()).unwrap_or_default(),
                r.mrps_violated.to_string(),
            ]
        }),
    )?;
    write_csv(
        &qpd_sibling(path),
        &QPD_HEADER,
        report.records.iter().flat_map(|r| {
            r.qpd.iter().map(move |e| {
                vec![format_float(r.param), format_float(e.delta), format_float(e.weight), e.kind.as_str().to_string()]
            })
        }),
    )
}

pub fn emit_json(report: &RunReport, path: &Path) -> Result<(), IoError> {
    if report.records.is_empty() {
        return Err(IoError::EmptyReport);
    }
    let text = serde_json::to_string_pretty(report).expect("reports serialize");
    fs::write(path, text + "\n").map_err(|e| IoError::Write { path: path.to_path_buf(), source: e })
}

fn malformed(path: &Path, message: impl Into<String>) -> IoError {
    IoError::Malformed { path: path.to_path_buf(), message: message.into() }
}

fn read_rows(path: &Path, header: &[&str]) -> Result<Vec<csv::StringRecord>, IoError> {
    let mut r = csv::Reader::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(source) => IoError::Read { path: path.to_path_buf(), source },
        other => malformed(path, format!("{other:?}")),
    })?;
    let found = r.headers().map_err(|e| malformed(path, e.to_string()))?.clone();
    if found.iter().ne(header.iter().copied()) {
        return Err(malformed(path, format!("unexpected header {found:?}")));
    }
    r.records().map(|row| row.map_err(|e| malformed(path, e.to_string()))).collect()
}

fn parse_f64(path: &Path, s: &str) -> Result<f64, IoError> {
    s.parse().map_err(|_| malformed(path, format!("not a number: {s:?}")))
}

fn parse_opt_f64(path: &Path, s: &str) -> Result<Option<f64>, IoError> {
    if s.is_empty() {
        Ok(None)
    } else {
        parse_f64(path, s).map(Some)
    }
}

fn parse_bool(path: &Path, s: &str) -> Result<bool, IoError> {
    s.parse().map_err(|_| malformed(path, format!("not a boolean: {s:?}")))
}

/// Load a report written by [`emit_csv`]. The CSV does not carry
/// measurement times or run metadata; times are restored with the sweep
/// convention `(0, x, 2x)` and the metadata is left blank.
pub fn read_csv_report(path: &Path) -> Result<RunReport, IoError> {
    let mut records = Vec::new();
    for row in read_rows(path, &MAIN_HEADER)? {
        let param = parse_f64(path, &row[0])?;
        records.push(PointRecord {
            param,
            times: [0.0, param, 2.0 * param],
            k: parse_opt_f64(path, &row[1])?,
            k_cl: parse_opt_f64(path, &row[2])?,
            k_q1: parse_opt_f64(path, &row[3])?,
            k_q2: parse_opt_f64(path, &row[4])?,
            negativity: parse_f64(path, &row[5])?,
            lgi_violated: if row[6].is_empty() { None } else { Some(parse_bool(path, &row[6])?) },
            mrps_violated: parse_bool(path, &row[7])?,
            qpd: Vec::new(),
            characteristic_deviation: None,
            inversion_error: None,
            identity_residual: None,
        });
    }
    let sibling = qpd_sibling(path);
    if sibling.exists() {
        for row in read_rows(&sibling, &QPD_HEADER)? {
            let param = parse_f64(&sibling, &row[0])?;
            let kind = match &row[3] {
                "classical" => WeightKind::Classical,
                "quantum" => WeightKind::Quantum,
                other => return Err(malformed(&sibling, format!("unknown kind {other:?}"))),
            };
            let entry = QpdEntry { delta: parse_f64(&sibling, &row[1])?, weight: parse_f64(&sibling, &row[2])?, kind };
            let record = records
                .iter_mut()
                .find(|r| r.param == param)
                .ok_or_else(|| malformed(&sibling, format!("no main record for param {param}")))?;
            record.qpd.push(entry);
        }
    }
    Ok(RunReport {
        metadata: Metadata { config_hash: String::new(), tool_version: String::new(), wall_time_seconds: 0.0, seed: 0 },
        records,
    })
}

pub fn read_json_report(path: &Path) -> Result<RunReport, IoError> {
    let text = fs::read_to_string(path).map_err(|e| IoError::Read { path: path.to_path_buf(), source: e })?;
    serde_json::from_str(&text).map_err(|e| malformed(path, e.to_string()))
}

/// JSON when the extension says so, CSV otherwise.
pub fn read_report(path: &Path) -> Result<RunReport, IoError> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("json") => read_json_report(path),
        _ => read_csv_report(path),
    }
}
