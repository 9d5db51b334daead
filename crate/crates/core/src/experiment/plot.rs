use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::{io_err, write_csv, Row, Suite, TraceRow, TRACES_FILE, TRACE_HEADER};

/// File name of the copied geodesic traces.
pub const PLOT_TRACES_FILE: &str = "geodesic_traces.csv";

#[derive(Debug, Serialize, Deserialize)]
struct ResidualPoint {
    case: usize,
    check: String,
    residual: f64,
}

fn read_rows<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| io_err(path, e))?;
    r.deserialize().collect::<std::result::Result<Vec<T>, _>>().map_err(|e| io_err(path, e))
}

/// Turn suite reports in `reports` into plot-ready series in `out`:
/// `<suite>_residuals.csv` with `(case, check, residual)` per row, and
/// `geodesic_traces.csv` with `(path, s, x, y, nu_residual)` when the
/// oracle traces are present.
///
/// With an empty `suites` list every report found is converted; a named
/// suite without a report is an error. Rerunning overwrites the same files
/// with the same content.
pub fn emit_plot_data(reports: &Path, out: &Path, suites: &[Suite]) -> Result<Vec<PathBuf>> {
    let wanted: Vec<Suite> = if suites.is_empty() {
        Suite::ALL.into_iter().filter(|s| reports.join(s.report_file()).is_file()).collect()
    } else {
        suites.to_vec()
    };
    if wanted.is_empty() {
        return Err(Error::Io(format!("{}: no suite reports found", reports.display())));
    }
    fs::create_dir_all(out).map_err(|e| io_err(out, e))?;
    let mut written = Vec::new();
    for suite in wanted {
        let src = reports.join(suite.report_file());
        if !src.is_file() {
            return Err(Error::Io(format!("{}: missing report for suite `{suite}`", src.display())));
        }
        let rows: Vec<Row> = read_rows(&src)?;
        let points: Vec<ResidualPoint> =
            rows.into_iter().map(|r| ResidualPoint { case: r.case, check: r.check, residual: r.residual }).collect();
        let dst = out.join(format!("{}_residuals.csv", suite.as_str()));
        write_csv(&dst, &["case", "check", "residual"], &points)?;
        written.push(dst);
        if suite == Suite::GeodesicOracle {
            let src = reports.join(TRACES_FILE);
            let traces: Vec<TraceRow> = if src.is_file() { read_rows(&src)? } else { Vec::new() };
            let dst = out.join(PLOT_TRACES_FILE);
            write_csv(&dst, &TRACE_HEADER, &traces)?;
            written.push(dst);
        }
    }
    Ok(written)
}
