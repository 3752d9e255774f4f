//! CSV and JSON artifacts for plotting outside the library.
//!
//! Undefined values (`None`) are written as empty CSV fields.

use std::io::Write;

use serde::Serialize;

use crate::dynamics::{SweepResult, TraceRecord};
use crate::error::{Error, Result};
use crate::experiment::RegressionResult;

fn csv_err(e: csv::Error) -> Error {
    Error::Contract(format!("csv output failed: {e}"))
}

fn write_rows<W: Write, T: Serialize>(out: W, rows: impl IntoIterator<Item = T>) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    for row in rows {
        writer.serialize(row).map_err(csv_err)?;
    }
    writer
        .flush()
        .map_err(|e| Error::Contract(format!("csv output failed: {e}")))
}

/// Columns `k, v1f_norm, v2f_norm, efficiency, mode_purity`.
pub fn write_trace_csv<W: Write>(out: W, records: &[TraceRecord]) -> Result<()> {
    if records.is_empty() {
        return write_header(out, "k,v1f_norm,v2f_norm,efficiency,mode_purity");
    }
    write_rows(out, records)
}

#[derive(Serialize)]
struct SweepRow {
    gain_db: f64,
    eff_mean: Option<f64>,
    eff_std: Option<f64>,
    label: String,
}

/// Columns `gain_db, eff_mean, eff_std, label`, in grid order.
pub fn write_sweep_csv<W: Write>(out: W, result: &SweepResult) -> Result<()> {
    write_rows(
        out,
        result.points.iter().map(|p| SweepRow {
            gain_db: p.gain_db,
            eff_mean: p.mean_efficiency,
            eff_std: p.std_efficiency,
            label: p.label.to_string(),
        }),
    )
}

/// `{slope, intercept_db, r_squared, n_points}`
pub fn regression_json(result: &RegressionResult) -> Result<serde_json::Value> {
    serde_json::to_value(result).map_err(|e| Error::Contract(format!("json output failed: {e}")))
}

#[derive(Serialize)]
struct PlotRow {
    g_db: f64,
    y_db: f64,
    y_fit_free: f64,
    y_fit_fixed: f64,
}

/// Columns `g_db, y_db, y_fit_free, y_fit_fixed`: each data point with both
/// fitted lines evaluated at its gain.
pub fn write_regression_plot_csv<W: Write>(
    out: W,
    points: &[(f64, f64)],
    free: &RegressionResult,
    fixed: &RegressionResult,
) -> Result<()> {
    write_rows(
        out,
        points.iter().map(|&(g, y)| PlotRow {
            g_db: g,
            y_db: y,
            y_fit_free: free.slope * g + free.intercept_db,
            y_fit_fixed: fixed.slope * g + fixed.intercept_db,
        }),
    )
}

fn write_header<W: Write>(mut out: W, header: &str) -> Result<()> {
    writeln!(out, "{header}").map_err(|e| Error::Contract(format!("csv output failed: {e}")))
}
