//! Processing of the 30-case hardware measurement campaign: the bundled
//! case table, SDR gain correction, measured-efficiency compensation and
//! the loss regression `20·log10(η) = m·G_dB + L_dB`.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, CVector};

/// The bundled case table.
pub const TABLE2_CSV: &str = include_str!("../data/table2.csv");
/// SHA-256 of [`TABLE2_CSV`].
pub const TABLE2_SHA256: &str = "9dc141b06e6baea2fe9356177c7dfdd52e7d5d44423b15b606354d32079780c9";
pub const TABLE2_CASES: usize = 30;

/// Ratio of the gain the SDR actually delivers to its nominal setting.
pub const GAIN_CORRECTION_SLOPE: f64 = 0.9508;
/// Loss of the conjugating circuit in front of the receiver measurement.
pub const CONJUGATOR_LOSS_DB: f64 = 16.5;

/// Fixture consistency tolerances; the table is rounded to two decimals.
pub const ERROR_PCT_TOL: f64 = 0.02;
pub const LOSS_TOL_DB: f64 = 0.02;
pub const GAIN_TOL_DB: f64 = 0.01;

/// One measured configuration. Efficiencies are fractions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentCase {
    pub case_id: u32,
    pub rx_ports: Vec<usize>,
    pub tx_ports: Vec<usize>,
    pub eta_theo: f64,
    pub eta_meas: f64,
    pub error_pct: f64,
    pub gain_setting_db: f64,
    pub gain_corr_db: f64,
    pub est_loss_db: f64,
}

impl ExperimentCase {
    /// `(g, y)` with `g` the corrected gain and `y = 20·log10(η_meas)`.
    pub fn regression_point(&self) -> (f64, f64) {
        (self.gain_corr_db, 20.0 * self.eta_meas.log10())
    }
}

#[derive(Debug, Deserialize)]
struct Row {
    case: u32,
    rx_ports: String,
    tx_ports: String,
    eta_theo_pct: f64,
    eta_meas_pct: f64,
    error_pct: f64,
    gain_setting_db: f64,
    gain_corr_db: f64,
    est_loss_db: f64,
}

fn parse_ports(
    field: &str,
    range: std::ops::RangeInclusive<usize>,
    case: u32,
) -> Result<Vec<usize>> {
    let ports = field
        .split(';')
        .map(|p| p.trim().parse::<usize>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| Error::Fixture(format!("case {case}: bad port list {field:?}: {e}")))?;
    if ports.is_empty() || ports.iter().any(|p| !range.contains(p)) {
        return Err(Error::Fixture(format!(
            "case {case}: ports {field:?} outside {}..={}",
            range.start(),
            range.end()
        )));
    }
    Ok(ports)
}

/// Parses case records in the fixture's CSV schema and checks their invariants.
pub fn parse_cases(text: &str) -> Result<Vec<ExperimentCase>> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let mut cases = Vec::new();
    for (i, row) in reader.deserialize::<Row>().enumerate() {
        let row = row.map_err(|e| Error::Fixture(format!("record {}: {e}", i + 1)))?;
        let case = ExperimentCase {
            case_id: row.case,
            rx_ports: parse_ports(&row.rx_ports, 1..=6, row.case)?,
            tx_ports: parse_ports(&row.tx_ports, 7..=12, row.case)?,
            eta_theo: row.eta_theo_pct / 100.0,
            eta_meas: row.eta_meas_pct / 100.0,
            error_pct: row.error_pct,
            gain_setting_db: row.gain_setting_db,
            gain_corr_db: row.gain_corr_db,
            est_loss_db: row.est_loss_db,
        };
        for (name, eta) in [("theoretical", case.eta_theo), ("measured", case.eta_meas)] {
            if !(eta > 0.0 && eta <= 1.0) {
                return Err(Error::Fixture(format!(
                    "case {}: {name} efficiency {eta} outside (0, 1]",
                    case.case_id
                )));
            }
        }
        if case.gain_corr_db > case.gain_setting_db {
            return Err(Error::Fixture(format!(
                "case {}: corrected gain exceeds the setting",
                case.case_id
            )));
        }
        cases.push(case);
    }
    Ok(cases)
}

/// Checks `text` against a SHA-256 hex digest.
pub fn verify_checksum(text: &str, expected_hex: &str) -> Result<()> {
    let actual = hex::encode(Sha256::digest(text.as_bytes()));
    if actual != expected_hex {
        return Err(Error::Fixture(format!(
            "checksum mismatch: expected {expected_hex}, found {actual}"
        )));
    }
    Ok(())
}

/// The 30 bundled cases, in table order.
pub fn load_table2() -> Result<Vec<ExperimentCase>> {
    verify_checksum(TABLE2_CSV, TABLE2_SHA256)?;
    let cases = parse_cases(TABLE2_CSV)?;
    if cases.len() != TABLE2_CASES {
        return Err(Error::Fixture(format!(
            "expected {TABLE2_CASES} cases, found {}",
            cases.len()
        )));
    }
    Ok(cases)
}

pub fn corrected_gain(setting_db: f64, slope: f64) -> f64 {
    setting_db * slope
}

/// The SDR gain only changes in whole-dB steps, so the setting noted at
/// marginal stability is the floor of the continuous gain.
pub fn quantize_gain_setting(gain_db: f64) -> f64 {
    gain_db.floor()
}

pub fn percent_error(eta_theo: f64, eta_meas: f64) -> Result<f64> {
    if eta_theo == 0.0 {
        return Err(Error::Domain("theoretical efficiency is zero".into()));
    }
    Ok(100.0 * (eta_theo - eta_meas).abs() / eta_theo)
}

/// `20·log10(η) + G_dB`
pub fn estimate_case_loss(eta_meas: f64, gain_corr_db: f64) -> Result<f64> {
    if !(eta_meas > 0.0) {
        return Err(Error::Domain(format!(
            "measured efficiency {eta_meas} must be positive"
        )));
    }
    Ok(20.0 * eta_meas.log10() + gain_corr_db)
}

/// Fraction of drive power reaching the two measured blocks,
/// `v2fᴴ(S12ᴴS12 + S13ᴴS13)v2f / v2fᴴv2f`.
pub fn alpha_factor(v2f: &CVector, s12: &CMatrix, s13: &CMatrix) -> Result<f64> {
    for (name, block) in [("S12", s12), ("S13", s13)] {
        if block.cols() != v2f.len() {
            return Err(Error::Dimension(format!(
                "{name} has {} columns, drive has length {}",
                block.cols(),
                v2f.len()
            )));
        }
    }
    let denom = v2f.norm_sqr();
    if denom == 0.0 {
        return Err(Error::Domain("drive vector is zero".into()));
    }
    let form = s12.gram().add(&s13.gram())?;
    Ok(v2f.dot(&form.mul_vec(v2f)?).re / denom)
}

/// `10^(loss/10) · α · Σ_active P / Σ_all P`. `active` holds 1-based indices
/// into `port_powers`.
pub fn compensated_efficiency(
    port_powers: &[f64],
    active: &[usize],
    alpha: f64,
    conj_loss_db: f64,
) -> Result<f64> {
    if active.is_empty() {
        return Err(Error::Domain("no active ports".into()));
    }
    if let Some(p) = port_powers.iter().find(|p| !(**p >= 0.0)) {
        return Err(Error::Domain(format!(
            "port power {p} is negative or not a number"
        )));
    }
    if let Some(&i) = active.iter().find(|&&i| i == 0 || i > port_powers.len()) {
        return Err(Error::PortOutOfRange {
            port: i,
            n: port_powers.len(),
        });
    }
    let total: f64 = port_powers.iter().sum();
    if total == 0.0 {
        return Err(Error::Domain("total received power is zero".into()));
    }
    let captured: f64 = active.iter().map(|&i| port_powers[i - 1]).sum();
    Ok(10f64.powf(conj_loss_db / 10.0) * alpha * captured / total)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegressionResult {
    pub slope: f64,
    pub intercept_db: f64,
    pub r_squared: f64,
    pub n_points: usize,
    /// Set when `y` has no variance, so `r_squared` carries no information.
    #[serde(skip)]
    pub zero_variance: bool,
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    sum / n as f64
}

/// `1 − Σ(y − m·g − L)² / Σ(y − ⟨y⟩)²`. Zero variance in `y` is a
/// [`Error::Degenerate`] error.
pub fn coefficient_of_determination(
    points: &[(f64, f64)],
    slope: f64,
    intercept_db: f64,
) -> Result<f64> {
    if points.len() < 2 {
        return Err(Error::Degenerate("at least two points are required".into()));
    }
    let y_mean = mean(points.iter().map(|p| p.1));
    let ss_tot: f64 = points.iter().map(|(_, y)| (y - y_mean).powi(2)).sum();
    if ss_tot == 0.0 {
        return Err(Error::Degenerate("y has zero variance".into()));
    }
    let ss_res: f64 = points
        .iter()
        .map(|(g, y)| (y - slope * g - intercept_db).powi(2))
        .sum();
    Ok(1.0 - ss_res / ss_tot)
}

fn r_squared_or_flag(points: &[(f64, f64)], slope: f64, intercept_db: f64) -> Result<(f64, bool)> {
    match coefficient_of_determination(points, slope, intercept_db) {
        Ok(r2) => Ok((r2, false)),
        Err(Error::Degenerate(_)) => Ok((1.0, true)),
        Err(e) => Err(e),
    }
}

/// Ordinary least squares `y = m·g + L`.
pub fn fit_regression(points: &[(f64, f64)]) -> Result<RegressionResult> {
    if points.len() < 2 {
        return Err(Error::Degenerate(
            "regression needs at least two points".into(),
        ));
    }
    let g_mean = mean(points.iter().map(|p| p.0));
    let y_mean = mean(points.iter().map(|p| p.1));
    let sxx: f64 = points.iter().map(|(g, _)| (g - g_mean).powi(2)).sum();
    if sxx <= f64::EPSILON * g_mean.abs().max(1.0) {
        return Err(Error::Degenerate("all gain values are equal".into()));
    }
    let sxy: f64 = points
        .iter()
        .map(|(g, y)| (g - g_mean) * (y - y_mean))
        .sum();
    let slope = sxy / sxx;
    let intercept_db = y_mean - slope * g_mean;
    let (r_squared, zero_variance) = r_squared_or_flag(points, slope, intercept_db)?;
    Ok(RegressionResult {
        slope,
        intercept_db,
        r_squared,
        n_points: points.len(),
        zero_variance,
    })
}

/// Fit with the slope pinned to −1: `L` is the mean of `y + g`.
pub fn fixed_slope_fit(points: &[(f64, f64)]) -> Result<RegressionResult> {
    if points.is_empty() {
        return Err(Error::Degenerate("no points to fit".into()));
    }
    let intercept_db = mean(points.iter().map(|(g, y)| y + g));
    let (r_squared, zero_variance) = if points.len() == 1 {
        (1.0, true)
    } else {
        r_squared_or_flag(points, -1.0, intercept_db)?
    };
    Ok(RegressionResult {
        slope: -1.0,
        intercept_db,
        r_squared,
        n_points: points.len(),
        zero_variance,
    })
}

pub fn regression_points(cases: &[ExperimentCase]) -> Vec<(f64, f64)> {
    cases.iter().map(ExperimentCase::regression_point).collect()
}

/// A case's derived columns recomputed from its raw ones.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CaseCheck {
    pub case_id: u32,
    pub error_pct: f64,
    pub est_loss_db: f64,
    pub gain_corr_db: f64,
    pub error_pct_dev: f64,
    pub est_loss_dev_db: f64,
    pub gain_corr_dev_db: f64,
    pub within_tolerance: bool,
}

pub fn check_case(case: &ExperimentCase) -> Result<CaseCheck> {
    let error_pct = percent_error(case.eta_theo, case.eta_meas)?;
    let est_loss_db = estimate_case_loss(case.eta_meas, case.gain_corr_db)?;
    let gain_corr_db = corrected_gain(case.gain_setting_db, GAIN_CORRECTION_SLOPE);
    let error_pct_dev = (error_pct - case.error_pct).abs();
    let est_loss_dev_db = (est_loss_db - case.est_loss_db).abs();
    let gain_corr_dev_db = (gain_corr_db - case.gain_corr_db).abs();
    Ok(CaseCheck {
        case_id: case.case_id,
        error_pct,
        est_loss_db,
        gain_corr_db,
        error_pct_dev,
        est_loss_dev_db,
        gain_corr_dev_db,
        within_tolerance: error_pct_dev <= ERROR_PCT_TOL
            && est_loss_dev_db <= LOSS_TOL_DB
            && gain_corr_dev_db <= GAIN_TOL_DB + 1e-9,
    })
}
