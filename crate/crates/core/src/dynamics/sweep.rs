//! High-to-low gain sweep, the numerical counterpart of hand-tuning the
//! loop gain until the oscillation collapses into noise.

use rayon::prelude::*;
use serde::Serialize;

use super::{
    classify_rho, db_to_amplitude, simulate, LoopConfig, LoopState, Saturation, Stability,
    V2fConvention,
};
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, C64};

/// Sweep settings. Every grid point starts from rest and uses the seed
/// `seed ^ index`, so points can run in any order.
#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub s21: CMatrix,
    pub loss: C64,
    /// Gain grid in dB, strictly descending.
    pub gains_db: Vec<f64>,
    pub noise_power: f64,
    pub saturation: Option<Saturation>,
    pub seed: u64,
    pub steps_per_point: u64,
    /// Leading steps of each point excluded from the statistics.
    pub discard: u64,
    /// Receiver measurement noise floor. The logged efficiency at each step
    /// is `‖s21·v2f‖² / (‖v2f‖² + floor)`; with `0` it is the plain
    /// transfer efficiency.
    pub measurement_floor: f64,
    pub convention: V2fConvention,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepPoint {
    pub gain_db: f64,
    /// `None` when no step after the discard window had a defined efficiency.
    pub mean_efficiency: Option<f64>,
    pub std_efficiency: Option<f64>,
    pub label: Stability,
    pub rho: f64,
    pub overflow: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub points: Vec<SweepPoint>,
    /// Upper grid point of the largest drop in mean efficiency between
    /// neighbours; `None` when efficiency never drops.
    pub transition_gain_db: Option<f64>,
}

/// Runs the loop at every grid gain and locates the stability transition.
pub fn gain_sweep(config: &SweepConfig) -> Result<SweepResult> {
    if config.gains_db.is_empty() {
        return Err(Error::Domain("gain grid is empty".into()));
    }
    if config.gains_db.windows(2).any(|w| !(w[0] > w[1])) {
        return Err(Error::Domain(
            "gain grid must be strictly descending".into(),
        ));
    }
    if !(config.measurement_floor >= 0.0) {
        return Err(Error::Domain(
            "measurement floor must be non-negative".into(),
        ));
    }
    let base = LoopConfig::new(config.s21.clone(), config.loss, C64::new(1.0, 0.0))?
        .with_noise_power(config.noise_power)?
        .with_saturation(config.saturation)
        .with_convention(config.convention);

    let points = config
        .gains_db
        .par_iter()
        .enumerate()
        .map(|(index, &gain_db)| run_point(&base, config, index as u64, gain_db))
        .collect::<Result<Vec<_>>>()?;

    let transition_gain_db = locate_transition(&points);
    Ok(SweepResult {
        points,
        transition_gain_db,
    })
}

fn run_point(
    base: &LoopConfig,
    config: &SweepConfig,
    index: u64,
    gain_db: f64,
) -> Result<SweepPoint> {
    let loop_cfg = base
        .clone()
        .with_gain(C64::new(db_to_amplitude(gain_db), 0.0));
    let rho = loop_cfg.rho();
    let trace = simulate(
        &loop_cfg,
        &LoopState::zeros(&loop_cfg),
        config.steps_per_point,
        config.seed ^ index,
    )?;

    let floor = config.measurement_floor;
    let samples: Vec<f64> = trace
        .records
        .iter()
        .skip(config.discard as usize)
        .filter_map(|rec| {
            let power = rec.v2f_norm * rec.v2f_norm;
            let received = rec.efficiency.unwrap_or(0.0) * power;
            let denom = power + floor;
            (denom > 0.0).then(|| received / denom)
        })
        .collect();

    let (mean_efficiency, std_efficiency) = if samples.is_empty() {
        (None, None)
    } else {
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
        (Some(mean), Some(var.sqrt()))
    };
    Ok(SweepPoint {
        gain_db,
        mean_efficiency,
        std_efficiency,
        label: classify_rho(rho),
        rho,
        overflow: trace.overflow,
    })
}

/// Undefined means count as a zero floor.
fn locate_transition(points: &[SweepPoint]) -> Option<f64> {
    let mut best: Option<(f64, f64)> = None;
    for pair in points.windows(2) {
        let hi = pair[0].mean_efficiency.unwrap_or(0.0);
        let lo = pair[1].mean_efficiency.unwrap_or(0.0);
        let drop = hi - lo;
        if drop > 0.0 && best.is_none_or(|(d, _)| drop > d) {
            best = Some((drop, pair[0].gain_db));
        }
    }
    best.map(|(_, g)| g)
}
