//! Discrete-time model of the both-sides retrodirective loop.
//!
//! One step is one round trip. With `s21` the receiver-by-generator block
//! (`M×N`), loss `L` on the receiver side and gain `G` on the generator side:
//!
//! ```text
//! v1f' = conj(L)·G · conj(s21·s21ᴴ) · v1f + r
//! v2f' = φ · (s21ᴴ·s21) · v2f + conj(G) · s21ᴴ · conj(r)
//! ```
//!
//! where `r` is the receiver-side injection and `φ` is `conj(L)·G` or
//! `L·conj(G)` depending on [`V2fConvention`]. Both factors have the same
//! magnitude, so stability and efficiency do not depend on the choice.

mod sweep;

pub use sweep::{gain_sweep, SweepConfig, SweepPoint, SweepResult};

use std::fmt;

use serde::Serialize;

use crate::eigenbeam::{beam_modes, BeamModeSet};
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, CVector, C64};
use crate::synth::{gaussian_vector, rng};

/// `ρ` within this distance of 1 is classified as marginal.
pub const MARGINAL_TOL: f64 = 1e-9;
/// Any state norm above this aborts a simulation.
pub const DIVERGENCE_LIMIT: f64 = 1e150;

/// Phase factor used in the generator-side recursion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum V2fConvention {
    /// Same factor as the receiver side, `conj(L)·G`.
    Direct,
    /// `L·conj(G)`, obtained by tracing the generator waves through both
    /// conjugations. Matches the closed-form response.
    #[default]
    Conjugate,
}

/// Per-element soft limiter `x ↦ x·tanh(|x|/a)·a/|x|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Saturation {
    amplitude: f64,
}

impl Saturation {
    pub fn new(amplitude: f64) -> Result<Self> {
        if !(amplitude > 0.0 && amplitude.is_finite()) {
            return Err(Error::Domain(format!(
                "saturation amplitude must be positive, got {amplitude}"
            )));
        }
        Ok(Self { amplitude })
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn apply(&self, v: &CVector) -> CVector {
        let a = self.amplitude;
        v.map(|z| {
            let m = z.norm();
            if m == 0.0 {
                z
            } else {
                z * ((m / a).tanh() * a / m)
            }
        })
    }
}

/// Loop parameters plus the operators derived from `s21`.
#[derive(Debug, Clone)]
pub struct LoopConfig {
    s21: CMatrix,
    loss: C64,
    gain: C64,
    noise_power: f64,
    saturation: Option<Saturation>,
    convention: V2fConvention,
    rx_op: CMatrix,
    tx_op: CMatrix,
    s21_adj: CMatrix,
    modes: BeamModeSet,
}

impl LoopConfig {
    pub fn new(s21: CMatrix, loss: C64, gain: C64) -> Result<Self> {
        if loss.norm() > 1.0 + 1e-12 {
            return Err(Error::Domain(format!("|L| = {} exceeds 1", loss.norm())));
        }
        if !(loss.re.is_finite()
            && loss.im.is_finite()
            && gain.re.is_finite()
            && gain.im.is_finite())
        {
            return Err(Error::NonFinite("loop coefficients"));
        }
        let modes = beam_modes(&s21)?;
        let s21_adj = s21.adjoint();
        let rx_op = s21.matmul(&s21_adj)?.conj().hermitian_part();
        let tx_op = s21.gram();
        Ok(Self {
            s21,
            loss,
            gain,
            noise_power: 0.0,
            saturation: None,
            convention: V2fConvention::default(),
            rx_op,
            tx_op,
            s21_adj,
            modes,
        })
    }

    pub fn with_noise_power(mut self, noise_power: f64) -> Result<Self> {
        if !(noise_power >= 0.0 && noise_power.is_finite()) {
            return Err(Error::Domain(format!(
                "noise power must be non-negative, got {noise_power}"
            )));
        }
        self.noise_power = noise_power;
        Ok(self)
    }

    pub fn with_saturation(mut self, saturation: Option<Saturation>) -> Self {
        self.saturation = saturation;
        self
    }

    pub fn with_convention(mut self, convention: V2fConvention) -> Self {
        self.convention = convention;
        self
    }

    /// Same channel and settings with a different gain.
    pub fn with_gain(mut self, gain: C64) -> Self {
        self.gain = gain;
        self
    }

    pub fn s21(&self) -> &CMatrix {
        &self.s21
    }

    pub fn loss(&self) -> C64 {
        self.loss
    }

    pub fn gain(&self) -> C64 {
        self.gain
    }

    pub fn noise_power(&self) -> f64 {
        self.noise_power
    }

    pub fn saturation(&self) -> Option<Saturation> {
        self.saturation
    }

    pub fn convention(&self) -> V2fConvention {
        self.convention
    }

    pub fn modes(&self) -> &BeamModeSet {
        &self.modes
    }

    pub fn rx_dim(&self) -> usize {
        self.s21.rows()
    }

    pub fn tx_dim(&self) -> usize {
        self.s21.cols()
    }

    /// Round-trip factor applied to the receiver waves.
    pub fn rx_factor(&self) -> C64 {
        self.loss.conj() * self.gain
    }

    /// Round-trip factor applied to the generator waves.
    pub fn tx_factor(&self) -> C64 {
        match self.convention {
            V2fConvention::Direct => self.loss.conj() * self.gain,
            V2fConvention::Conjugate => self.loss * self.gain.conj(),
        }
    }

    /// Loop gain `ρ = |L·G|·ξ_max`.
    pub fn rho(&self) -> f64 {
        (self.loss * self.gain).norm() * self.modes.xi_max()
    }
}

/// Forward waves after `k` round trips.
#[derive(Debug, Clone, PartialEq)]
pub struct LoopState {
    pub k: u64,
    pub v1f: CVector,
    pub v2f: CVector,
}

impl LoopState {
    pub fn new(v1f: CVector, v2f: CVector) -> Self {
        Self { k: 0, v1f, v2f }
    }

    pub fn zeros(config: &LoopConfig) -> Self {
        Self::new(
            CVector::zeros(config.rx_dim()),
            CVector::zeros(config.tx_dim()),
        )
    }

    fn check(&self, config: &LoopConfig) -> Result<()> {
        if self.v1f.len() != config.rx_dim() || self.v2f.len() != config.tx_dim() {
            return Err(Error::Dimension(format!(
                "state has lengths ({}, {}), channel needs ({}, {})",
                self.v1f.len(),
                self.v2f.len(),
                config.rx_dim(),
                config.tx_dim()
            )));
        }
        Ok(())
    }
}

/// Advances the loop by one round trip with receiver injection `r`.
pub fn step(config: &LoopConfig, state: &LoopState, r: &CVector) -> Result<LoopState> {
    state.check(config)?;
    if r.len() != config.rx_dim() {
        return Err(Error::Dimension(format!(
            "injection has length {}, expected {}",
            r.len(),
            config.rx_dim()
        )));
    }
    let v1f = config
        .rx_op
        .mul_vec(&state.v1f)?
        .scale(config.rx_factor())
        .add(r);
    let injected = config.s21_adj.mul_vec(&r.conj())?.scale(config.gain.conj());
    let v2f = config
        .tx_op
        .mul_vec(&state.v2f)?
        .scale(config.tx_factor())
        .add(&injected);
    let (v1f, v2f) = match config.saturation {
        Some(sat) => (sat.apply(&v1f), sat.apply(&v2f)),
        None => (v1f, v2f),
    };
    Ok(LoopState {
        k: state.k + 1,
        v1f,
        v2f,
    })
}

fn complex_pow(z: C64, k: u64) -> C64 {
    if k == 0 {
        return C64::new(1.0, 0.0);
    }
    let (r, theta) = z.to_polar();
    C64::from_polar(r.powf(k as f64), theta * k as f64)
}

/// Closed-form state after `k` round trips with no injection.
///
/// Each side is expanded on its beam modes and mode `i` is scaled by
/// `(factor·ξ_i)^k`. Only valid for the linear loop; a saturated
/// configuration is a contract error. The noise setting is ignored.
pub fn zero_input_response(
    config: &LoopConfig,
    v0_rx: &CVector,
    v0_tx: &CVector,
    k: u64,
) -> Result<LoopState> {
    if config.saturation.is_some() {
        return Err(Error::Contract(
            "closed-form response requires an unsaturated loop".into(),
        ));
    }
    let initial = LoopState::new(v0_rx.clone(), v0_tx.clone());
    initial.check(config)?;
    if k == 0 {
        return Ok(initial);
    }
    let modes = &config.modes;
    let evolve =
        |factor: C64, eigenvalues: &[f64], basis: &[CVector], weights: Vec<C64>, dim: usize| {
            let fk = complex_pow(factor, k);
            basis
                .iter()
                .zip(eigenvalues)
                .zip(weights)
                .fold(CVector::zeros(dim), |acc, ((b, &xi), w)| {
                    acc.axpy(fk * xi.powf(k as f64) * w, b)
                })
        };
    let v1f = evolve(
        config.rx_factor(),
        &modes.rx_eigenvalues,
        &modes.rx_modes,
        modes.rx_weights(v0_rx)?,
        config.rx_dim(),
    );
    let v2f = evolve(
        config.tx_factor(),
        &modes.eigenvalues,
        &modes.tx_modes,
        crate::eigenbeam::decompose_input(modes, v0_tx)?,
        config.tx_dim(),
    );
    Ok(LoopState { k, v1f, v2f })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Stability {
    Stable,
    Marginal,
    Unstable,
}

impl fmt::Display for Stability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stability::Stable => "stable",
            Stability::Marginal => "marginal",
            Stability::Unstable => "unstable",
        })
    }
}

/// Classifies the loop by `ρ = |L·G|·ξ_max`.
pub fn classify_stability(config: &LoopConfig) -> (Stability, f64) {
    let rho = config.rho();
    (classify_rho(rho), rho)
}

pub fn classify_rho(rho: f64) -> Stability {
    if (rho - 1.0).abs() <= MARGINAL_TOL {
        Stability::Marginal
    } else if rho > 1.0 {
        Stability::Unstable
    } else {
        Stability::Stable
    }
}

/// Gain magnitude `1/(|L|·ξ_max)` that puts the loop on the stability boundary.
pub fn marginal_gain(s21: &CMatrix, loss_magnitude: f64) -> Result<f64> {
    if !(loss_magnitude > 0.0 && loss_magnitude <= 1.0 + 1e-12) {
        return Err(Error::Domain(format!(
            "loss magnitude must be in (0, 1], got {loss_magnitude}"
        )));
    }
    let xi_max = beam_modes(s21)?.xi_max();
    if xi_max <= 0.0 {
        return Err(Error::Domain(
            "channel has no power path (ξ_max = 0)".into(),
        ));
    }
    Ok(1.0 / (loss_magnitude * xi_max))
}

/// Marginal gain in dB from the loop loss in dB, `G_dB = L_dB − 20·log₁₀(ξ_max)`,
/// with `L_dB = −20·log₁₀|L|`.
pub fn marginal_gain_db(s21: &CMatrix, loss_db: f64) -> Result<f64> {
    amplitude_to_db(marginal_gain(s21, db_to_loss(loss_db))?)
}

pub fn amplitude_to_db(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::Domain(format!("cannot express {x} in dB")));
    }
    Ok(20.0 * x.log10())
}

pub fn db_to_amplitude(db: f64) -> f64 {
    10f64.powf(db / 20.0)
}

/// Loss magnitude `|L|` for a loss of `loss_db` (positive dB means attenuation).
pub fn db_to_loss(loss_db: f64) -> f64 {
    10f64.powf(-loss_db / 20.0)
}

/// Projection of a generator drive onto the dominant eigenspace.
#[derive(Debug, Clone, PartialEq)]
pub struct DominantProjection {
    pub vector: CVector,
    /// Set when the drive has no component on the dominant modes.
    pub degenerate: bool,
}

/// Steady-state direction of the generator waves (up to a rotating phase).
pub fn dominant_projection(modes: &BeamModeSet, v0: &CVector) -> Result<DominantProjection> {
    let weights = crate::eigenbeam::decompose_input(modes, v0)?;
    let mut vector = CVector::zeros(v0.len());
    for i in modes.dominant_indices() {
        vector = vector.axpy(weights[i], &modes.tx_modes[i]);
    }
    let degenerate = vector.norm() <= 1e-12 * v0.norm().max(f64::MIN_POSITIVE);
    if degenerate {
        vector = CVector::zeros(v0.len());
    }
    Ok(DominantProjection { vector, degenerate })
}

/// One row of a simulated time series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceRecord {
    pub k: u64,
    pub v1f_norm: f64,
    pub v2f_norm: f64,
    /// `None` while the generator waves are identically zero.
    pub efficiency: Option<f64>,
    /// Fraction of generator power on the dominant eigenspace.
    pub mode_purity: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct SimulationTrace {
    pub records: Vec<TraceRecord>,
    /// The run was cut short because a norm exceeded [`DIVERGENCE_LIMIT`].
    pub overflow: bool,
    pub final_state: LoopState,
}

/// Iterates [`step`] with seeded Gaussian injection of variance
/// `noise_power` per receiver port.
pub fn simulate(
    config: &LoopConfig,
    initial: &LoopState,
    steps: u64,
    seed: u64,
) -> Result<SimulationTrace> {
    initial.check(config)?;
    let mut rng = rng(seed);
    let m = config.rx_dim();
    let dominant = config.modes.dominant_indices();
    let mut state = initial.clone();
    let mut records = Vec::with_capacity(steps as usize);
    let mut overflow = false;
    let silent = CVector::zeros(m);

    for _ in 0..steps {
        let r = if config.noise_power > 0.0 {
            gaussian_vector(&mut rng, m, config.noise_power)
        } else {
            silent.clone()
        };
        let next = step(config, &state, &r)?;
        let v1f_norm = next.v1f.norm();
        let v2f_norm = next.v2f.norm();
        if !(v1f_norm <= DIVERGENCE_LIMIT && v2f_norm <= DIVERGENCE_LIMIT) {
            overflow = true;
            break;
        }
        let (efficiency, mode_purity) = if v2f_norm > 0.0 {
            let power = next.v2f.norm_sqr();
            let on_dominant: f64 = dominant
                .iter()
                .map(|&i| config.modes.tx_modes[i].dot(&next.v2f).norm_sqr())
                .sum();
            (
                Some(config.s21.mul_vec(&next.v2f)?.norm_sqr() / power),
                Some(on_dominant / power),
            )
        } else {
            (None, None)
        };
        records.push(TraceRecord {
            k: next.k,
            v1f_norm,
            v2f_norm,
            efficiency,
            mode_purity,
        });
        state = next;
    }
    Ok(SimulationTrace {
        records,
        overflow,
        final_state: state,
    })
}
