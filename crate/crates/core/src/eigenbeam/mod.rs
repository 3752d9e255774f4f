//! Beam-mode analysis of a transmission block.
//!
//! Throughout, `s21` is the `M×N` block that maps the generator's forward
//! waves (`N` active tx ports) onto the receiver's active ports (`M` rows).
//! The transfer efficiency of a drive `v` is the Rayleigh quotient
//! `‖s21·v‖² / ‖v‖²`, so the generator-side beam modes are the
//! eigenvectors of `s21ᴴ·s21`. The receiver-side modes are the
//! eigenvectors of `conj(s21·s21ᴴ)`, the operator that carries the
//! receiver's forward waves around one retrodirective round trip.

mod jacobi;

pub use jacobi::{
    hermitian_asymmetry, hermitian_eigendecompose, phase_normalize, HermitianEigen,
    CONVERGENCE_TOL, HERMITIAN_TOL, MAX_SWEEPS,
};

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, CVector, C64};

/// Eigenvalues closer than this to the maximum share the dominant eigenspace.
pub const TIE_TOL: f64 = 1e-10;

/// Beam modes of a transmission block, strongest first.
#[derive(Debug, Clone)]
pub struct BeamModeSet {
    /// Efficiencies of the generator-side modes (length `N`).
    pub eigenvalues: Vec<f64>,
    /// Generator-side modes `a_i`, orthonormal, paired with `eigenvalues`.
    pub tx_modes: Vec<CVector>,
    /// Eigenvalues of the receiver-side operator (length `M`). The first
    /// `min(M, N)` agree with `eigenvalues`; the rest are null modes.
    pub rx_eigenvalues: Vec<f64>,
    /// Receiver-side modes `b_i`.
    pub rx_modes: Vec<CVector>,
}

impl BeamModeSet {
    /// Number of modes present on both sides.
    pub fn paired_count(&self) -> usize {
        self.eigenvalues.len().min(self.rx_eigenvalues.len())
    }

    pub fn xi_max(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn a_max(&self) -> &CVector {
        &self.tx_modes[0]
    }

    pub fn b_max(&self) -> &CVector {
        &self.rx_modes[0]
    }

    /// Indices of the generator-side modes tied with the largest eigenvalue.
    pub fn dominant_indices(&self) -> Vec<usize> {
        dominant(&self.eigenvalues)
    }

    pub fn rx_dominant_indices(&self) -> Vec<usize> {
        dominant(&self.rx_eigenvalues)
    }

    /// Second-largest distinct eigenvalue, `0` when every mode is dominant.
    pub fn xi_second(&self) -> f64 {
        let top = self.xi_max();
        self.eigenvalues
            .iter()
            .copied()
            .find(|&x| top - x > TIE_TOL)
            .unwrap_or(0.0)
    }

    pub fn tx_dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn rx_dim(&self) -> usize {
        self.rx_eigenvalues.len()
    }

    /// Weights of a receiver-side vector on the `b_i`.
    pub fn rx_weights(&self, v1f: &CVector) -> Result<Vec<C64>> {
        project(&self.rx_modes, v1f, "receiver")
    }
}

fn dominant(values: &[f64]) -> Vec<usize> {
    let top = values[0];
    values
        .iter()
        .enumerate()
        .take_while(|(_, &x)| top - x <= TIE_TOL)
        .map(|(i, _)| i)
        .collect()
}

fn project(modes: &[CVector], v: &CVector, side: &str) -> Result<Vec<C64>> {
    let dim = modes.first().map_or(0, CVector::len);
    if v.len() != dim {
        return Err(Error::Dimension(format!(
            "{side} vector has length {}, modes have length {dim}",
            v.len()
        )));
    }
    Ok(modes.iter().map(|m| m.dot(v)).collect())
}

/// Eigendecomposes both sides of the transmission block.
pub fn beam_modes(s21: &CMatrix) -> Result<BeamModeSet> {
    if s21.rows() == 0 || s21.cols() == 0 {
        return Err(Error::Dimension("empty transmission block".into()));
    }
    let tx = hermitian_eigendecompose(&s21.gram(), CONVERGENCE_TOL)?;
    let rx_op = s21.matmul(&s21.adjoint())?.conj().hermitian_part();
    let rx = hermitian_eigendecompose(&rx_op, CONVERGENCE_TOL)?;
    // both operators are positive semidefinite; drop roundoff below zero
    let clamp = |values: Vec<f64>| values.into_iter().map(|x| x.max(0.0)).collect::<Vec<_>>();
    Ok(BeamModeSet {
        eigenvalues: clamp(tx.values),
        tx_modes: tx.vectors,
        rx_eigenvalues: clamp(rx.values),
        rx_modes: rx.vectors,
    })
}

/// Transfer efficiency `‖s21·v‖² / ‖v‖²` of the generator drive `v2f`.
pub fn efficiency(s21: &CMatrix, v2f: &CVector) -> Result<f64> {
    let denom = v2f.norm_sqr();
    if denom == 0.0 {
        return Err(Error::Domain(
            "efficiency of the zero drive is undefined".into(),
        ));
    }
    Ok(s21.mul_vec(v2f)?.norm_sqr() / denom)
}

/// Weights `a_iᴴ·v2f` of a generator drive on the beam modes.
pub fn decompose_input(modes: &BeamModeSet, v2f: &CVector) -> Result<Vec<C64>> {
    project(&modes.tx_modes, v2f, "generator")
}

/// `Σ ξ_i |w_i|² / Σ |w_i|²`
pub fn weighted_efficiency(weights: &[C64], eigenvalues: &[f64]) -> Result<f64> {
    if weights.len() != eigenvalues.len() {
        return Err(Error::Dimension(format!(
            "{} weights for {} eigenvalues",
            weights.len(),
            eigenvalues.len()
        )));
    }
    let total: f64 = weights.iter().map(|w| w.norm_sqr()).sum();
    if total == 0.0 {
        return Err(Error::Domain("all weights are zero".into()));
    }
    let num: f64 = weights
        .iter()
        .zip(eigenvalues)
        .map(|(w, xi)| xi * w.norm_sqr())
        .sum();
    Ok(num / total)
}

/// Largest achievable efficiency and the drive that attains it.
pub fn max_efficiency(s21: &CMatrix) -> Result<(f64, CVector)> {
    let modes = beam_modes(s21)?;
    Ok((modes.xi_max(), modes.a_max().clone()))
}
