//! Scattering matrices, channel property checks and port-role bookkeeping.
//!
//! Ports are numbered from 1 at every public boundary, the way they are
//! labelled on a physical board. Conversion to 0-based indices happens
//! once, inside [`ScatteringMatrix::subblock`].

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::linalg::CMatrix;

pub const DEFAULT_REFERENCE_OHMS: f64 = 50.0;

/// Square S-parameter matrix at a single frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatteringMatrix {
    s: CMatrix,
    frequency_hz: f64,
    reference_ohms: f64,
}

impl ScatteringMatrix {
    pub fn new(s: CMatrix, frequency_hz: f64, reference_ohms: f64) -> Result<Self> {
        if !s.is_square() {
            return Err(Error::Dimension(format!(
                "S-matrix must be square, got {}x{}",
                s.rows(),
                s.cols()
            )));
        }
        if !(frequency_hz > 0.0 && frequency_hz.is_finite()) {
            return Err(Error::Domain(format!(
                "frequency must be positive, got {frequency_hz}"
            )));
        }
        if !(reference_ohms > 0.0 && reference_ohms.is_finite()) {
            return Err(Error::Domain(format!(
                "reference impedance must be positive, got {reference_ohms}"
            )));
        }
        Ok(Self {
            s,
            frequency_hz,
            reference_ohms,
        })
    }

    /// Matrix at `frequency_hz` with the default 50 Ω reference.
    pub fn with_frequency(s: CMatrix, frequency_hz: f64) -> Result<Self> {
        Self::new(s, frequency_hz, DEFAULT_REFERENCE_OHMS)
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.s
    }

    pub fn into_matrix(self) -> CMatrix {
        self.s
    }

    pub fn port_count(&self) -> usize {
        self.s.rows()
    }

    pub fn frequency_hz(&self) -> f64 {
        self.frequency_hz
    }

    pub fn reference_ohms(&self) -> f64 {
        self.reference_ohms
    }

    /// `max |S_ij − S_ji| ≤ tol`
    pub fn is_reciprocal(&self, tol: f64) -> bool {
        reciprocity_error(&self.s) <= tol
    }

    /// Max-entry deviation of `SᴴS` from the identity is at most `tol`.
    pub fn is_lossless(&self, tol: f64) -> bool {
        unitarity_error(&self.s) <= tol
    }

    /// Extracts `S[row_ports][col_ports]` using 1-based port numbers.
    pub fn subblock(&self, row_ports: &[usize], col_ports: &[usize]) -> Result<CMatrix> {
        let rows = to_zero_based(row_ports, self.port_count())?;
        let cols = to_zero_based(col_ports, self.port_count())?;
        self.s.select(&rows, &cols)
    }

    /// The receiver-by-generator transmission block for `partition`
    /// (`rx_active` rows, `tx_active` columns).
    pub fn transmission(&self, partition: &PortPartition) -> Result<CMatrix> {
        partition.validate(self.port_count())?;
        self.subblock(&partition.rx_active, &partition.tx_active)
    }
}

fn to_zero_based(ports: &[usize], n: usize) -> Result<Vec<usize>> {
    ports
        .iter()
        .map(|&p| {
            if p == 0 || p > n {
                Err(Error::PortOutOfRange { port: p, n })
            } else {
                Ok(p - 1)
            }
        })
        .collect()
}

/// Largest `|S_ij − S_ji|`.
pub fn reciprocity_error(s: &CMatrix) -> f64 {
    s.max_abs_diff(&s.transpose())
}

/// Largest entry of `|SᴴS − I|`.
pub fn unitarity_error(s: &CMatrix) -> f64 {
    let g = s.adjoint().matmul(s).expect("square");
    g.max_abs_diff(&CMatrix::identity(s.rows()))
}

/// Assignment of 1-based ports to the four wave roles of a WPT channel.
///
/// `rx_active` ports drive and sense the receiving array, `tx_active`
/// ports belong to the generator, and the absorbing sets are terminated in
/// matched loads (power lost to free space).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PortPartition {
    pub rx_active: Vec<usize>,
    pub tx_active: Vec<usize>,
    pub rx_absorbing: Vec<usize>,
    pub tx_absorbing: Vec<usize>,
}

impl PortPartition {
    pub fn new(
        rx_active: Vec<usize>,
        tx_active: Vec<usize>,
        rx_absorbing: Vec<usize>,
        tx_absorbing: Vec<usize>,
    ) -> Self {
        Self {
            rx_active,
            tx_active,
            rx_absorbing,
            tx_absorbing,
        }
    }

    /// Active sets as given; every remaining port of `1..=n` is absorbing.
    /// Unused ports with number `<= rx_side` go to `rx_absorbing`, the rest
    /// to `tx_absorbing`.
    pub fn with_remaining_absorbing(
        rx_active: Vec<usize>,
        tx_active: Vec<usize>,
        n: usize,
        rx_side: usize,
    ) -> Result<Self> {
        let used: BTreeSet<usize> = rx_active.iter().chain(&tx_active).copied().collect();
        let (rx_absorbing, tx_absorbing): (Vec<usize>, Vec<usize>) = (1..=n)
            .filter(|p| !used.contains(p))
            .partition(|&p| p <= rx_side);
        let p = Self {
            rx_active,
            tx_active,
            rx_absorbing,
            tx_absorbing,
        };
        p.validate(n)?;
        Ok(p)
    }

    /// Checks disjointness, coverage of `1..=n`, and non-empty active sets.
    pub fn validate(&self, n: usize) -> Result<()> {
        if self.rx_active.is_empty() || self.tx_active.is_empty() {
            return Err(Error::Partition(
                "active port sets must be non-empty".into(),
            ));
        }
        let mut seen = BTreeSet::new();
        for &p in self.all_ports() {
            if p == 0 || p > n {
                return Err(Error::PortOutOfRange { port: p, n });
            }
            if !seen.insert(p) {
                return Err(Error::Partition(format!(
                    "port {p} assigned more than once"
                )));
            }
        }
        if seen.len() != n {
            let missing: Vec<String> = (1..=n)
                .filter(|p| !seen.contains(p))
                .map(|p| p.to_string())
                .collect();
            return Err(Error::Partition(format!(
                "ports not assigned: {}",
                missing.join(",")
            )));
        }
        Ok(())
    }

    fn all_ports(&self) -> impl Iterator<Item = &usize> {
        self.rx_active
            .iter()
            .chain(&self.tx_active)
            .chain(&self.rx_absorbing)
            .chain(&self.tx_absorbing)
    }
}

/// Outer edge of the radiative near field, `2·D²/λ`.
pub fn fraunhofer_distance(diameter_m: f64, wavelength_m: f64) -> Result<f64> {
    if !(wavelength_m > 0.0) {
        return Err(Error::Domain(format!(
            "wavelength must be positive, got {wavelength_m}"
        )));
    }
    if !(diameter_m >= 0.0) {
        return Err(Error::Domain(format!(
            "diameter must be non-negative, got {diameter_m}"
        )));
    }
    Ok(2.0 * diameter_m * diameter_m / wavelength_m)
}

/// Column Euclidean norms, used when checking lossless matrices.
pub fn column_norms(s: &CMatrix) -> Vec<f64> {
    (0..s.cols()).map(|j| s.column(j).norm()).collect()
}
