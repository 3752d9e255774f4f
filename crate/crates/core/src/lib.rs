//! S-parameter analysis of wireless power transfer channels and simulation
//! of both-sides retrodirective feedback loops.
//!
//! * [`network`]: scattering matrices, port partitions, the transmission block
//! * [`touchstone`]: `.sNp` reading and writing
//! * [`eigenbeam`]: beam modes and transfer efficiency
//! * [`synth`]: seeded lossless reciprocal channels
//! * [`dynamics`]: the retrodirective loop, stability and gain sweeps
//! * [`experiment`]: the measurement-campaign table and loss regression
//! * [`export`]: CSV/JSON artifacts

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod eigenbeam;
pub mod error;
pub mod experiment;
pub mod export;
pub mod linalg;
pub mod network;
pub mod synth;
pub mod touchstone;

pub use dynamics::{
    LoopConfig, LoopState, Saturation, Stability, SweepConfig, SweepResult, V2fConvention,
};
pub use eigenbeam::BeamModeSet;
pub use error::{Error, Result};
pub use experiment::{ExperimentCase, RegressionResult};
pub use linalg::{CMatrix, CVector, C64};
pub use network::{PortPartition, ScatteringMatrix};
pub use touchstone::{TouchstoneDocument, ValueFormat};
