//! Simulation of quantum algorithms built from controlled power queries
//! `W_l^p`, which apply `Q^p` to a target register when control qubit `l` is
//! set.
//!
//! Two engines execute the same [`Circuit`]:
//!
//! - [`numeric`] multiplies amplitudes by `e^{2 pi i p phi_s}` for concrete
//!   eigenphases and returns a [`StateVector`];
//! - [`symbolic`] keeps every amplitude as a trigonometric polynomial in the
//!   eigenphases and records which frequency multi-indices can occur.
//!
//! Evaluating the symbolic state at any phases must reproduce the numeric
//! state. [`freqset`] computes the integer frequency sets a power schedule
//! can generate, and [`lab`] runs phase estimation experiments that tie the
//! two together: bucket probability curves, the DFT frequency audit, and the
//! query-count sweep.

pub mod error;
pub mod freqset;
pub mod lab;
pub mod model;
pub mod numeric;
pub mod symbolic;

pub use error::{Error, Result};
pub use freqset::{PowerSchedule, ScalarFreqSet};
pub use model::{circular_distance, phase_of_outcome, EigenSpec, Phase, RegisterLayout};
pub use numeric::{run_circuit, Circuit, Gate, MeasurementDistribution, StateVector, Unitary};
pub use symbolic::{MultiIndex, SymbolicState, TrigPoly};

pub use num_complex::Complex64;
