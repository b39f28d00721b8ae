//! Floating-point state-vector execution of power-query circuits.

mod circuit;
mod kernels;
mod measure;
mod state;
mod unitary;

pub use circuit::{run_circuit, Circuit, Gate};
pub use measure::{measurement_distribution, MeasurementDistribution};
pub use state::{StateVector, NORM_TOLERANCE};
pub use unitary::{unitarity_deviation, Unitary, UNITARITY_TOLERANCE};

pub(crate) use kernels::{hadamard_layer, inverse_qft};
pub(crate) use measure::check_epsilon;
