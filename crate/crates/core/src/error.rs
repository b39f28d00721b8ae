use thiserror::Error;

/// Errors raised by the engines and the combinatorics layer.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("register layout needs 1 <= c <= {max_c} and 1 <= t <= {max_t}, got c={c}, t={t}")]
    LayoutOutOfRange {
        c: usize,
        t: usize,
        max_c: usize,
        max_t: usize,
    },
    #[error("layout mismatch: expected c={expected_c}, t={expected_t}, got c={got_c}, t={got_t}")]
    LayoutMismatch {
        expected_c: usize,
        expected_t: usize,
        got_c: usize,
        got_t: usize,
    },
    #[error("control index l={l} outside 1..={c}")]
    ControlOutOfRange { l: usize, c: usize },
    #[error("basis label {k} outside 0..{dim}")]
    LabelOutOfRange { k: usize, dim: usize },
    #[error("expected {expected} eigenphases, got {got}")]
    PhaseCount { expected: usize, got: usize },
    #[error("expected {expected} amplitudes, got {got}")]
    AmplitudeCount { expected: usize, got: usize },
    #[error("state is not normalized (squared norm {norm_sqr})")]
    NotNormalized { norm_sqr: f64 },
    #[error("matrix is {rows}x{cols}, expected {dim}x{dim}")]
    MatrixShape { rows: usize, cols: usize, dim: usize },
    #[error("matrix is not unitary: max |U^H U - I| = {deviation:e}")]
    NotUnitary { deviation: f64 },
    #[error("power schedule entries must be >= 1 (entry {index} is 0)")]
    ZeroPower { index: usize },
    #[error("precision must satisfy 0 < eps <= 1/2, got {eps}")]
    InvalidEpsilon { eps: f64 },
    #[error("1/(2 eps) must be a positive integer, got {value}")]
    NonIntegerGrid { value: f64 },
    #[error("grid index r={r} outside 0..{n}")]
    GridIndexOutOfRange { r: u64, n: u64 },
    #[error("{what} exceeds its guard ({size} > {limit})")]
    GuardExceeded {
        what: &'static str,
        size: u128,
        limit: u128,
    },
    #[error("query count T={t} outside {min}..={max}")]
    QueryCountOutOfRange { t: usize, min: usize, max: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
