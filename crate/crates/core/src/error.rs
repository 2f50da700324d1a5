use num_complex::Complex64;
use thiserror::Error;

/// Errors raised by the library. Numerical payloads are reported as `f64`
/// regardless of the scalar type the computation ran in.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("size limit exceeded: {what} = {value} (limit {limit})")]
    SizeLimit {
        what: &'static str,
        value: usize,
        limit: usize,
    },

    #[error("singular propagator: dynamical map not invertible at t1 = {t1} (K = N/2 at an odd half-period)")]
    Singular { t1: f64 },

    #[error("degenerate reduced state at t = {t}: excitation probability vanishes")]
    DegenerateState {
        t: f64,
        /// Internal vector approached as t is reached from below; the limit
        /// from above is its negative.
        left_limit: Vec<Complex64>,
    },

    #[error("dimension mismatch: expected {expected}x{expected}, got {rows}x{cols}")]
    Dimension {
        expected: usize,
        rows: usize,
        cols: usize,
    },

    #[error("Fisher information diverges: {0}")]
    Divergent(String),

    #[error("pole in unrescaled Fisher decomposition at t2 = {t2} (p = {p}); use the rescaled form")]
    Pole { t2: f64, p: f64 },

    #[error("oracle failure: {0}")]
    Oracle(String),

    #[error("unsupported oracle request: {0}")]
    Unsupported(String),

    #[error("indeterminate: {0}")]
    Indeterminate(String),

    #[error("inconsistent observation: {0}")]
    Inconsistent(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
