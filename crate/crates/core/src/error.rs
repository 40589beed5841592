use thiserror::Error;

/// Errors raised by the library. Validation failures carry the measured residual.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("labeling error: {0}")]
    Labeling(String),

    #[error("unknown subsystem label `{0}`")]
    UnknownLabel(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("dimension guard: total dimension {dim} exceeds limit {limit}")]
    DimensionGuard { dim: usize, limit: usize },

    #[error("guard exceeded for {what}: {value} > {limit}")]
    GuardExceeded { what: String, value: f64, limit: f64 },

    #[error("not Hermitian: max |M - M^dag| = {residual:e}")]
    NotHermitian { residual: f64 },

    #[error("not positive semidefinite: min eigenvalue = {min_eigenvalue:e}")]
    NotPositive { min_eigenvalue: f64 },

    #[error("trace is not one: |tr - 1| = {residual:e}")]
    BadTrace { residual: f64 },

    #[error("state vector not normalized: |norm - 1| = {residual:e}")]
    NotNormalized { residual: f64 },

    #[error("channel is not trace preserving: max |sum K^dag K - I| = {residual:e}")]
    NotTracePreserving { residual: f64 },

    #[error("not an isometry: max |V^dag V - I| = {residual:e}")]
    NotIsometry { residual: f64 },

    #[error("not a pure state: 1 - tr(rho^2) = {residual:e}")]
    NotPure { residual: f64 },

    #[error("invalid probability distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid POVM: {what} (residual {residual:e})")]
    InvalidPovm { what: String, residual: f64 },

    #[error("infeasible: {what} (residual {residual})")]
    Infeasible { what: String, residual: f64 },

    #[error("empty conditional typical set for x^n = {sequence:?} at delta = {delta}")]
    EmptyTypicalSet { sequence: Vec<usize>, delta: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// True for guard violations (dimension or enumeration limits).
    pub fn is_guard(&self) -> bool {
        matches!(self, Error::DimensionGuard { .. } | Error::GuardExceeded { .. })
    }

    /// True when the input was well formed but the requested task is impossible for it.
    pub fn is_infeasible(&self) -> bool {
        matches!(self, Error::Infeasible { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
