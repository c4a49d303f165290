//! Error types shared across the crate.

use thiserror::Error;

/// Errors raised by state construction, conditioning and sweeps.
#[derive(Debug, Error)]
pub enum Error {
    /// A physical parameter is outside its admissible range.
    #[error("invalid parameter {name} = {value}: requires {requirement}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        requirement: &'static str,
    },

    /// A truncated-space layout is malformed (zero-dimension mode, bad tail
    /// tolerance, …).
    #[error("invalid truncation: {0}")]
    InvalidTruncation(String),

    /// Two objects live on incompatible truncated spaces.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: String, got: String },

    /// Probability mass beyond the Fock cutoff exceeds the configured
    /// tail tolerance.
    #[error("truncation tail {mass:.3e} exceeds tolerance {tol:.3e} ({context})")]
    TruncationTail {
        mass: f64,
        tol: f64,
        context: String,
    },

    /// Norm lost while applying an operator exceeded the tail tolerance.
    #[error("truncation leakage {leakage:.3e} on modes ({mode_a}, {mode_b}) exceeds tolerance {tol:.3e}")]
    TruncationLeakage {
        mode_a: usize,
        mode_b: usize,
        leakage: f64,
        tol: f64,
    },

    /// The requested matrix is not Hermitian within tolerance.
    #[error("matrix not Hermitian: max |rho - rho^dag| entry = {deviation:.3e}")]
    NotHermitian { deviation: f64 },

    /// Partial trace over every mode (or an empty keep set) was requested.
    #[error("partial trace requires a nonempty set of kept modes")]
    EmptyKeepSet,

    /// Conditioning on an outcome of probability zero.
    #[error("conditional state undefined: {0}")]
    ConditioningUndefined(String),

    /// The quadrature domain misses too much probability mass.
    #[error("quadrature radius {radius} leaves estimated tail mass {mass:.3e}; increase the radius")]
    QuadratureTail { radius: f64, mass: f64 },

    /// A scalar diagnostic is undefined for this state.
    #[error("{0}")]
    UndefinedDiagnostic(String),

    /// The root scan found more than one sign change.
    #[error("ambiguous root for {quantity}: sign changes in {brackets:?}")]
    AmbiguousBrackets {
        quantity: &'static str,
        brackets: Vec<(f64, f64)>,
    },

    /// Malformed sweep specification.
    #[error("invalid sweep spec: {0}")]
    InvalidSweep(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
