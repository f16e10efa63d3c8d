use thiserror::Error;

/// Everything that can go wrong while assembling or running a simulation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("exponent at position {pos} is not a non-negative integer literal")]
    BadExponent { pos: usize },
    #[error("exponent {value} at position {pos} exceeds the limit of {limit}")]
    ExponentTooLarge { pos: usize, value: String, limit: u32 },
    #[error("variable index 0 at position {pos}; variables are numbered from x1")]
    ZeroVariableIndex { pos: usize },
    #[error("polynomial mentions x{index} but only {declared} variables were declared")]
    VariableOutOfRange { index: usize, declared: usize },
    #[error("arity mismatch: expected {expected}, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("D(n)^2 = {value} at label {label:?} exceeds 2^53 and cannot be represented exactly")]
    PrecisionGuard { label: Vec<u64>, value: String },

    #[error("invalid boundary condition: {0}")]
    BoundaryCondition(String),
    #[error("mode {mode} out of range 1..={num_modes}")]
    ModeOutOfRange { mode: usize, num_modes: usize },
    #[error("Fock space dimension {dimension} exceeds the dense limit {limit}")]
    DimensionTooLarge { dimension: u128, limit: usize },
    #[error("invalid Fock space: {0}")]
    InvalidSpace(String),

    #[error("coherent amplitude alpha_{index} has magnitude {magnitude:e}, must be non-zero")]
    ZeroAlpha { index: usize, magnitude: f64 },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("matrix is not Hermitian: |H - H^dagger| max {deviation:e} > tolerance {tolerance:e}")]
    NotHermitian { deviation: f64, tolerance: f64 },
    #[error("invalid interpolation parameter s = {0}")]
    InvalidParameter(String),
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("eigensolver failed: {0}")]
    Solver(String),
    #[error("operation requires a single mode (K = 1), got K = {0}")]
    SingleModeOnly(usize),
    #[error("eigen index {index} out of range for dimension {dimension}")]
    EigenIndex { index: usize, dimension: usize },

    #[error("coherent-state tail mass {tail:e} beyond cutoff exceeds {limit:e}; raise the cutoff")]
    TailMass { tail: f64, limit: f64 },
    #[error("state is not normalized: norm {norm}")]
    NotNormalized { norm: f64 },
    #[error("norm drift {drift:e} exceeds {limit:e} after {step} steps; reduce the step size")]
    NormDrift { drift: f64, limit: f64, step: usize },

    #[error("premise violated: excited label {label:?} starts with probability {probability} >= 1/2")]
    PremiseViolation { label: Vec<usize>, probability: f64 },
    #[error("invalid experiment config: {0}")]
    Config(String),
}

impl Error {
    /// True for failures raised by numerical guards rather than bad input.
    pub fn is_numerical_guard(&self) -> bool {
        matches!(
            self,
            Error::PrecisionGuard { .. }
                | Error::DimensionTooLarge { .. }
                | Error::NotHermitian { .. }
                | Error::Solver(_)
                | Error::TailMass { .. }
                | Error::NotNormalized { .. }
                | Error::NormDrift { .. }
                | Error::PremiseViolation { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
