use thiserror::Error;

/// Errors raised by the numerical kernels and physics modules.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{what}: argument {value} outside domain ({reason})")]
    Domain {
        what: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("non-finite sample at x = {at}")]
    NonFinite { at: f64 },

    #[error(
        "tolerance not met: estimate {estimate}, error {error:e} > {tolerance:e} after {subdivisions} subdivisions"
    )]
    ToleranceNotMet {
        estimate: f64,
        error: f64,
        tolerance: f64,
        subdivisions: usize,
    },

    #[error("step size underflow at t = {t} (h = {step:e}, state = {state:?})")]
    StepUnderflow { t: f64, step: f64, state: Vec<f64> },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("Wronskian drift {drift:e} exceeds {limit:e}")]
    WronskianDrift { drift: f64, limit: f64 },

    #[error("turning point: E - V = {gap:e} at x = {at}")]
    TurningPoint { at: f64, gap: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("degenerate constants: {0}")]
    Degenerate(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
