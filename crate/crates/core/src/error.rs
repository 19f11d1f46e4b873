use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("Gamma has a pole at {0}")]
    GammaPole(f64),
    #[error("argument {value} outside the domain of {what}")]
    Domain { what: &'static str, value: f64 },
    #[error("quadrature for {what} did not reach tolerance (last change {last_change:e})")]
    QuadratureNonconvergence { what: &'static str, last_change: f64 },
    #[error("lambda = {0} is within the resonance guard of a nonzero half-integer")]
    Resonance(f64),
    #[error("series truncation tail {tail:e} exceeds tolerance {tol:e}")]
    Truncation { tail: f64, tol: f64 },
    #[error("degenerate input: {0}")]
    Degenerate(&'static str),
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    #[error("diffusion blew up at step {step} (value {value:e})")]
    BlowUp { step: usize, value: f64 },
    #[error("arcosh argument {0} is below 1 beyond round-off")]
    CoshDomain(f64),
    #[error("Jacobi eigen-iteration did not converge")]
    JacobiNonconvergence,
    #[error("solvable-group invariant drifted: {drift:e} > {bound:e}")]
    InvariantDrift { drift: f64, bound: f64 },
    #[error("reachable state space exceeds {0} states")]
    StateExplosion(usize),
    #[error("sample batch too small: {got} < {need}")]
    UndersizedBatch { got: usize, need: usize },
    #[error("degenerate sample variance")]
    DegenerateVariance,
    #[error("bin {bin} too sparse ({got} pairs)")]
    SparseBin { bin: usize, got: usize },
}

pub type Result<T> = core::result::Result<T, Error>;
