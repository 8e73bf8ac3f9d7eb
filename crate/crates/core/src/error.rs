use thiserror::Error;

/// Errors raised by the integrators and their building blocks.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is singular or ill-conditioned (condition estimate {condition:e})")]
    Singular { condition: f64 },

    #[error("eigensolver did not converge within {max_iter} iterations")]
    EigenNoConvergence { max_iter: usize },

    #[error("symplectic form requires an even dimension, got {0}")]
    OddDimension(usize),

    #[error("matrix is not symmetric (asymmetry {asymmetry:e})")]
    Asymmetric { asymmetry: f64 },

    #[error("symplectic correction unavailable (condition estimate {condition:e})")]
    CorrectionUnavailable { condition: f64 },

    #[error("augmented system requested but the problem has no forcing term")]
    MissingForcing,

    #[error("interval length {length} is not an integer multiple of the step {step}")]
    NonIntegerStepCount { length: f64, step: f64 },

    #[error("fixed-point iteration did not converge after {iterations} sweeps (last change {residual:e})")]
    FixedPointNoConvergence { iterations: usize, residual: f64 },

    #[error("invalid quadrature rule: {0}")]
    InvalidRule(String),

    #[error("invalid coefficient table: {0}")]
    InvalidTable(String),

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("unknown method `{0}`")]
    UnknownMethod(String),

    #[error("{0}")]
    Unsupported(String),

    #[error("step {index} at t = {t} failed: {source}")]
    Step { index: usize, t: f64, source: Box<Error> },

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn at_step(self, index: usize, t: f64) -> Self {
        match self {
            e @ Error::Step { .. } => e,
            other => Error::Step {
                index,
                t,
                source: Box::new(other),
            },
        }
    }

    /// True for failures that come from the numerics rather than from the
    /// configuration (singular solves, non-convergence).
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::Singular { .. }
            | Error::EigenNoConvergence { .. }
            | Error::CorrectionUnavailable { .. }
            | Error::FixedPointNoConvergence { .. } => true,
            Error::Step { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
