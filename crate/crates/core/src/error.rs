use std::path::PathBuf;

/// Errors raised by the estimate evaluators, the solvers and the verification harness.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of a formula.
    #[error("domain error: {0}")]
    Domain(String),

    /// A free parameter violates its admissibility rule.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// The requested bound does not exist for these constants.
    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("Newton iteration stalled at step {step} after {iterations} iterations (residual {residual:e})")]
    NewtonNonConvergence {
        step: usize,
        iterations: usize,
        residual: f64,
    },

    #[error("linear solver breakdown: {0}")]
    LinearSolver(String),

    #[error("fixed-point iteration diverged after {iterations} iterations (last ratio {ratio})")]
    Divergence { iterations: usize, ratio: f64 },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub(crate) fn infeasible(msg: impl Into<String>) -> Self {
        Error::Infeasible(msg.into())
    }

    pub(crate) fn shape(msg: impl Into<String>) -> Self {
        Error::Shape(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
