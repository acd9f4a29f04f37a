use std::path::PathBuf;

use thiserror::Error;

/// Failure of an iterative linear solver.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverReport {
    pub solver: &'static str,
    pub iterations: usize,
    pub residual: f64,
    pub target: f64,
}

impl std::fmt::Display for SolverReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} stalled after {} iterations (residual {:.3e}, target {:.3e})",
            self.solver, self.iterations, self.residual, self.target
        )
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("solver failure: {0}")]
    SolverFailure(SolverReport),

    #[error("indefinite velocity block: {0}")]
    Indefinite(String),

    #[error("mass conservation violated: drift {drift:.3e} exceeds {tolerance:.3e}")]
    ConservationViolation { drift: f64, tolerance: f64 },

    #[error("fixed-point iteration did not converge in {iterations} iterations (last change {last:.3e})")]
    NonConvergence {
        iterations: usize,
        last: f64,
        history: Vec<f64>,
    },

    #[error("step {step}: {source}")]
    Step {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}:{line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
}

impl Error {
    /// Strips `Step` wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Step { source, .. } => source.root(),
            other => other,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
