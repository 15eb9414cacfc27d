use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Clone, Error)]
pub enum QslError {
    #[error("empty spectrum")]
    EmptySpectrum,

    #[error("probabilities sum to {sum}, expected 1 within {tol:e}")]
    ProbabilitySum { sum: f64, tol: f64 },

    #[error("negative energy {0}")]
    NegativeEnergy(f64),

    #[error("duplicate basis label (energy {energy}, degeneracy index {degeneracy})")]
    DuplicateBasisLabel { energy: f64, degeneracy: u32 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// Domain violations of an otherwise well-formed request
    /// ("ground state only", "state not orthogonal at tau", ...).
    #[error("{0}")]
    Domain(String),

    #[error("solver did not converge after {iterations} iterations (residual {residual:.3e})")]
    SolverFailed { iterations: usize, residual: f64 },
}

pub type Result<T> = std::result::Result<T, QslError>;
