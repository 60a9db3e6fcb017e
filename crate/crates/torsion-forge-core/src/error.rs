use thiserror::Error;

/// Errors raised by the torsion library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid shape: {0}")]
    InvalidShape(String),
    #[error("degenerate element: {0}")]
    Degenerate(String),
    #[error("matrix is not unimodular (det = {0})")]
    NonUnimodular(String),
    #[error("index out of range: {0}")]
    Index(String),
    #[error("singular matrix: {0}")]
    Singular(String),
    #[error("rank mismatch in degree {degree}: expected {expected}, found {found}")]
    RankMismatch {
        degree: usize,
        expected: usize,
        found: usize,
    },
    #[error("inconsistent chain complex: {0}")]
    Inconsistent(String),
    #[error("sequence is not acyclic: {0}")]
    NotAcyclic(String),
    #[error("invalid gluing: {0}")]
    Gluing(String),
    #[error("Newton iteration did not converge after {iterations} steps (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },
    #[error("singular Jacobian: {0}")]
    SingularJacobian(String),
}

impl Error {
    /// True for errors caused by malformed or out-of-domain input.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Domain(_)
                | Error::InvalidShape(_)
                | Error::Degenerate(_)
                | Error::Index(_)
                | Error::Gluing(_)
        )
    }

    /// True for failures of the filling solver.
    pub fn is_solver_error(&self) -> bool {
        matches!(self, Error::NonConvergence { .. } | Error::SingularJacobian(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
