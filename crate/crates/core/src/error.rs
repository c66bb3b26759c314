//! Crate error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Configuration text failed to parse.
    #[error("config parse error: {0}")]
    Parse(String),

    /// A validated invariant of the problem data does not hold. The string
    /// names the offending key or quantity.
    #[error("invalid configuration: {0}")]
    Invalid(String),

    /// Matrix/vector dimensions do not agree.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// A constraint set admits no feasible point.
    #[error("infeasible: {0}")]
    Infeasible(String),

    /// The numerical solver failed to converge or reported an error status.
    #[error("solver failure: {0}")]
    Solver(String),

    /// A numerical operation produced an unusable result (singular matrix,
    /// zero input where nonzero is required, ...).
    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}
