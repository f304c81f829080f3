use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("inconsistent dimensions: {0}")]
    Dimension(String),
    #[error("matrix views disagree: {0}")]
    Matrix(String),
    #[error("column {0} has lower bound above upper bound")]
    CrossedBounds(String),
    #[error("row {0} has left-hand side above right-hand side")]
    CrossedSides(String),
}

/// A proof about the whole problem found while presolving.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Verdict {
    #[error("problem is infeasible: {0}")]
    Infeasible(String),
    /// The objective is unbounded on the feasible region (or the region is empty).
    #[error("problem is unbounded: {0}")]
    Unbounded(String),
}

impl Verdict {
    pub fn infeasible(msg: impl Into<String>) -> Self {
        Verdict::Infeasible(msg.into())
    }

    pub fn unbounded(msg: impl Into<String>) -> Self {
        Verdict::Unbounded(msg.into())
    }
}
