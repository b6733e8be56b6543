use thiserror::Error;

/// Errors produced by the factorization kernels and their drivers.
#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("input contains a non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("one-sided Jacobi SVD did not converge within {sweeps} sweeps")]
    SvdNoConvergence { sweeps: usize },

    #[error("sample matrix collapsed to zero during {stage}")]
    RankCollapse { stage: String },

    #[error("malformed matrix file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl LinalgError {
    /// Numerical breakdowns, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            LinalgError::SvdNoConvergence { .. } | LinalgError::RankCollapse { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, LinalgError>;
