use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the reconstruction pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (max asymmetry {asymmetry:e})")]
    NotHermitian { asymmetry: f64 },

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eig:e}, max {max_eig:e})")]
    NotPsd { min_eig: f64, max_eig: f64 },

    #[error("matrix is singular (rank {rank} of {dim})")]
    Singular { rank: usize, dim: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("codebook is empty")]
    EmptyCodebook,

    #[error("target matrix rank {target_rank} exceeds estimate rank {rank}")]
    InfeasibleTarget { target_rank: usize, rank: usize },

    #[error("point is not strictly feasible: {0}")]
    InfeasibleEvaluation(String),

    #[error("center problem has no strictly feasible point: {0}")]
    InfeasibleProblem(String),

    #[error("beam precision undefined: {0}")]
    UndefinedMetric(String),

    #[error("parse error in {path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("symmetry violation {asymmetry:e} at ({row}, {col})")]
    SymmetryViolation {
        row: usize,
        col: usize,
        asymmetry: f64,
    },

    #[error("negative eigenvalue {0:e}")]
    NegativeEigenvalue(f64),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable machine-readable code for the error kind.
    pub fn code(&self) -> &'static str {
        match self {
            Error::NotHermitian { .. } => "not_hermitian",
            Error::NotPsd { .. } => "not_psd",
            Error::Singular { .. } => "singular",
            Error::DimensionMismatch(_) => "dimension_mismatch",
            Error::Config(_) => "config",
            Error::EmptyCodebook => "empty_codebook",
            Error::InfeasibleTarget { .. } => "infeasible_target",
            Error::InfeasibleEvaluation(_) => "infeasible_evaluation",
            Error::InfeasibleProblem(_) => "infeasible_problem",
            Error::UndefinedMetric(_) => "undefined_metric",
            Error::Parse { .. } => "parse",
            Error::SymmetryViolation { .. } => "symmetry_violation",
            Error::NegativeEigenvalue(_) => "negative_eigenvalue",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
