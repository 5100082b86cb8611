use std::path::PathBuf;

use thiserror::Error;

use crate::spectral::EigenPair;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not symmetric at ({row}, {col})")]
    NotSymmetric { row: usize, col: usize },

    #[error("non-finite value in {what}")]
    NonFinite { what: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("eigensolver did not converge within {max_iter} iterations (residual {residual:.3e})")]
    NoConvergence {
        max_iter: usize,
        residual: f64,
        best: Box<EigenPair>,
    },

    #[error("first eigenvector entry {index} is degenerate (|v_i| = {magnitude:.3e})")]
    DegenerateEigenvector { index: usize, magnitude: f64 },

    #[error("eigenvector sign at node {node} disagrees with its color")]
    SignPatternViolation { node: usize },

    #[error("scalar s_{index} is zero")]
    ZeroScalar { index: usize },

    #[error("degree of node {node} is not positive ({degree})")]
    NonPositiveDegree { node: usize, degree: f64 },

    #[error("floors sum to {total} which exceeds the budget {budget}")]
    InfeasibleFloors { total: f64, budget: f64 },

    #[error("linear program is {0}")]
    LpStatus(&'static str),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("unsupported label set {0:?}; expected two classes")]
    UnsupportedLabelSet(Vec<String>),

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("need at least {needed} samples, have {have}")]
    TooFewSamples { needed: usize, have: usize },

    #[error("cannot split {n} samples into {folds} folds")]
    TooManyFolds { n: usize, folds: usize },

    #[error("graph is unbalanced; edge ({0}, {1}) closes a cycle with an odd number of negative edges")]
    Unbalanced(usize, usize),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
