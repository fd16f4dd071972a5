use std::path::PathBuf;

/// Errors produced by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("empty matrix or vector")]
    Empty,

    #[error("non-finite entry at index {0}")]
    NonFinite(usize),

    #[error("matrix is not symmetric (max asymmetry {0:.3e})")]
    NotSymmetric(f64),

    #[error("matrix is not positive definite (pivot {pivot} = {value:.3e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("matrix has zero trace")]
    DegenerateMatrix,

    #[error("all sampling weights are zero")]
    DegenerateWeights,

    #[error("negative sampling weight {value} at index {index}")]
    NegativeWeight { index: usize, value: f64 },

    #[error("row {0} has zero norm")]
    ZeroNormRow(usize),

    #[error("column {0} has zero norm")]
    ZeroNormColumn(usize),

    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("closed forms disagree by {0:.3e}")]
    OracleInconsistency(f64),

    #[error("could not generate a full-rank instance after {0} attempts")]
    GenerationFailure(usize),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {msg}")]
    Parse { path: PathBuf, line: usize, msg: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
