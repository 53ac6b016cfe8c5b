use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("marker column {0} is constant (standard deviation below 1e-12)")]
    ConstantColumn(usize),

    #[error("response is constant (standard deviation below 1e-12)")]
    DegenerateResponse,

    #[error("matrix is not symmetric: max asymmetry {asymmetry:e} exceeds tolerance")]
    NotSymmetric { asymmetry: f64 },

    #[error("solver did not converge within {max_iterations} iterations")]
    NoConvergence { max_iterations: usize },

    #[error("lambda = 0 requires p < n (got n = {n}, p = {p})")]
    UnderdeterminedUnpenalized { n: usize, p: usize },

    #[error("{replicates} replicates are too few for the ({quantile}) quantile at alpha = {alpha}")]
    InsufficientReplicates {
        replicates: usize,
        alpha: f64,
        quantile: usize,
    },

    #[error("replicate {index}: {source}")]
    Replicate {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("calibration table fingerprint {table:016x} does not match dataset fingerprint {data:016x}")]
    FingerprintMismatch { table: u64, data: u64 },

    #[error("calibration table has no entry for r = {0}")]
    MissingEntry(usize),

    #[error("calibration table did not pass its size validation and cannot be used for testing")]
    UnvalidatedTable,

    #[error("marker {0}: residual variance underflows (perfect fit)")]
    DegenerateFit(usize),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn at_replicate(self, index: usize) -> Self {
        Error::Replicate {
            index,
            source: Box::new(self),
        }
    }
}
