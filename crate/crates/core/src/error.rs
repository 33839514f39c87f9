use std::path::PathBuf;

use crate::executor::{ExecutorId, Region};

/// Errors raised by storage, kernels, executors and the solvers.
#[derive(Debug, thiserror::Error)]
pub enum SolverError {
    #[error("block index ({row}, {col}) out of range for {blocks} block rows")]
    BlockOutOfRange { row: usize, col: usize, blocks: usize },

    #[error("element index ({row}, {col}) out of range for n = {n}")]
    ElementOutOfRange { row: usize, col: usize, n: usize },

    #[error("block-row interval [{lo}, {hi}) out of range for {blocks} block rows")]
    RangeOutOfBounds { lo: usize, hi: usize, blocks: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("matrix is not positive definite: non-positive pivot {pivot} in diagonal block {block_row}")]
    NotSpd { block_row: usize, pivot: usize },

    #[error("singular triangular block: zero or non-finite diagonal at index {index}")]
    SingularBlock { index: usize },

    #[error("non-finite value encountered in {0}")]
    Numerical(String),

    #[error("CG did not converge within {max_iters} iterations")]
    NotConverged { max_iters: usize },

    #[error("{region} is not resident on executor {executor}")]
    Residency { executor: ExecutorId, region: Region },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error(transparent)]
    Format(#[from] FormatError),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl SolverError {
    /// Stable machine-readable name, used in CSV status columns and CLI errors.
    pub fn kind(&self) -> &'static str {
        match self {
            SolverError::BlockOutOfRange { .. }
            | SolverError::ElementOutOfRange { .. }
            | SolverError::RangeOutOfBounds { .. } => "out_of_range",
            SolverError::Config(_) => "config_error",
            SolverError::NotSpd { .. } => "not_spd",
            SolverError::SingularBlock { .. } => "singular_block",
            SolverError::Numerical(_) => "numerical_error",
            SolverError::NotConverged { .. } => "not_converged",
            SolverError::Residency { .. } => "residency_error",
            SolverError::Dimension(_) => "dimension_error",
            SolverError::Format(e) => e.kind(),
            SolverError::Io { .. } => "io_error",
        }
    }

    /// True for failures of the numerical method itself (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            SolverError::NotSpd { .. }
                | SolverError::SingularBlock { .. }
                | SolverError::Numerical(_)
                | SolverError::NotConverged { .. }
        )
    }
}

/// Errors reading a BSPD1 matrix or vector file.
#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum FormatError {
    #[error("bad magic bytes {found:?}, expected \"BSPD\"")]
    BadMagic { found: Vec<u8> },

    #[error("unsupported format version {found}, expected 1")]
    VersionMismatch { found: u8 },

    #[error("truncated file: expected {expected} bytes, found {actual}")]
    TruncatedFile { expected: u64, actual: u64 },

    #[error("invalid header: {0}")]
    InvalidHeader(String),

    #[error("{extra} unexpected trailing bytes")]
    TrailingBytes { extra: u64 },
}

impl FormatError {
    pub fn kind(&self) -> &'static str {
        match self {
            FormatError::BadMagic { .. } => "bad_magic",
            FormatError::VersionMismatch { .. } => "version_mismatch",
            FormatError::TruncatedFile { .. } => "truncated_file",
            FormatError::InvalidHeader(_) => "invalid_header",
            FormatError::TrailingBytes { .. } => "trailing_bytes",
        }
    }
}

pub type Result<T, E = SolverError> = std::result::Result<T, E>;
