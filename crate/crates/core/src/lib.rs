//! Dense SPD solvers over packed lower-triangular block storage, split across two
//! executors with separate memory spaces.
//!
//! * [`cg`]: conjugate gradients with a row split and partial-sum scalar products.
//! * [`cholesky`]: blocked right-looking Cholesky with a moving border, plus
//!   forward/back substitution.
//! * [`executor`]: the two worker pools, residency tracking and the transfer ledger.

pub mod bench;
pub mod cg;
pub mod cholesky;
pub mod config;
pub mod error;
pub mod executor;
pub mod format;
pub mod genmat;
pub mod kernels;
pub mod ledger;
pub mod matrix;
pub mod partition;

pub use cg::{solve_cg, CgOutcome, CgStats};
pub use cholesky::{back_substitute, factorize, forward_substitute, solve_spd, CholeskyStats, SolveStats};
pub use config::{ExecMode, SolverConfig};
pub use genmat::{generate_spd, KernelParams};
pub use error::{FormatError, Result, SolverError};
pub use executor::ExecutorId;
pub use ledger::{Direction, LedgerSummary, TransferEntry, TransferKind, TransferLedger};
pub use matrix::{block_count, block_index, BlockVector, BlockedSPDMatrix};
pub use partition::{cholesky_border, partition_for_fraction, CholeskyPlan, Partition};
