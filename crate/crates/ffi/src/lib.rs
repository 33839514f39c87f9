//! C ABI over the `hetspd` solvers.
//!
//! Matrices live behind the opaque [`HetspdMatrix`] handle. Every fallible call
//! returns a [`HetspdStatus`]; on failure a message is kept per thread and can
//! be read with [`hetspd_last_error_message`]. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use hetspd::format::{load_matrix, save_matrix};
use hetspd::{
    factorize, generate_spd, solve_cg, solve_spd, BlockVector, BlockedSPDMatrix, ExecMode, ExecutorId, FormatError,
    KernelParams, SolverConfig, SolverError, TransferKind, TransferLedger,
};

/// Opaque handle to a blocked SPD matrix (or a Cholesky factor).
pub struct HetspdMatrix {
    inner: BlockedSPDMatrix,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HetspdStatus {
    Ok = 0,
    NullPointer = 1,
    ConfigError = 2,
    OutOfRange = 3,
    DimensionError = 4,
    NotSpd = 5,
    SingularBlock = 6,
    NumericalError = 7,
    NotConverged = 8,
    ResidencyError = 9,
    BadMagic = 10,
    VersionMismatch = 11,
    TruncatedFile = 12,
    InvalidHeader = 13,
    TrailingBytes = 14,
    IoError = 15,
    InvalidUtf8 = 16,
    Panic = 17,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HetspdMode {
    Heterogeneous = 0,
    HomogeneousA = 1,
    HomogeneousB = 2,
}

#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct HetspdConfig {
    pub eps: f64,
    pub max_iters: usize,
    /// 0 disables true-residual recomputation.
    pub recompute_interval: usize,
    /// Share of the work placed on executor B, in `[0, 1]`.
    pub fraction: f64,
    /// 0 uses the matrix's own block size; any other value reblocks first.
    pub block_size: usize,
    pub workers_a: usize,
    pub workers_b: usize,
    pub slowdown_a: f64,
    pub slowdown_b: f64,
    pub seed: u64,
    pub mode: HetspdMode,
}

#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct HetspdKernelParams {
    pub signal_variance: f64,
    /// Values `<= 0` select the median pairwise distance.
    pub length_scale: f64,
    pub noise: f64,
    pub dim: usize,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct HetspdStats {
    /// CG iterations, or the number of block columns for Cholesky.
    pub iterations: usize,
    pub recomputations: usize,
    pub converged: bool,
    pub r0_norm: f64,
    pub true_residual: f64,
    pub wall_time_secs: f64,
    pub compute_time_secs: f64,
    pub transfers: usize,
    pub transfer_bytes: u64,
    pub scalar_transfers: usize,
    pub subvector_transfers: usize,
    pub block_transfers: usize,
    pub block_row_transfers: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(HetspdStatus, String);

impl From<SolverError> for Failure {
    fn from(e: SolverError) -> Self {
        let status = match &e {
            SolverError::BlockOutOfRange { .. }
            | SolverError::ElementOutOfRange { .. }
            | SolverError::RangeOutOfBounds { .. } => HetspdStatus::OutOfRange,
            SolverError::Config(_) => HetspdStatus::ConfigError,
            SolverError::NotSpd { .. } => HetspdStatus::NotSpd,
            SolverError::SingularBlock { .. } => HetspdStatus::SingularBlock,
            SolverError::Numerical(_) => HetspdStatus::NumericalError,
            SolverError::NotConverged { .. } => HetspdStatus::NotConverged,
            SolverError::Residency { .. } => HetspdStatus::ResidencyError,
            SolverError::Dimension(_) => HetspdStatus::DimensionError,
            SolverError::Format(f) => match f {
                FormatError::BadMagic { .. } => HetspdStatus::BadMagic,
                FormatError::VersionMismatch { .. } => HetspdStatus::VersionMismatch,
                FormatError::TruncatedFile { .. } => HetspdStatus::TruncatedFile,
                FormatError::InvalidHeader(_) => HetspdStatus::InvalidHeader,
                FormatError::TrailingBytes { .. } => HetspdStatus::TrailingBytes,
            },
            SolverError::Io { .. } => HetspdStatus::IoError,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(HetspdStatus::NullPointer, format!("{what} is NULL"))
}

/// Runs `f`, turning errors and panics into a status plus a stored message.
fn guard(f: impl FnOnce() -> Result<HetspdStatus, Failure>) -> HetspdStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(status)) => status,
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_last_error(format!("internal panic: {msg}"));
            HetspdStatus::Panic
        }
    }
}

unsafe fn matrix_ref<'a>(m: *const HetspdMatrix) -> Result<&'a BlockedSPDMatrix, Failure> {
    m.as_ref().map(|h| &h.inner).ok_or_else(|| null("matrix"))
}

unsafe fn path_str<'a>(path: *const c_char) -> Result<&'a str, Failure> {
    if path.is_null() {
        return Err(null("path"));
    }
    CStr::from_ptr(path)
        .to_str()
        .map_err(|e| Failure(HetspdStatus::InvalidUtf8, format!("path is not UTF-8: {e}")))
}

unsafe fn emit(out: *mut *mut HetspdMatrix, inner: BlockedSPDMatrix) -> Result<HetspdStatus, Failure> {
    *out = Box::into_raw(Box::new(HetspdMatrix { inner }));
    Ok(HetspdStatus::Ok)
}

fn to_config(c: &HetspdConfig, a: &BlockedSPDMatrix) -> SolverConfig {
    SolverConfig {
        eps: c.eps,
        max_iters: c.max_iters,
        recompute_interval: c.recompute_interval,
        fraction: c.fraction,
        block_size: if c.block_size == 0 { a.block_size() } else { c.block_size },
        workers_a: c.workers_a,
        workers_b: c.workers_b,
        slowdown_a: c.slowdown_a,
        slowdown_b: c.slowdown_b,
        seed: c.seed,
        mode: match c.mode {
            HetspdMode::Heterogeneous => ExecMode::Heterogeneous,
            HetspdMode::HomogeneousA => ExecMode::Homogeneous(ExecutorId::A),
            HetspdMode::HomogeneousB => ExecMode::Homogeneous(ExecutorId::B),
        },
    }
}

/// The matrix in the block size the config asks for.
fn blocked<'a>(a: &'a BlockedSPDMatrix, cfg: &SolverConfig) -> Result<std::borrow::Cow<'a, BlockedSPDMatrix>, Failure> {
    if cfg.block_size == a.block_size() {
        Ok(std::borrow::Cow::Borrowed(a))
    } else {
        Ok(std::borrow::Cow::Owned(a.reblock(cfg.block_size)?))
    }
}

fn fill_ledger(s: &mut HetspdStats, ledger: &TransferLedger) {
    s.transfers = ledger.len();
    s.transfer_bytes = ledger.total_bytes();
    s.scalar_transfers = ledger.count(TransferKind::Scalar);
    s.subvector_transfers = ledger.count(TransferKind::Subvector);
    s.block_transfers = ledger.count(TransferKind::Block);
    s.block_row_transfers = ledger.count(TransferKind::BlockRow);
}

/// Shared argument handling of the two solve entry points.
unsafe fn solve_args<'a>(
    a: *const HetspdMatrix,
    config: *const HetspdConfig,
    rhs: *const f64,
    len: usize,
    x_out: *mut f64,
) -> Result<(&'a BlockedSPDMatrix, SolverConfig, &'a [f64]), Failure> {
    let a = matrix_ref(a)?;
    let config = config.as_ref().ok_or_else(|| null("config"))?;
    if rhs.is_null() {
        return Err(null("rhs"));
    }
    if x_out.is_null() {
        return Err(null("x_out"));
    }
    if len != a.n() {
        return Err(Failure(
            HetspdStatus::DimensionError,
            format!("vector length {len} does not match matrix size {}", a.n()),
        ));
    }
    let cfg = to_config(config, a);
    cfg.validate()?;
    Ok((a, cfg, std::slice::from_raw_parts(rhs, len)))
}

/// Defaults matching the command-line tool.
#[no_mangle]
pub extern "C" fn hetspd_config_default() -> HetspdConfig {
    let d = SolverConfig::default();
    HetspdConfig {
        eps: d.eps,
        max_iters: d.max_iters,
        recompute_interval: d.recompute_interval,
        fraction: d.fraction,
        block_size: 0,
        workers_a: d.workers_a,
        workers_b: d.workers_b,
        slowdown_a: d.slowdown_a,
        slowdown_b: d.slowdown_b,
        seed: d.seed,
        mode: HetspdMode::Heterogeneous,
    }
}

#[no_mangle]
pub extern "C" fn hetspd_kernel_params_default() -> HetspdKernelParams {
    let d = KernelParams::default();
    HetspdKernelParams {
        signal_variance: d.signal_variance,
        length_scale: d.length_scale.unwrap_or(0.0),
        noise: d.noise,
        dim: d.dim,
    }
}

/// Message of the last failed call on this thread, or NULL. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn hetspd_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Stable lowercase name of a status code (static storage).
#[no_mangle]
pub extern "C" fn hetspd_status_name(status: HetspdStatus) -> *const c_char {
    let s: &'static CStr = match status {
        HetspdStatus::Ok => c"ok",
        HetspdStatus::NullPointer => c"null_pointer",
        HetspdStatus::ConfigError => c"config_error",
        HetspdStatus::OutOfRange => c"out_of_range",
        HetspdStatus::DimensionError => c"dimension_error",
        HetspdStatus::NotSpd => c"not_spd",
        HetspdStatus::SingularBlock => c"singular_block",
        HetspdStatus::NumericalError => c"numerical_error",
        HetspdStatus::NotConverged => c"not_converged",
        HetspdStatus::ResidencyError => c"residency_error",
        HetspdStatus::BadMagic => c"bad_magic",
        HetspdStatus::VersionMismatch => c"version_mismatch",
        HetspdStatus::TruncatedFile => c"truncated_file",
        HetspdStatus::InvalidHeader => c"invalid_header",
        HetspdStatus::TrailingBytes => c"trailing_bytes",
        HetspdStatus::IoError => c"io_error",
        HetspdStatus::InvalidUtf8 => c"invalid_utf8",
        HetspdStatus::Panic => c"panic",
    };
    s.as_ptr()
}

/// Generates a kernel matrix plus noise diagonal. `params` may be NULL.
///
/// # Safety
/// `params` must be NULL or valid; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hetspd_matrix_generate(
    n: usize,
    block_size: usize,
    seed: u64,
    params: *const HetspdKernelParams,
    out: *mut *mut HetspdMatrix,
) -> HetspdStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let p = params.as_ref().copied().unwrap_or_else(|| hetspd_kernel_params_default());
        let kp = KernelParams {
            signal_variance: p.signal_variance,
            length_scale: (p.length_scale > 0.0).then_some(p.length_scale),
            noise: p.noise,
            dim: p.dim,
        };
        emit(out, generate_spd(n, block_size, &kp, seed)?)
    })
}

/// Builds a matrix from the lower triangle of a dense row-major `n × n` array.
///
/// # Safety
/// `dense` must point to `n * n` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hetspd_matrix_from_dense(
    n: usize,
    block_size: usize,
    dense: *const f64,
    out: *mut *mut HetspdMatrix,
) -> HetspdStatus {
    guard(|| {
        if dense.is_null() {
            return Err(null("dense"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let len = n
            .checked_mul(n)
            .ok_or_else(|| Failure(HetspdStatus::DimensionError, format!("n = {n} overflows")))?;
        let values = std::slice::from_raw_parts(dense, len);
        emit(out, BlockedSPDMatrix::from_dense(n, block_size, values)?)
    })
}

/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hetspd_matrix_load(path: *const c_char, out: *mut *mut HetspdMatrix) -> HetspdStatus {
    guard(|| {
        let path = path_str(path)?;
        if out.is_null() {
            return Err(null("out"));
        }
        emit(out, load_matrix(path)?)
    })
}

/// # Safety
/// `m` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn hetspd_matrix_save(m: *const HetspdMatrix, path: *const c_char) -> HetspdStatus {
    guard(|| {
        let m = matrix_ref(m)?;
        save_matrix(path_str(path)?, m)?;
        Ok(HetspdStatus::Ok)
    })
}

/// Releases a handle. NULL is ignored.
///
/// # Safety
/// `m` must be NULL or a handle not freed before.
#[no_mangle]
pub unsafe extern "C" fn hetspd_matrix_free(m: *mut HetspdMatrix) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Logical size `n`, or 0 for NULL.
///
/// # Safety
/// `m` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hetspd_matrix_size(m: *const HetspdMatrix) -> usize {
    m.as_ref().map_or(0, |h| h.inner.n())
}

/// Block size `b`, or 0 for NULL.
///
/// # Safety
/// `m` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hetspd_matrix_block_size(m: *const HetspdMatrix) -> usize {
    m.as_ref().map_or(0, |h| h.inner.block_size())
}

/// Element `(p, q)` of the symmetric matrix (lower triangle for a factor).
///
/// # Safety
/// `m` must be a live handle and `value` writable.
#[no_mangle]
pub unsafe extern "C" fn hetspd_matrix_element(m: *const HetspdMatrix, p: usize, q: usize, value: *mut f64) -> HetspdStatus {
    guard(|| {
        let m = matrix_ref(m)?;
        if value.is_null() {
            return Err(null("value"));
        }
        *value = m.element(p, q)?;
        Ok(HetspdStatus::Ok)
    })
}

/// Solves `A·x = rhs` with CG. An iteration-capped run still writes `x` and
/// `stats` and returns `NotConverged`. `stats` may be NULL.
///
/// # Safety
/// `rhs` and `x_out` must hold `len` doubles; other pointers valid or NULL as noted.
#[no_mangle]
pub unsafe extern "C" fn hetspd_solve_cg(
    a: *const HetspdMatrix,
    config: *const HetspdConfig,
    rhs: *const f64,
    len: usize,
    x_out: *mut f64,
    stats: *mut HetspdStats,
) -> HetspdStatus {
    guard(|| {
        let (a, cfg, rhs) = solve_args(a, config, rhs, len, x_out)?;
        let a = blocked(a, &cfg)?;
        let r = BlockVector::from_slice(rhs, cfg.block_size)?;
        let out = solve_cg(&a, &r, &cfg)?;
        std::slice::from_raw_parts_mut(x_out, len).copy_from_slice(out.x.values());
        let s = &out.stats;
        if let Some(dst) = stats.as_mut() {
            let mut st = HetspdStats {
                iterations: s.iterations,
                recomputations: s.recomputations,
                converged: s.converged,
                r0_norm: s.r0_norm,
                true_residual: s.true_residual,
                wall_time_secs: s.wall_time.as_secs_f64(),
                compute_time_secs: s.compute_time().as_secs_f64(),
                ..Default::default()
            };
            fill_ledger(&mut st, &s.ledger);
            *dst = st;
        }
        if s.converged {
            Ok(HetspdStatus::Ok)
        } else {
            Err(SolverError::NotConverged { max_iters: cfg.max_iters }.into())
        }
    })
}

/// Solves `A·x = rhs` by Cholesky factorization and two triangular solves.
/// `stats` may be NULL.
///
/// # Safety
/// `rhs` and `x_out` must hold `len` doubles; other pointers valid or NULL as noted.
#[no_mangle]
pub unsafe extern "C" fn hetspd_solve_cholesky(
    a: *const HetspdMatrix,
    config: *const HetspdConfig,
    rhs: *const f64,
    len: usize,
    x_out: *mut f64,
    stats: *mut HetspdStats,
) -> HetspdStatus {
    guard(|| {
        let (a, cfg, rhs) = solve_args(a, config, rhs, len, x_out)?;
        let a = blocked(a, &cfg)?;
        let r = BlockVector::from_slice(rhs, cfg.block_size)?;
        let (x, s) = solve_spd(&a, &r, &cfg)?;
        std::slice::from_raw_parts_mut(x_out, len).copy_from_slice(x.values());
        if let Some(dst) = stats.as_mut() {
            let mut st = HetspdStats {
                iterations: a.block_rows(),
                converged: true,
                r0_norm: r.norm2(),
                true_residual: s.true_residual,
                wall_time_secs: (s.decomposition_time + s.solve_time).as_secs_f64(),
                compute_time_secs: (s.factor.compute_time() + s.solve_time).as_secs_f64(),
                ..Default::default()
            };
            fill_ledger(&mut st, &s.factor.ledger);
            *dst = st;
        }
        Ok(HetspdStatus::Ok)
    })
}

/// Factors `a` into a new handle holding `L` (read it with
/// [`hetspd_matrix_element`] for `p >= q`). `stats` may be NULL.
///
/// # Safety
/// `a` and `config` must be valid; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hetspd_factorize(
    a: *const HetspdMatrix,
    config: *const HetspdConfig,
    out: *mut *mut HetspdMatrix,
    stats: *mut HetspdStats,
) -> HetspdStatus {
    guard(|| {
        let a = matrix_ref(a)?;
        let config = config.as_ref().ok_or_else(|| null("config"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let cfg = to_config(config, a);
        cfg.validate()?;
        let a = blocked(a, &cfg)?;
        let (l, s) = factorize(&a, &cfg)?;
        if let Some(dst) = stats.as_mut() {
            let mut st = HetspdStats {
                iterations: a.block_rows(),
                converged: true,
                wall_time_secs: s.wall_time.as_secs_f64(),
                compute_time_secs: s.compute_time().as_secs_f64(),
                ..Default::default()
            };
            fill_ledger(&mut st, &s.ledger);
            *dst = st;
        }
        emit(out, l)
    })
}
