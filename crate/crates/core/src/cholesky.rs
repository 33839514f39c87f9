//! Right-looking blocked Cholesky with a moving border between the executors.
//!
//! For column `j` with border `β`, block rows `[j, β)` belong to executor A and
//! `[β, N)` to executor B. A factors the diagonal block, both sides solve their
//! part of the sub-column, and A sends B the diagonal block and its sub-column
//! blocks so B can update its part of the trailing matrix. When the border moves
//! down, the block rows that cross it are copied back from B to A. The last
//! border is always `N`, so the whole factor ends up on A.

use std::time::{Duration, Instant};

use crate::config::{ExecMode, SolverConfig};
use crate::error::{Result, SolverError};
use crate::executor::{ExecutorId, ExecutorStats, Output, Region, Runtime, TaskSet};
use crate::kernels::{gemm_update, potf_block, syrk_update, trsm_block};
use crate::ledger::{TransferKind, TransferLedger};
use crate::matrix::{tri_offset, BlockVector, BlockedSPDMatrix};
use crate::partition::CholeskyPlan;

#[derive(Clone, Debug)]
pub struct CholeskyStats {
    pub plan: CholeskyPlan,
    pub mode: ExecMode,
    /// Step-3 block updates run on B.
    pub step3_on_b: usize,
    pub step3_total: usize,
    pub border_shifts: usize,
    /// Whole factorization, including the initial and final transfers.
    pub wall_time: Duration,
    pub setup_transfer_time: Duration,
    pub ledger: TransferLedger,
    pub observed_bytes: u64,
    pub executor_a: ExecutorStats,
    pub executor_b: ExecutorStats,
}

impl CholeskyStats {
    pub fn compute_time(&self) -> Duration {
        self.wall_time.saturating_sub(self.setup_transfer_time)
    }
}

#[derive(Clone, Debug)]
pub struct SolveStats {
    pub factor: CholeskyStats,
    pub decomposition_time: Duration,
    /// Forward plus back substitution.
    pub solve_time: Duration,
    /// `‖rhs − A·x‖₂` on the logical system.
    pub true_residual: f64,
}

/// Which executor owns block row `i` while column `j` is processed.
fn owner(i: usize, border: usize, mode: ExecMode) -> ExecutorId {
    match mode {
        ExecMode::Homogeneous(e) => e,
        ExecMode::Heterogeneous if i < border => ExecutorId::A,
        ExecMode::Heterogeneous => ExecutorId::B,
    }
}

/// Factors `a` and returns `L` in the same storage, with the upper halves of the
/// diagonal blocks left stale.
pub fn factorize(a: &BlockedSPDMatrix, cfg: &SolverConfig) -> Result<(BlockedSPDMatrix, CholeskyStats)> {
    cfg.validate()?;
    if a.block_size() != cfg.block_size {
        return Err(SolverError::Dimension(format!(
            "matrix block size {} differs from configured {}",
            a.block_size(),
            cfg.block_size
        )));
    }
    let nb = a.block_rows();
    let b = a.block_size();
    let plan = CholeskyPlan::new(cfg.fraction, nb)?;
    let hetero = cfg.mode == ExecMode::Heterogeneous;
    let host = match cfg.mode {
        ExecMode::Heterogeneous => ExecutorId::A,
        ExecMode::Homogeneous(e) => e,
    };
    let borders: Vec<usize> = if hetero { plan.borders.clone() } else { vec![nb; nb] };

    let mut rt = Runtime::new(cfg, host)?;
    rt.install_matrix(ExecutorId::A, a.clone());
    let start = Instant::now();
    if hetero || host == ExecutorId::B {
        rt.transfer(Region::Matrix, ExecutorId::A, ExecutorId::B, TransferKind::InitialMatrix)?;
    }
    let mut setup_time = rt.transfer_time();

    let mut step3_on_b = 0;
    let mut step3_total = 0;
    let mut border_shifts = 0;
    for j in 0..nb {
        rt.set_step(j);
        let beta = borders[j];
        if hetero {
            if let Some(shift) = plan.shift_before(j) {
                for i in shift.rows() {
                    rt.transfer(Region::BlockRow { i }, ExecutorId::B, ExecutorId::A, TransferKind::BlockRow)?;
                }
                border_shifts += 1;
            }
        }

        // step 1
        let diag = owner(j, beta, cfg.mode);
        let set = TaskSet::new("potf").reads(Region::Block { i: j, j }).item(move |space| {
            let mut d = space.block(j, j)?.to_vec();
            potf_block(&mut d, b, j)?;
            Ok(Output::Block { i: j, j, data: d })
        });
        rt.submit(diag, set)?;
        rt.barrier()?;
        if hetero {
            rt.transfer(Region::Block { i: j, j }, ExecutorId::A, ExecutorId::B, TransferKind::Block)?;
        }

        // step 2
        for e in [ExecutorId::A, ExecutorId::B] {
            let rows: Vec<usize> = (j + 1..nb).filter(|&i| owner(i, beta, cfg.mode) == e).collect();
            if rows.is_empty() {
                continue;
            }
            let mut set = TaskSet::new("trsm").reads(Region::Block { i: j, j });
            for i in rows {
                set = set.reads(Region::Block { i, j });
                set.push(move |space| {
                    let l = space.block(j, j)?;
                    let mut x = space.block(i, j)?.to_vec();
                    trsm_block(&mut x, l, b)?;
                    Ok(Output::Block { i, j, data: x })
                });
            }
            rt.submit(e, set)?;
        }
        rt.barrier()?;
        if hetero {
            for i in j + 1..beta {
                rt.transfer(Region::Block { i, j }, ExecutorId::A, ExecutorId::B, TransferKind::Block)?;
            }
        }

        // step 3, one item per target block row
        for e in [ExecutorId::A, ExecutorId::B] {
            let rows: Vec<usize> = (j + 1..nb).filter(|&i| owner(i, beta, cfg.mode) == e).collect();
            if rows.is_empty() {
                continue;
            }
            let mut set = TaskSet::new("update");
            for i in rows {
                let count = i - j;
                step3_total += count;
                if e == ExecutorId::B {
                    step3_on_b += count;
                }
                set.push(move |space| {
                    let lij = space.block(i, j)?;
                    let mut out = Vec::with_capacity(count);
                    for k in j + 1..=i {
                        let mut c = space.block(i, k)?.to_vec();
                        if k == i {
                            syrk_update(&mut c, lij, b)?;
                        } else {
                            gemm_update(&mut c, lij, space.block(k, j)?, b)?;
                        }
                        out.push(Output::Block { i, j: k, data: c });
                    }
                    Ok(Output::Multi(out))
                });
            }
            rt.submit(e, set)?;
        }
        rt.barrier()?;
    }

    if !hetero && host == ExecutorId::B {
        let t = Instant::now();
        rt.transfer(Region::Matrix, ExecutorId::B, ExecutorId::A, TransferKind::Result)?;
        setup_time += t.elapsed();
    }
    rt.finish();
    let wall_time = start.elapsed();
    let l = rt.space(ExecutorId::A).matrix(&Region::Matrix)?.clone();
    let stats = CholeskyStats {
        plan,
        mode: cfg.mode,
        step3_on_b,
        step3_total,
        border_shifts,
        wall_time,
        setup_transfer_time: setup_time,
        observed_bytes: rt.observed_bytes(),
        executor_a: rt.stats(ExecutorId::A),
        executor_b: rt.stats(ExecutorId::B),
        ledger: rt.into_ledger(),
    };
    Ok((l, stats))
}

fn check_rhs(l: &BlockedSPDMatrix, v: &BlockVector) -> Result<()> {
    if v.n() != l.n() || v.block_size() != l.block_size() {
        return Err(SolverError::Dimension(format!(
            "vector (n={}, b={}) does not match factor (n={}, b={})",
            v.n(),
            v.block_size(),
            l.n(),
            l.block_size()
        )));
    }
    Ok(())
}

fn check_diagonal(l: &BlockedSPDMatrix) -> Result<()> {
    let b = l.block_size();
    for i in 0..l.block_rows() {
        let d = l.block_at(tri_offset(i, i));
        for p in 0..b {
            let v = d[p * b + p];
            if v == 0.0 || !v.is_finite() {
                return Err(SolverError::SingularBlock { index: i * b + p });
            }
        }
    }
    Ok(())
}

/// Solves `L·y = rhs` block row by block row.
pub fn forward_substitute(l: &BlockedSPDMatrix, rhs: &BlockVector) -> Result<BlockVector> {
    check_rhs(l, rhs)?;
    check_diagonal(l)?;
    let b = l.block_size();
    let mut y = rhs.clone();
    let ys = y.padded_mut();
    for i in 0..l.block_rows() {
        let mut t = vec![0.0; b];
        for (p, tp) in t.iter_mut().enumerate() {
            let mut acc = 0.0;
            for jb in 0..i {
                let lij = l.block_at(tri_offset(i, jb));
                let yj = &ys[jb * b..(jb + 1) * b];
                for q in 0..b {
                    acc += lij[p * b + q] * yj[q];
                }
            }
            *tp = ys[i * b + p] - acc;
        }
        let d = l.block_at(tri_offset(i, i));
        for p in 0..b {
            let mut acc = 0.0;
            for q in 0..p {
                acc += d[p * b + q] * ys[i * b + q];
            }
            ys[i * b + p] = (t[p] - acc) / d[p * b + p];
        }
    }
    Ok(y)
}

/// Solves `Lᵀ·x = y`, reading `L` transposed.
pub fn back_substitute(l: &BlockedSPDMatrix, y: &BlockVector) -> Result<BlockVector> {
    check_rhs(l, y)?;
    check_diagonal(l)?;
    let b = l.block_size();
    let nb = l.block_rows();
    let mut x = y.clone();
    let xs = x.padded_mut();
    for i in (0..nb).rev() {
        let mut t = vec![0.0; b];
        for (p, tp) in t.iter_mut().enumerate() {
            let mut acc = 0.0;
            for jb in i + 1..nb {
                let lji = l.block_at(tri_offset(jb, i));
                let xj = &xs[jb * b..(jb + 1) * b];
                for q in 0..b {
                    acc += lji[q * b + p] * xj[q];
                }
            }
            *tp = xs[i * b + p] - acc;
        }
        let d = l.block_at(tri_offset(i, i));
        for p in (0..b).rev() {
            let mut acc = 0.0;
            for q in p + 1..b {
                acc += d[q * b + p] * xs[i * b + q];
            }
            xs[i * b + p] = (t[p] - acc) / d[p * b + p];
        }
    }
    Ok(x)
}

/// Factorization followed by both substitutions on the host.
pub fn solve_spd(a: &BlockedSPDMatrix, rhs: &BlockVector, cfg: &SolverConfig) -> Result<(BlockVector, SolveStats)> {
    check_rhs(a, rhs)?;
    let t0 = Instant::now();
    let (l, factor) = factorize(a, cfg)?;
    let decomposition_time = t0.elapsed();
    let t1 = Instant::now();
    let y = forward_substitute(&l, rhs)?;
    let x = back_substitute(&l, &y)?;
    let solve_time = t1.elapsed();
    let true_residual = crate::cg::residual_norm(a, &x, rhs)?;
    Ok((
        x,
        SolveStats {
            factor,
            decomposition_time,
            solve_time,
            true_residual,
        },
    ))
}

/// `‖A − L·Lᵀ‖_F / ‖A‖_F` over the logical `n×n` system.
pub fn reconstruction_error(a: &BlockedSPDMatrix, l: &BlockedSPDMatrix) -> f64 {
    let n = a.n();
    let ld = l.lower_dense();
    let ad = a.to_dense();
    let mut num = 0.0;
    let mut den = 0.0;
    for p in 0..n {
        for q in 0..n {
            let m = p.min(q) + 1;
            let mut s = 0.0;
            for k in 0..m {
                s += ld[p * n + k] * ld[q * n + k];
            }
            let d = ad[p * n + q] - s;
            num += d * d;
            den += ad[p * n + q] * ad[p * n + q];
        }
    }
    (num / den).sqrt()
}
