//! Conjugate gradients with the block rows split between the two executors.
//!
//! Executor B owns block rows `[0, r)` and executor A owns `[r, N)` of every
//! vector. Each executor computes its rows of `t = A·s` from a full local
//! copy of `s`, and its rows of the vector updates. Scalar products are formed
//! as two partial sums: B folds its rows into one prefix value, which is copied
//! to the host (A), and A folds its per-block partials onto it. After `s` is
//! updated the two halves are exchanged so both executors hold all of `s` for
//! the next product. Every `recompute_interval`-th iteration the residual is
//! recomputed as `rhs − A·x`, which needs one more exchange (of `x`).

use std::ops::Range;
use std::time::{Duration, Instant};

use crate::config::{ExecMode, SolverConfig};
use crate::error::{Result, SolverError};
use crate::executor::{ExecutorId, ExecutorStats, Output, Region, Runtime, TaskSet, Token, VecId};
use crate::kernels::{axpy_slice, dot_block, fold_partials, symv_block_row, symv_range, xpay_slice};
use crate::ledger::{TransferKind, TransferLedger};
use crate::matrix::{BlockVector, BlockedSPDMatrix};
use crate::partition::partition_for_fraction;

/// Scalars of one CG iteration, recorded once `β = u / v` is known.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CgIterate {
    pub u: f64,
    pub alpha: f64,
    pub beta: f64,
}

#[derive(Clone, Debug)]
pub struct CgStats {
    pub iterations: usize,
    pub recomputations: usize,
    pub converged: bool,
    pub u0: f64,
    pub u: f64,
    /// `‖rhs‖₂` (the initial residual for `x₀ = 0`).
    pub r0_norm: f64,
    /// `‖rhs − A·x‖₂` of the returned iterate.
    pub true_residual: f64,
    pub split_row: usize,
    pub trace: Vec<CgIterate>,
    /// Whole solve, including the initial and final transfers.
    pub wall_time: Duration,
    /// Time spent in the initial and final transfers.
    pub setup_transfer_time: Duration,
    pub ledger: TransferLedger,
    pub observed_bytes: u64,
    pub executor_a: ExecutorStats,
    pub executor_b: ExecutorStats,
}

impl CgStats {
    pub fn compute_time(&self) -> Duration {
        self.wall_time.saturating_sub(self.setup_transfer_time)
    }
}

#[derive(Clone, Debug)]
pub struct CgOutcome {
    pub x: BlockVector,
    pub stats: CgStats,
}

impl CgOutcome {
    /// Turns an iteration-capped run into [`SolverError::NotConverged`].
    pub fn into_result(self, max_iters: usize) -> Result<(BlockVector, CgStats)> {
        if self.stats.converged {
            Ok((self.x, self.stats))
        } else {
            Err(SolverError::NotConverged { max_iters })
        }
    }
}

/// Rows owned by each executor for this run.
struct Layout {
    rows: [Range<usize>; 2],
    hetero: bool,
    blocks: usize,
}

impl Layout {
    fn rows(&self, e: ExecutorId) -> Range<usize> {
        self.rows[e as usize].clone()
    }

    fn active(&self) -> impl Iterator<Item = ExecutorId> + '_ {
        [ExecutorId::B, ExecutorId::A]
            .into_iter()
            .filter(|&e| !self.rows(e).is_empty())
    }
}

/// Splits `rows` into at most `parts` contiguous chunks.
fn chunks(rows: Range<usize>, parts: usize) -> Vec<Range<usize>> {
    let len = rows.len();
    if len == 0 {
        return Vec::new();
    }
    let parts = parts.clamp(1, len);
    let base = len / parts;
    let extra = len % parts;
    let mut out = Vec::with_capacity(parts);
    let mut lo = rows.start;
    for k in 0..parts {
        let hi = lo + base + usize::from(k < extra);
        out.push(lo..hi);
        lo = hi;
    }
    out
}

struct Cg<'a> {
    rt: Runtime,
    layout: Layout,
    cfg: &'a SolverConfig,
    b: usize,
}

impl Cg<'_> {
    fn row_chunks(&self, e: ExecutorId) -> Vec<Range<usize>> {
        chunks(self.layout.rows(e), 4 * self.cfg.workers(e))
    }

    /// `t = A·s` on the owner rows of each executor.
    fn submit_matvec(&mut self, input: VecId, output: VecId) -> Result<()> {
        let nb = self.layout.blocks;
        let b = self.b;
        for e in self.layout.active().collect::<Vec<_>>() {
            let mut set = TaskSet::new("symv")
                .reads(Region::Matrix)
                .reads(Region::Rows { vec: input, rows: 0..nb });
            for i in self.layout.rows(e) {
                set.push(move |space| {
                    let a = space.matrix(&Region::Matrix)?;
                    let x = space.vector(input, 0..nb)?;
                    let mut out = vec![0.0; b];
                    symv_block_row(a, x.padded(), i, &mut out);
                    Ok(Output::Rows { vec: output, start_row: i, data: out })
                });
            }
            self.rt.submit(e, set)?;
        }
        Ok(())
    }

    /// Queues the partial scalar products of `u·v`; resolve after the barrier with [`Cg::combine`].
    fn submit_dot(&mut self, u: VecId, v: VecId) -> Result<[Option<Token>; 2]> {
        let mut tokens = [None, None];
        for e in self.layout.active().collect::<Vec<_>>() {
            let mut set = TaskSet::new("dot");
            for i in self.layout.rows(e) {
                set.push(move |space| {
                    let uu = space.vector(u, i..i + 1)?.block_row(i);
                    let vv = space.vector(v, i..i + 1)?.block_row(i);
                    Ok(Output::Scalar(dot_block(uu, vv)))
                });
            }
            if e == ExecutorId::B || !self.layout.hetero {
                set = set.reduce_sum();
            }
            tokens[e as usize] = Some(self.rt.submit(e, set)?);
        }
        Ok(tokens)
    }

    /// B's prefix value (copied to the host) with A's block partials folded on in ascending order.
    fn combine(&mut self, tokens: [Option<Token>; 2]) -> Result<f64> {
        if !self.layout.hetero {
            let tok = tokens.into_iter().flatten().next().expect("one active executor");
            return self.rt.fetch_scalar(tok);
        }
        let prefix = match tokens[ExecutorId::B as usize] {
            Some(t) => self.rt.fetch_scalar(t)?,
            None => {
                // empty range on B: its partial is 0.0 and is still copied back
                self.rt.transfer_empty_partial(ExecutorId::B);
                0.0
            }
        };
        let partials = match tokens[ExecutorId::A as usize] {
            Some(t) => self.rt.take_result(t)?.scalars,
            None => Vec::new(),
        };
        Ok(fold_partials(prefix, &partials))
    }

    fn submit_rows<F>(&mut self, label: &'static str, reads: &[VecId], f: F) -> Result<()>
    where
        F: Fn(&crate::executor::MemorySpace, Range<usize>) -> Result<Vec<Output>> + Send + Sync + Clone + 'static,
    {
        for e in self.layout.active().collect::<Vec<_>>() {
            let mut set = TaskSet::new(label);
            for &v in reads {
                set = set.reads(Region::Rows { vec: v, rows: self.layout.rows(e) });
            }
            for rows in self.row_chunks(e) {
                let f = f.clone();
                set.push(move |space| Ok(Output::Multi(f(space, rows)?)));
            }
            self.rt.submit(e, set)?;
        }
        Ok(())
    }

    fn exchange(&mut self, vec: VecId) -> Result<()> {
        if self.layout.hetero {
            self.rt
                .exchange_rows(vec, self.layout.rows(ExecutorId::B), self.layout.rows(ExecutorId::A))?;
        }
        Ok(())
    }
}

fn rows_out(vec: VecId, rows: &Range<usize>, b: usize, data: Vec<f64>) -> Output {
    debug_assert_eq!(data.len(), rows.len() * b);
    Output::Rows { vec, start_row: rows.start, data }
}

fn span(rows: &Range<usize>, b: usize) -> Range<usize> {
    rows.start * b..rows.end * b
}

/// Solves `A·x = rhs` by CG from `x₀ = 0`.
///
/// Reaching `max_iters` is not an error here: the last iterate comes back with
/// `stats.converged == false`. Use [`CgOutcome::into_result`] for the strict form.
pub fn solve_cg(a: &BlockedSPDMatrix, rhs: &BlockVector, cfg: &SolverConfig) -> Result<CgOutcome> {
    cfg.validate()?;
    if rhs.n() != a.n() || rhs.block_size() != a.block_size() {
        return Err(SolverError::Dimension(format!(
            "rhs (n={}, b={}) does not match matrix (n={}, b={})",
            rhs.n(),
            rhs.block_size(),
            a.n(),
            a.block_size()
        )));
    }
    let nb = a.block_rows();
    let b = a.block_size();
    let n = a.n();
    let (layout, host) = match cfg.mode {
        ExecMode::Heterogeneous => {
            let p = partition_for_fraction(cfg.fraction, nb)?;
            (
                Layout { rows: [p.a_rows(), p.b_rows()], hetero: true, blocks: nb },
                ExecutorId::A,
            )
        }
        ExecMode::Homogeneous(e) => {
            let mut rows = [0..0, 0..0];
            rows[e as usize] = 0..nb;
            (Layout { rows, hetero: false, blocks: nb }, e)
        }
    };
    let split_row = layout.rows(ExecutorId::B).end;

    let mut rt = Runtime::new(cfg, host)?;
    rt.install_matrix(ExecutorId::A, a.clone());
    rt.install_vector(ExecutorId::A, VecId::Rhs, rhs.clone());

    let start = Instant::now();
    // B needs the matrix and the right-hand side before it can take part
    let uses_b = layout.hetero || host == ExecutorId::B;
    if uses_b {
        rt.transfer(Region::Matrix, ExecutorId::A, ExecutorId::B, TransferKind::InitialMatrix)?;
        rt.transfer(Region::Rows { vec: VecId::Rhs, rows: 0..nb }, ExecutorId::A, ExecutorId::B, TransferKind::InitialMatrix)?;
    }
    let setup_time = rt.transfer_time();
    for e in [ExecutorId::A, ExecutorId::B] {
        for v in [VecId::X, VecId::R, VecId::S, VecId::T] {
            rt.allocate_vector(e, v, n, b);
        }
    }
    let mut cg = Cg { rt, layout, cfg, b };

    // x = 0, r = rhs on owned rows; s = rhs everywhere (both sides hold all of rhs)
    for e in [ExecutorId::A, ExecutorId::B] {
        let own = cg.layout.rows(e);
        if own.is_empty() {
            continue;
        }
        let mut set = TaskSet::new("init").reads(Region::Rows { vec: VecId::Rhs, rows: 0..nb });
        set.push(move |space| {
            let rhs = space.vector(VecId::Rhs, 0..nb)?;
            Ok(Output::Rows { vec: VecId::S, start_row: 0, data: rhs.padded().to_vec() })
        });
        set.push(move |space| {
            let rhs = space.vector(VecId::Rhs, own.clone())?;
            let r = rhs.rows(own.clone()).to_vec();
            let x = vec![0.0; r.len()];
            Ok(Output::Multi(vec![
                Output::Rows { vec: VecId::R, start_row: own.start, data: r },
                Output::Rows { vec: VecId::X, start_row: own.start, data: x },
            ]))
        });
        cg.rt.submit(e, set)?;
    }
    cg.rt.barrier()?;

    // u0 on the host, over the full right-hand side
    let host_rhs = cg.rt.space(host).vector(VecId::Rhs, 0..nb)?;
    let partials: Vec<f64> = (0..nb).map(|i| dot_block(host_rhs.block_row(i), host_rhs.block_row(i))).collect();
    let u0 = fold_partials(0.0, &partials);
    let r0_norm = rhs.norm2();

    let eps2 = cfg.eps * cfg.eps;
    let mut u = u0;
    let mut iter = 0;
    let mut recomputations = 0;
    let mut trace = Vec::new();
    while u > eps2 * u0 && iter < cfg.max_iters {
        iter += 1;
        cg.rt.set_step(iter);

        // t = A·s
        cg.submit_matvec(VecId::S, VecId::T)?;
        cg.rt.barrier()?;

        // α = u / (s·t)
        let tok = cg.submit_dot(VecId::S, VecId::T)?;
        cg.rt.barrier()?;
        let st = cg.combine(tok)?;
        let alpha = u / st;
        if !alpha.is_finite() {
            return Err(SolverError::Numerical(format!("alpha = {alpha} at iteration {iter}")));
        }

        // x += α·s; r -= α·t, or r = rhs − A·x on recompute iterations
        let recompute = cfg.recomputes_at(iter);
        if recompute {
            cg.submit_rows("x_update", &[VecId::X, VecId::S], move |space, rows| {
                let mut x = space.vector(VecId::X, rows.clone())?.padded()[span(&rows, b)].to_vec();
                let s = &space.vector(VecId::S, rows.clone())?.padded()[span(&rows, b)];
                axpy_slice(&mut x, s, alpha);
                Ok(vec![rows_out(VecId::X, &rows, b, x)])
            })?;
            cg.rt.barrier()?;
            cg.exchange(VecId::X)?;
            recompute_true_residual(&mut cg)?;
            recomputations += 1;
        } else {
            cg.submit_rows("xr_update", &[VecId::X, VecId::R, VecId::S, VecId::T], move |space, rows| {
                let sp = span(&rows, b);
                let mut x = space.vector(VecId::X, rows.clone())?.padded()[sp.clone()].to_vec();
                let mut r = space.vector(VecId::R, rows.clone())?.padded()[sp.clone()].to_vec();
                let s = &space.vector(VecId::S, rows.clone())?.padded()[sp.clone()];
                let t = &space.vector(VecId::T, rows.clone())?.padded()[sp];
                axpy_slice(&mut x, s, alpha);
                axpy_slice(&mut r, t, -alpha);
                Ok(vec![rows_out(VecId::X, &rows, b, x), rows_out(VecId::R, &rows, b, r)])
            })?;
            cg.rt.barrier()?;
        }

        // u = r·r, β = u / v
        let v = u;
        let tok = cg.submit_dot(VecId::R, VecId::R)?;
        cg.rt.barrier()?;
        u = cg.combine(tok)?;
        let beta = u / v;
        if !u.is_finite() || !beta.is_finite() {
            return Err(SolverError::Numerical(format!("u = {u}, beta = {beta} at iteration {iter}")));
        }

        // s = r + β·s, then exchange s
        cg.submit_rows("s_update", &[VecId::R, VecId::S], move |space, rows| {
            let sp = span(&rows, b);
            let mut s = space.vector(VecId::S, rows.clone())?.padded()[sp.clone()].to_vec();
            let r = &space.vector(VecId::R, rows.clone())?.padded()[sp];
            xpay_slice(&mut s, r, beta);
            Ok(vec![rows_out(VecId::S, &rows, b, s)])
        })?;
        cg.rt.barrier()?;
        cg.exchange(VecId::S)?;

        trace.push(CgIterate { u, alpha, beta });
    }

    // the solution ends up on A
    let t_result = Instant::now();
    if cg.layout.hetero {
        let b_rows = cg.layout.rows(ExecutorId::B);
        if !b_rows.is_empty() {
            cg.rt.transfer(Region::Rows { vec: VecId::X, rows: b_rows }, ExecutorId::B, ExecutorId::A, TransferKind::Result)?;
        }
    } else if host == ExecutorId::B {
        cg.rt.transfer(Region::Rows { vec: VecId::X, rows: 0..nb }, ExecutorId::B, ExecutorId::A, TransferKind::Result)?;
    }
    let result_time = t_result.elapsed();
    cg.rt.finish();
    let wall_time = start.elapsed();

    let x = cg.rt.space(ExecutorId::A).vector(VecId::X, 0..nb)?.clone();
    let true_residual = residual_norm(a, &x, rhs)?;
    let observed_bytes = cg.rt.observed_bytes();
    let executor_a = cg.rt.stats(ExecutorId::A);
    let executor_b = cg.rt.stats(ExecutorId::B);
    Ok(CgOutcome {
        x,
        stats: CgStats {
            iterations: iter,
            recomputations,
            converged: u <= eps2 * u0,
            u0,
            u,
            r0_norm,
            true_residual,
            split_row,
            trace,
            wall_time,
            setup_transfer_time: setup_time + result_time,
            ledger: cg.rt.into_ledger(),
            observed_bytes,
            executor_a,
            executor_b,
        },
    })
}

/// `r = rhs − A·x` on the owned rows of each executor; needs the full `x` on both.
fn recompute_true_residual(cg: &mut Cg<'_>) -> Result<()> {
    cg.submit_matvec(VecId::X, VecId::T)?;
    cg.rt.barrier()?;
    let b = cg.b;
    cg.submit_rows("residual", &[VecId::Rhs, VecId::T], move |space, rows| {
        let sp = span(&rows, b);
        let rhs = &space.vector(VecId::Rhs, rows.clone())?.padded()[sp.clone()];
        let ax = &space.vector(VecId::T, rows.clone())?.padded()[sp];
        let r: Vec<f64> = rhs.iter().zip(ax).map(|(p, q)| p - q).collect();
        Ok(vec![rows_out(VecId::R, &rows, b, r)])
    })?;
    cg.rt.barrier()
}

/// `‖rhs − A·x‖₂` over the logical rows.
pub fn residual_norm(a: &BlockedSPDMatrix, x: &BlockVector, rhs: &BlockVector) -> Result<f64> {
    let ax = symv_range(a, x, 0..a.block_rows())?;
    Ok(rhs
        .values()
        .iter()
        .zip(&ax)
        .map(|(r, y)| (r - y) * (r - y))
        .sum::<f64>()
        .sqrt())
}
