//! Two executors, each a worker pool with its own memory space.
//!
//! Executor A plays the host role and executor B the accelerator role. Data
//! moves between their spaces only through [`Runtime::transfer`] and friends,
//! and every move is appended to the [`TransferLedger`].
//!
//! Residency is tracked per block and per vector block row. A copy is valid
//! when it holds the current value: writing a region on one executor marks the
//! other executor's copy stale, and only a transfer makes it valid again. Task
//! items can reach data only through [`MemorySpace`] accessors, which refuse
//! stale or missing regions with [`SolverError::Residency`].
//!
//! Items of one task set must have disjoint outputs. They run in parallel on
//! the executor's pool and return their outputs, which are written back into
//! the space once the whole set is done.

use std::collections::HashMap;
use std::fmt;
use std::ops::Range;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::mpsc;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::config::SolverConfig;
use crate::error::{Result, SolverError};
use crate::ledger::{Direction, TransferEntry, TransferKind, TransferLedger};
use crate::matrix::{tri_offset, BlockVector, BlockedSPDMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ExecutorId {
    /// Host role.
    A,
    /// Accelerator role.
    B,
}

impl ExecutorId {
    pub fn other(self) -> Self {
        match self {
            ExecutorId::A => ExecutorId::B,
            ExecutorId::B => ExecutorId::A,
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for ExecutorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExecutorId::A => "A",
            ExecutorId::B => "B",
        })
    }
}

fn direction(from: ExecutorId, to: ExecutorId) -> Direction {
    match (from, to) {
        (ExecutorId::A, ExecutorId::B) => Direction::AtoB,
        _ => Direction::BtoA,
    }
}

/// Named vectors a space can hold.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum VecId {
    X,
    R,
    S,
    T,
    Rhs,
}

/// A piece of an object in a memory space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Region {
    /// Matrix block `(i, j)`, `j <= i`.
    Block { i: usize, j: usize },
    /// All stored blocks `(i, 0..=i)` of block row `i`.
    BlockRow { i: usize },
    /// Every stored block.
    Matrix,
    /// Block rows of a vector.
    Rows { vec: VecId, rows: Range<usize> },
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Region::Block { i, j } => write!(f, "block ({i}, {j})"),
            Region::BlockRow { i } => write!(f, "block row {i}"),
            Region::Matrix => f.write_str("matrix"),
            Region::Rows { vec, rows } => write!(f, "{vec:?}[{}..{})", rows.start, rows.end),
        }
    }
}

/// Data resident on one executor.
#[derive(Debug)]
pub struct MemorySpace {
    owner: ExecutorId,
    matrix: Option<BlockedSPDMatrix>,
    block_valid: Vec<bool>,
    vectors: HashMap<VecId, (BlockVector, Vec<bool>)>,
}

impl MemorySpace {
    fn new(owner: ExecutorId) -> Self {
        Self {
            owner,
            matrix: None,
            block_valid: Vec::new(),
            vectors: HashMap::new(),
        }
    }

    pub fn owner(&self) -> ExecutorId {
        self.owner
    }

    fn residency(&self, region: &Region) -> SolverError {
        SolverError::Residency {
            executor: self.owner,
            region: region.clone(),
        }
    }

    fn block_offsets(&self, region: &Region) -> Result<Vec<usize>> {
        let m = self.matrix.as_ref().ok_or_else(|| self.residency(region))?;
        let nb = m.block_rows();
        match *region {
            Region::Block { i, j } => Ok(vec![crate::matrix::block_index(i, j, nb)?]),
            Region::BlockRow { i } => {
                if i >= nb {
                    return Err(SolverError::BlockOutOfRange { row: i, col: 0, blocks: nb });
                }
                Ok((0..=i).map(|j| tri_offset(i, j)).collect())
            }
            Region::Matrix => Ok((0..m.num_blocks()).collect()),
            Region::Rows { .. } => unreachable!("not a matrix region"),
        }
    }

    /// Whether every part of `region` is present and current here.
    pub fn is_resident(&self, region: &Region) -> bool {
        self.check(region).is_ok()
    }

    fn check(&self, region: &Region) -> Result<()> {
        match region {
            Region::Rows { vec, rows } => {
                let (v, valid) = self.vectors.get(vec).ok_or_else(|| self.residency(region))?;
                if rows.start > rows.end || rows.end > v.block_rows() {
                    return Err(SolverError::RangeOutOfBounds {
                        lo: rows.start,
                        hi: rows.end,
                        blocks: v.block_rows(),
                    });
                }
                if valid[rows.clone()].iter().all(|&ok| ok) {
                    Ok(())
                } else {
                    Err(self.residency(region))
                }
            }
            _ => {
                let offs = self.block_offsets(region)?;
                if offs.iter().all(|&k| self.block_valid[k]) {
                    Ok(())
                } else {
                    Err(self.residency(region))
                }
            }
        }
    }

    /// The matrix, after checking that `region` of it is resident.
    pub fn matrix(&self, region: &Region) -> Result<&BlockedSPDMatrix> {
        self.check(region)?;
        Ok(self.matrix.as_ref().expect("checked"))
    }

    pub fn block(&self, i: usize, j: usize) -> Result<&[f64]> {
        let m = self.matrix(&Region::Block { i, j })?;
        Ok(m.block_at(tri_offset(i, j)))
    }

    /// The vector, after checking that block rows `rows` of it are resident.
    pub fn vector(&self, vec: VecId, rows: Range<usize>) -> Result<&BlockVector> {
        self.check(&Region::Rows { vec, rows })?;
        Ok(&self.vectors[&vec].0)
    }

    /// Direct access for the orchestrator, bypassing residency (e.g. to read final results).
    pub fn matrix_unchecked(&self) -> Option<&BlockedSPDMatrix> {
        self.matrix.as_ref()
    }

    pub fn vector_unchecked(&self, vec: VecId) -> Option<&BlockVector> {
        self.vectors.get(&vec).map(|(v, _)| v)
    }

    fn apply(&mut self, out: Output, written: &mut Vec<Region>) {
        match out {
            Output::None | Output::Scalar(_) => {}
            Output::Multi(outs) => {
                for o in outs {
                    self.apply(o, written);
                }
            }
            Output::Rows { vec, start_row, data } => {
                let (v, valid) = self.vectors.get_mut(&vec).expect("output vector allocated");
                let b = v.block_size();
                let rows = start_row..start_row + data.len() / b;
                v.padded_mut()[rows.start * b..rows.end * b].copy_from_slice(&data);
                valid[rows.clone()].iter_mut().for_each(|ok| *ok = true);
                written.push(Region::Rows { vec, rows });
            }
            Output::Block { i, j, data } => {
                let m = self.matrix.as_mut().expect("matrix allocated");
                let k = tri_offset(i, j);
                m.block_at_mut(k).copy_from_slice(&data);
                self.block_valid[k] = true;
                written.push(Region::Block { i, j });
            }
        }
    }

    fn invalidate(&mut self, region: &Region) {
        self.set_valid(region, false);
    }

    fn set_valid(&mut self, region: &Region, state: bool) {
        match region {
            Region::Rows { vec, rows } => {
                if let Some((_, valid)) = self.vectors.get_mut(vec) {
                    valid[rows.clone()].iter_mut().for_each(|ok| *ok = state);
                }
            }
            _ => {
                if let Ok(offs) = self.block_offsets(region) {
                    for k in offs {
                        self.block_valid[k] = state;
                    }
                }
            }
        }
    }

    fn ensure_matrix_like(&mut self, src: &BlockedSPDMatrix) {
        let same = self
            .matrix
            .as_ref()
            .is_some_and(|m| m.n() == src.n() && m.block_size() == src.block_size());
        if !same {
            let zeros = vec![0.0; src.raw().len()];
            self.matrix = Some(BlockedSPDMatrix::from_raw_blocks(src.n(), src.block_size(), zeros).expect("same shape"));
            self.block_valid = vec![false; src.num_blocks()];
        }
    }

    fn ensure_vector_like(&mut self, vec: VecId, n: usize, b: usize) {
        let same = self
            .vectors
            .get(&vec)
            .is_some_and(|(v, _)| v.n() == n && v.block_size() == b);
        if !same {
            let v = BlockVector::zeros(n, b).expect("positive dims");
            let rows = v.block_rows();
            self.vectors.insert(vec, (v, vec![false; rows]));
        }
    }
}

/// What an item produces; written into the executor's own space after the set completes.
#[derive(Debug)]
pub enum Output {
    None,
    Scalar(f64),
    /// Padded values for consecutive block rows starting at `start_row`.
    Rows { vec: VecId, start_row: usize, data: Vec<f64> },
    Block { i: usize, j: usize, data: Vec<f64> },
    /// Several outputs of one item, applied in order.
    Multi(Vec<Output>),
}

type Item = Box<dyn FnOnce(&MemorySpace) -> Result<Output> + Send>;

/// A batch of independent items for one executor.
pub struct TaskSet {
    pub label: &'static str,
    /// Regions that must be resident when the set is submitted.
    pub reads: Vec<Region>,
    items: Vec<Item>,
    reduce: bool,
}

impl TaskSet {
    pub fn new(label: &'static str) -> Self {
        Self {
            label,
            reads: Vec::new(),
            items: Vec::new(),
            reduce: false,
        }
    }

    pub fn reads(mut self, region: Region) -> Self {
        self.reads.push(region);
        self
    }

    pub fn item(mut self, f: impl FnOnce(&MemorySpace) -> Result<Output> + Send + 'static) -> Self {
        self.items.push(Box::new(f));
        self
    }

    pub fn push(&mut self, f: impl FnOnce(&MemorySpace) -> Result<Output> + Send + 'static) {
        self.items.push(Box::new(f));
    }

    /// Fold the items' scalar outputs, in item order starting from `0.0`, into one scalar on the device.
    pub fn reduce_sum(mut self) -> Self {
        self.reduce = true;
        self
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Token {
    pub executor: ExecutorId,
    seq: u64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TaskResult {
    /// Scalar outputs in item order.
    pub scalars: Vec<f64>,
    /// The folded scalar when the set asked for [`TaskSet::reduce_sum`].
    pub sum: Option<f64>,
}

/// Counters per executor.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ExecutorStats {
    pub task_sets: usize,
    pub items: usize,
    pub cpu_time: Duration,
    pub throttle_sleep: Duration,
}

struct Worker {
    slowdown: f64,
    workers: usize,
    debt: f64,
    stats: ExecutorStats,
}

/// Debt below this is carried over rather than slept off.
const MIN_SLEEP_SECS: f64 = 0.0005;

impl Worker {
    fn run_sets(&mut self, space: &mut MemorySpace, sets: Vec<(Token, TaskSet)>) -> Vec<(Token, Result<TaskResult>, Vec<Region>)> {
        let mut results = Vec::with_capacity(sets.len());
        for (token, set) in sets {
            let start = Instant::now();
            let cpu_nanos = AtomicU64::new(0);
            let measure = self.slowdown > 1.0;
            let n_items = set.items.len();
            let shared: &MemorySpace = space;
            let outputs: Vec<Result<Output>> = set
                .items
                .into_par_iter()
                .map(|item| {
                    let c0 = if measure { thread_cpu_time() } else { Duration::ZERO };
                    let out = item(shared);
                    if measure {
                        let spent = thread_cpu_time().saturating_sub(c0);
                        cpu_nanos.fetch_add(spent.as_nanos() as u64, Ordering::Relaxed);
                    }
                    out
                })
                .collect();
            let mut written = Vec::new();
            let mut scalars = Vec::new();
            let mut err = None;
            for out in outputs {
                match out {
                    Ok(Output::Scalar(v)) => scalars.push(v),
                    Ok(o) => {
                        if err.is_none() {
                            space.apply(o, &mut written);
                        }
                    }
                    Err(e) => {
                        err.get_or_insert(e);
                    }
                }
            }
            let cpu = Duration::from_nanos(cpu_nanos.into_inner());
            self.stats.task_sets += 1;
            self.stats.items += n_items;
            self.stats.cpu_time += cpu;
            if measure {
                let device = self.slowdown * cpu.as_secs_f64() / self.workers as f64;
                self.debt += device - start.elapsed().as_secs_f64();
                self.pay_debt(MIN_SLEEP_SECS);
            }
            let res = match err {
                Some(e) => Err(e),
                None => {
                    let sum = set.reduce.then(|| scalars.iter().fold(0.0, |acc, v| acc + v));
                    Ok(TaskResult { scalars, sum })
                }
            };
            results.push((token, res, written));
        }
        results
    }

    fn pay_debt(&mut self, threshold: f64) {
        if self.debt > threshold {
            let t0 = Instant::now();
            std::thread::sleep(Duration::from_secs_f64(self.debt));
            let slept = t0.elapsed();
            self.stats.throttle_sleep += slept;
            self.debt -= slept.as_secs_f64();
        }
    }
}

#[cfg(unix)]
fn thread_cpu_time() -> Duration {
    let mut ts = libc::timespec { tv_sec: 0, tv_nsec: 0 };
    // SAFETY: valid clock id and a live out-pointer.
    let rc = unsafe { libc::clock_gettime(libc::CLOCK_THREAD_CPUTIME_ID, &mut ts) };
    if rc != 0 {
        return Duration::ZERO;
    }
    Duration::new(ts.tv_sec as u64, ts.tv_nsec as u32)
}

#[cfg(not(unix))]
fn thread_cpu_time() -> Duration {
    // wall clock since first use; overestimates under contention
    use std::sync::OnceLock;
    static T0: OnceLock<Instant> = OnceLock::new();
    T0.get_or_init(Instant::now).elapsed()
}

struct Executor {
    pool: rayon::ThreadPool,
    worker: Option<Worker>,
    space: Option<MemorySpace>,
}

/// The orchestrator's view of both executors, the ledger, and pending work.
pub struct Runtime {
    executors: [Executor; 2],
    pending: [Vec<(Token, TaskSet)>; 2],
    results: HashMap<Token, TaskResult>,
    ledger: TransferLedger,
    observed_bytes: u64,
    host: ExecutorId,
    step: usize,
    seq: u64,
    transfer_time: Duration,
}

impl Runtime {
    /// Both executors from the worker counts and slowdowns in `cfg`.
    ///
    /// `host` is the executor whose memory holds the orchestrator's scalars; reading a
    /// scalar produced there costs nothing, reading one from the other side is a transfer.
    pub fn new(cfg: &SolverConfig, host: ExecutorId) -> Result<Self> {
        cfg.validate()?;
        let make = |id: ExecutorId| -> Result<Executor> {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(cfg.workers(id))
                .thread_name(move |i| format!("exec-{id}-{i}"))
                .build()
                .map_err(|e| SolverError::Config(format!("cannot start executor {id}: {e}")))?;
            Ok(Executor {
                pool,
                worker: Some(Worker {
                    slowdown: cfg.slowdown(id),
                    workers: cfg.workers(id),
                    debt: 0.0,
                    stats: ExecutorStats::default(),
                }),
                space: Some(MemorySpace::new(id)),
            })
        };
        Ok(Self {
            executors: [make(ExecutorId::A)?, make(ExecutorId::B)?],
            pending: [Vec::new(), Vec::new()],
            results: HashMap::new(),
            ledger: TransferLedger::new(),
            observed_bytes: 0,
            host,
            step: 0,
            seq: 0,
            transfer_time: Duration::ZERO,
        })
    }

    pub fn host(&self) -> ExecutorId {
        self.host
    }

    pub fn ledger(&self) -> &TransferLedger {
        &self.ledger
    }

    pub fn into_ledger(self) -> TransferLedger {
        self.ledger
    }

    /// Bytes actually copied between spaces, counted inside the copy routines.
    pub fn observed_bytes(&self) -> u64 {
        self.observed_bytes
    }

    /// Wall time spent copying data between spaces.
    pub fn transfer_time(&self) -> Duration {
        self.transfer_time
    }

    pub fn set_step(&mut self, step: usize) {
        self.step = step;
    }

    pub fn stats(&self, e: ExecutorId) -> ExecutorStats {
        self.executors[e.index()].worker.as_ref().expect("idle").stats
    }

    pub fn space(&self, e: ExecutorId) -> &MemorySpace {
        self.executors[e.index()].space.as_ref().expect("space is home between barriers")
    }

    fn space_mut(&mut self, e: ExecutorId) -> &mut MemorySpace {
        self.executors[e.index()].space.as_mut().expect("space is home between barriers")
    }

    /// Places input data on an executor as fully resident (no transfer is logged).
    pub fn install_matrix(&mut self, e: ExecutorId, m: BlockedSPDMatrix) {
        let s = self.space_mut(e);
        s.block_valid = vec![true; m.num_blocks()];
        s.matrix = Some(m);
    }

    pub fn install_vector(&mut self, e: ExecutorId, vec: VecId, v: BlockVector) {
        let rows = v.block_rows();
        self.space_mut(e).vectors.insert(vec, (v, vec![true; rows]));
    }

    /// Allocates a zero vector on `e` with no resident rows; items fill it through their outputs.
    pub fn allocate_vector(&mut self, e: ExecutorId, vec: VecId, n: usize, b: usize) {
        self.space_mut(e).ensure_vector_like(vec, n, b);
    }

    /// Queues a task set on `e` after checking its argument regions are resident there.
    pub fn submit(&mut self, e: ExecutorId, set: TaskSet) -> Result<Token> {
        let space = self.space(e);
        for r in &set.reads {
            space.check(r)?;
        }
        self.seq += 1;
        let token = Token { executor: e, seq: self.seq };
        self.pending[e.index()].push((token, set));
        Ok(token)
    }

    /// Runs everything submitted so far on both executors concurrently and waits for both.
    pub fn barrier(&mut self) -> Result<()> {
        let sets_a = std::mem::take(&mut self.pending[0]);
        let sets_b = std::mem::take(&mut self.pending[1]);
        if sets_a.is_empty() && sets_b.is_empty() {
            return Ok(());
        }
        let b_job = if sets_b.is_empty() {
            None
        } else {
            let exec = &mut self.executors[1];
            let mut worker = exec.worker.take().expect("idle");
            let mut space = exec.space.take().expect("home");
            let (tx, rx) = mpsc::channel();
            exec.pool.spawn(move || {
                let res = worker.run_sets(&mut space, sets_b);
                let _ = tx.send((worker, space, res));
            });
            Some(rx)
        };
        let mut results = Vec::new();
        if !sets_a.is_empty() {
            let exec = &mut self.executors[0];
            let worker = exec.worker.as_mut().expect("idle");
            let space = exec.space.as_mut().expect("home");
            results.extend(exec.pool.install(|| worker.run_sets(space, sets_a)));
        }
        if let Some(rx) = b_job {
            let (worker, space, res) = rx.recv().expect("executor B worker panicked");
            self.executors[1].worker = Some(worker);
            self.executors[1].space = Some(space);
            results.extend(res);
        }
        results.sort_by_key(|(t, _, _)| t.seq);
        let mut first_err = None;
        for (token, _, written) in &results {
            let other = token.executor.other();
            for region in written {
                self.space_mut(other).invalidate(region);
            }
        }
        // a region both sides wrote in the same round stays valid on both
        for (token, _, written) in &results {
            for region in written {
                self.space_mut(token.executor).set_valid(region, true);
            }
        }
        for (token, res, _) in results {
            match res {
                Ok(r) => {
                    self.results.insert(token, r);
                }
                Err(e) => {
                    first_err.get_or_insert(e);
                }
            }
        }
        match first_err {
            Some(e) => Err(e),
            None => Ok(()),
        }
    }

    /// Result of a completed task set (consumed).
    pub fn take_result(&mut self, token: Token) -> Result<TaskResult> {
        self.results
            .remove(&token)
            .ok_or_else(|| SolverError::Config(format!("task set {token:?} has not completed")))
    }

    /// The folded scalar of a completed set, brought to the host.
    ///
    /// Scalars produced away from the host cost one 8-byte transfer.
    pub fn fetch_scalar(&mut self, token: Token) -> Result<f64> {
        let r = self.take_result(token)?;
        let v = r.sum.ok_or_else(|| SolverError::Config("task set has no folded scalar".into()))?;
        if token.executor != self.host {
            self.ledger
                .record(TransferKind::Scalar, direction(token.executor, self.host), 8, self.step);
            self.observed_bytes += 8;
        }
        Ok(v)
    }

    /// Logs the copy of a partial sum over an empty row range (the value `0.0`), which the
    /// idle executor returns without running any task set.
    pub fn transfer_empty_partial(&mut self, from: ExecutorId) {
        if from != self.host {
            self.ledger.record(TransferKind::Scalar, direction(from, self.host), 8, self.step);
            self.observed_bytes += 8;
        }
    }

    fn copy_region(&mut self, region: &Region, from: ExecutorId, to: ExecutorId) -> Result<u64> {
        if from == to {
            return Err(SolverError::Config("transfer needs two distinct executors".into()));
        }
        self.space(from).check(region)?;
        let [a, b] = &mut self.executors;
        let (src, dst) = match from {
            ExecutorId::A => (a.space.as_ref().expect("home"), b.space.as_mut().expect("home")),
            ExecutorId::B => (b.space.as_ref().expect("home"), a.space.as_mut().expect("home")),
        };
        let mut elements = 0u64;
        match region {
            Region::Rows { vec, rows } => {
                let (sv, _) = &src.vectors[vec];
                let bsz = sv.block_size();
                dst.ensure_vector_like(*vec, sv.n(), bsz);
                let (dv, valid) = dst.vectors.get_mut(vec).expect("allocated");
                // logical elements only; the padded tail is zero on both sides
                let lo = (rows.start * bsz).min(sv.n());
                let hi = (rows.end * bsz).min(sv.n());
                dv.padded_mut()[lo..hi].copy_from_slice(&sv.padded()[lo..hi]);
                elements += (hi - lo) as u64;
                valid[rows.clone()].iter_mut().for_each(|ok| *ok = true);
            }
            _ => {
                let sm = src.matrix.as_ref().expect("checked");
                dst.ensure_matrix_like(sm);
                let offs = src.block_offsets(region)?;
                let dm = dst.matrix.as_mut().expect("allocated");
                for k in offs {
                    let blk = sm.block_at(k);
                    dm.block_at_mut(k).copy_from_slice(blk);
                    dst.block_valid[k] = true;
                    elements += blk.len() as u64;
                }
            }
        }
        let bytes = elements * 8;
        self.observed_bytes += bytes;
        Ok(bytes)
    }

    /// Copies `region` from one space to the other and logs it.
    pub fn transfer(&mut self, region: Region, from: ExecutorId, to: ExecutorId, kind: TransferKind) -> Result<TransferEntry> {
        let t0 = Instant::now();
        let bytes = self.copy_region(&region, from, to)?;
        self.transfer_time += t0.elapsed();
        let entry = TransferEntry {
            kind,
            direction: direction(from, to),
            bytes,
            step: self.step,
        };
        self.ledger.record(kind, entry.direction, bytes, self.step);
        Ok(entry)
    }

    /// Swaps the two halves of a split vector: B's `b_rows` go to A and A's `a_rows` go to B.
    /// Logged as a single sub-vector event covering both directions.
    pub fn exchange_rows(&mut self, vec: VecId, b_rows: Range<usize>, a_rows: Range<usize>) -> Result<TransferEntry> {
        let t0 = Instant::now();
        let mut bytes = 0;
        if !b_rows.is_empty() {
            bytes += self.copy_region(&Region::Rows { vec, rows: b_rows }, ExecutorId::B, ExecutorId::A)?;
        }
        if !a_rows.is_empty() {
            bytes += self.copy_region(&Region::Rows { vec, rows: a_rows }, ExecutorId::A, ExecutorId::B)?;
        }
        self.transfer_time += t0.elapsed();
        let entry = TransferEntry {
            kind: TransferKind::Subvector,
            direction: Direction::Both,
            bytes,
            step: self.step,
        };
        self.ledger.record(entry.kind, entry.direction, bytes, self.step);
        Ok(entry)
    }

    /// Sleeps off any throttle debt still owed by either executor.
    pub fn finish(&mut self) {
        for exec in &mut self.executors {
            if let Some(w) = exec.worker.as_mut() {
                w.pay_debt(0.0);
            }
        }
    }
}
