//! Repeated timed solves and split-fraction sweeps, reported as CSV rows.

use std::io::Write;
use std::time::Duration;

use serde::Serialize;

use crate::cg::solve_cg;
use crate::cholesky::solve_spd;
use crate::config::{ExecMode, SolverConfig};
use crate::error::{Result, SolverError};
use crate::executor::ExecutorId;
use crate::ledger::LedgerSummary;
use crate::matrix::{BlockVector, BlockedSPDMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Algo {
    Cg,
    Cholesky,
}

impl Algo {
    pub fn name(self) -> &'static str {
        match self {
            Algo::Cg => "cg",
            Algo::Cholesky => "cholesky",
        }
    }
}

impl std::str::FromStr for Algo {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "cg" => Ok(Algo::Cg),
            "cholesky" => Ok(Algo::Cholesky),
            _ => Err(format!("unknown algorithm {s:?} (expected cg or cholesky)")),
        }
    }
}

/// How a fraction is turned into an execution mode.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ModeChoice {
    /// `f = 0` runs on A alone, `f = 1` on B alone, anything else split.
    #[default]
    Auto,
    Hetero,
    HomoA,
    HomoB,
}

impl ModeChoice {
    pub fn resolve(self, fraction: f64) -> ExecMode {
        match self {
            ModeChoice::Auto if fraction == 0.0 => ExecMode::Homogeneous(ExecutorId::A),
            ModeChoice::Auto if fraction == 1.0 => ExecMode::Homogeneous(ExecutorId::B),
            ModeChoice::Auto | ModeChoice::Hetero => ExecMode::Heterogeneous,
            ModeChoice::HomoA => ExecMode::Homogeneous(ExecutorId::A),
            ModeChoice::HomoB => ExecMode::Homogeneous(ExecutorId::B),
        }
    }
}

impl std::str::FromStr for ModeChoice {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "auto" => Ok(ModeChoice::Auto),
            "hetero" => Ok(ModeChoice::Hetero),
            "homo-a" => Ok(ModeChoice::HomoA),
            "homo-b" => Ok(ModeChoice::HomoB),
            _ => Err(format!("unknown mode {s:?} (expected auto, hetero, homo-a or homo-b)")),
        }
    }
}

pub const CSV_HEADER: &str = "algo,n,block_size,fraction,workers_a,workers_b,slowdown_a,slowdown_b,reps,\
runtime_ms_median,runtime_ms_mean,compute_ms_median,iters,recomputes,true_residual,bytes_total,\
bytes_scalar,bytes_subvector,bytes_block,bytes_block_row,border_shifts,status,seed";

/// One CSV row. Field order is the column order.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Row {
    pub algo: &'static str,
    pub n: usize,
    pub block_size: usize,
    pub fraction: f64,
    pub workers_a: usize,
    pub workers_b: usize,
    pub slowdown_a: f64,
    pub slowdown_b: f64,
    pub reps: usize,
    pub runtime_ms_median: f64,
    pub runtime_ms_mean: f64,
    pub compute_ms_median: f64,
    pub iters: usize,
    pub recomputes: usize,
    pub true_residual: f64,
    pub bytes_total: u64,
    pub bytes_scalar: u64,
    pub bytes_subvector: u64,
    pub bytes_block: u64,
    pub bytes_block_row: u64,
    pub border_shifts: usize,
    pub status: String,
    pub seed: u64,
}

impl Row {
    fn empty(algo: Algo, n: usize, cfg: &SolverConfig, reps: usize) -> Self {
        Row {
            algo: algo.name(),
            n,
            block_size: cfg.block_size,
            fraction: cfg.fraction,
            workers_a: cfg.workers_a,
            workers_b: cfg.workers_b,
            slowdown_a: cfg.slowdown_a,
            slowdown_b: cfg.slowdown_b,
            reps,
            runtime_ms_median: f64::NAN,
            runtime_ms_mean: f64::NAN,
            compute_ms_median: f64::NAN,
            iters: 0,
            recomputes: 0,
            true_residual: f64::NAN,
            bytes_total: 0,
            bytes_scalar: 0,
            bytes_subvector: 0,
            bytes_block: 0,
            bytes_block_row: 0,
            border_shifts: 0,
            status: String::new(),
            seed: cfg.seed,
        }
    }

    pub fn ok(&self) -> bool {
        self.status == "converged" || self.status == "ok"
    }

    fn set_ledger(&mut self, s: &LedgerSummary) {
        self.bytes_total = s.bytes_total;
        self.bytes_scalar = s.bytes_scalar;
        self.bytes_subvector = s.bytes_subvector;
        self.bytes_block = s.bytes_block;
        self.bytes_block_row = s.bytes_block_row;
    }
}

/// What a single measured run produced.
struct Sample {
    runtime: Duration,
    compute: Duration,
    row: Row,
}

fn run_once(algo: Algo, a: &BlockedSPDMatrix, rhs: &BlockVector, cfg: &SolverConfig, reps: usize) -> Result<Sample> {
    let mut row = Row::empty(algo, a.n(), cfg, reps);
    match algo {
        Algo::Cg => {
            let out = solve_cg(a, rhs, cfg)?;
            let st = &out.stats;
            row.iters = st.iterations;
            row.recomputes = st.recomputations;
            row.true_residual = st.true_residual;
            row.set_ledger(&st.ledger.summary());
            row.status = if st.converged { "converged" } else { "not_converged" }.into();
            Ok(Sample { runtime: st.wall_time, compute: st.compute_time(), row })
        }
        Algo::Cholesky => {
            let (_, st) = solve_spd(a, rhs, cfg)?;
            let f = &st.factor;
            row.iters = f.plan.blocks;
            row.true_residual = st.true_residual;
            row.set_ledger(&f.ledger.summary());
            row.border_shifts = f.border_shifts;
            row.status = "ok".into();
            Ok(Sample {
                runtime: f.wall_time + st.solve_time,
                compute: f.compute_time() + st.solve_time,
                row,
            })
        }
    }
}

fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        (v[m - 1] + v[m]) / 2.0
    }
}

/// Runs one configuration `reps` times (after an untimed warmup run when
/// `warmup` is set). Failures become a row with the error kind as status.
pub fn measure(
    algo: Algo,
    a: &BlockedSPDMatrix,
    rhs: &BlockVector,
    cfg: &SolverConfig,
    reps: usize,
    warmup: bool,
) -> Row {
    let reps = reps.max(1);
    let fail = |e: SolverError| {
        let mut row = Row::empty(algo, a.n(), cfg, reps);
        row.status = e.kind().to_string();
        row
    };
    if warmup {
        if let Err(e) = run_once(algo, a, rhs, cfg, reps) {
            return fail(e);
        }
    }
    let mut runtimes = Vec::with_capacity(reps);
    let mut computes = Vec::with_capacity(reps);
    let mut first: Option<Row> = None;
    for _ in 0..reps {
        match run_once(algo, a, rhs, cfg, reps) {
            Ok(s) => {
                runtimes.push(ms(s.runtime));
                computes.push(ms(s.compute));
                first.get_or_insert(s.row);
            }
            Err(e) => return fail(e),
        }
    }
    let mut row = first.expect("reps >= 1");
    row.runtime_ms_mean = runtimes.iter().sum::<f64>() / runtimes.len() as f64;
    row.runtime_ms_median = median(&mut runtimes);
    row.compute_ms_median = median(&mut computes);
    row
}

pub fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().has_headers(true).from_writer(w)
}

/// Serializes rows with the header line.
pub fn write_rows<W: Write>(w: W, rows: &[Row]) -> Result<()> {
    let mut out = csv_writer(w);
    for r in rows {
        out.serialize(r).map_err(csv_error)?;
    }
    out.flush().map_err(|e| SolverError::Config(format!("writing CSV: {e}")))
}

fn csv_error(e: csv::Error) -> SolverError {
    SolverError::Config(format!("writing CSV: {e}"))
}

/// Parses `0.1,0.5,0.9` or `start:stop:step` (inclusive of `stop` up to rounding).
pub fn parse_grid(s: &str) -> std::result::Result<Vec<f64>, String> {
    let s = s.trim();
    if s.is_empty() {
        return Err("empty grid".into());
    }
    if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        let [lo, hi, step] = parts.as_slice() else {
            return Err(format!("range {s:?} must be start:stop:step"));
        };
        let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}"));
        let (lo, hi, step) = (num(lo)?, num(hi)?, num(step)?);
        if !(step > 0.0) || hi < lo {
            return Err(format!("range {s:?} needs step > 0 and stop >= start"));
        }
        let count = ((hi - lo) / step + 1e-9).floor() as usize;
        // 0:1:0.05 should give 0.35, not 0.35000000000000003
        Ok((0..=count).map(|k| tidy(lo + k as f64 * step)).collect())
    } else {
        s.split(',')
            .map(|t| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}")))
            .collect()
    }
}

fn tidy(v: f64) -> f64 {
    format!("{v:.12}").parse().expect("formatted float")
}

/// Lowest-median-runtime fraction per `(algo, n, block_size)` among successful rows,
/// in first-appearance order.
pub fn argmin_fractions(rows: &[Row]) -> Vec<(&'static str, usize, usize, f64, f64)> {
    let mut out: Vec<(&'static str, usize, usize, f64, f64)> = Vec::new();
    for r in rows.iter().filter(|r| r.ok()) {
        match out.iter_mut().find(|o| o.0 == r.algo && o.1 == r.n && o.2 == r.block_size) {
            Some(o) if r.runtime_ms_median < o.4 => {
                o.3 = r.fraction;
                o.4 = r.runtime_ms_median;
            }
            Some(_) => {}
            None => out.push((r.algo, r.n, r.block_size, r.fraction, r.runtime_ms_median)),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_matches_row_fields() {
        let row = Row::empty(Algo::Cg, 4, &SolverConfig::default(), 1);
        let mut buf = Vec::new();
        write_rows(&mut buf, &[row]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next().unwrap(), CSV_HEADER);
    }

    #[test]
    fn grids() {
        assert_eq!(parse_grid("0.1, 0.5").unwrap(), vec![0.1, 0.5]);
        let g = parse_grid("0:1:0.05").unwrap();
        assert_eq!(g.len(), 21);
        assert_eq!(g[7], 0.35);
        assert_eq!(*g.last().unwrap(), 1.0);
        assert!(parse_grid("").is_err());
        assert!(parse_grid("1:0:0.1").is_err());
        assert!(parse_grid("0:1").is_err());
    }

    #[test]
    fn auto_mode_endpoints() {
        assert_eq!(ModeChoice::Auto.resolve(0.0), ExecMode::Homogeneous(ExecutorId::A));
        assert_eq!(ModeChoice::Auto.resolve(1.0), ExecMode::Homogeneous(ExecutorId::B));
        assert_eq!(ModeChoice::Auto.resolve(0.5), ExecMode::Heterogeneous);
        assert_eq!(ModeChoice::Hetero.resolve(0.0), ExecMode::Heterogeneous);
    }

    #[test]
    fn single_rep_median_equals_mean() {
        let a = BlockedSPDMatrix::identity(16, 4).unwrap();
        let rhs = BlockVector::from_slice(&[1.0; 16], 4).unwrap();
        let cfg = SolverConfig { block_size: 4, fraction: 0.5, ..Default::default() };
        for algo in [Algo::Cg, Algo::Cholesky] {
            let row = measure(algo, &a, &rhs, &cfg, 1, false);
            assert!(row.ok(), "{}", row.status);
            assert_eq!(row.runtime_ms_median, row.runtime_ms_mean);
        }
    }

    #[test]
    fn failures_become_status() {
        let a = BlockedSPDMatrix::from_lower_fn(4, 2, |p, q| if p == q { -1.0 } else { 0.0 }).unwrap();
        let rhs = BlockVector::from_slice(&[1.0; 4], 2).unwrap();
        let cfg = SolverConfig { block_size: 2, ..Default::default() };
        assert_eq!(measure(Algo::Cholesky, &a, &rhs, &cfg, 2, true).status, "not_spd");
    }

    #[test]
    fn argmin_picks_fastest_ok_row() {
        let cfg = SolverConfig::default();
        let mut rows = Vec::new();
        for (f, t, s) in [(0.2, 5.0, "ok"), (0.6, 2.0, "ok"), (0.8, 1.0, "not_spd")] {
            let mut r = Row::empty(Algo::Cholesky, 8, &SolverConfig { fraction: f, ..cfg.clone() }, 1);
            r.runtime_ms_median = t;
            r.status = s.into();
            rows.push(r);
        }
        let m = argmin_fractions(&rows);
        assert_eq!(m, vec![("cholesky", 8, 32, 0.6, 2.0)]);
    }
}
