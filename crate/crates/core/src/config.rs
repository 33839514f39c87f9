use crate::error::{Result, SolverError};
use crate::executor::ExecutorId;

/// How the work is placed on the two executors.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExecMode {
    /// Split by `SolverConfig::fraction`, with all transfers accounted.
    Heterogeneous,
    /// Everything on one executor; no per-step traffic.
    Homogeneous(ExecutorId),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    /// CG relative tolerance: stop when `u <= eps²·u0`.
    pub eps: f64,
    pub max_iters: usize,
    /// Iterations between true-residual recomputations; 0 disables them.
    pub recompute_interval: usize,
    /// Share of the work placed on executor B.
    pub fraction: f64,
    pub block_size: usize,
    pub workers_a: usize,
    pub workers_b: usize,
    /// Artificial per-executor slowdown, `>= 1`.
    pub slowdown_a: f64,
    pub slowdown_b: f64,
    pub seed: u64,
    pub mode: ExecMode,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            eps: 1e-6,
            max_iters: 1000,
            recompute_interval: 50,
            fraction: 0.85,
            block_size: 32,
            workers_a: 1,
            workers_b: 1,
            slowdown_a: 1.0,
            slowdown_b: 1.0,
            seed: 42,
            mode: ExecMode::Heterogeneous,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(SolverError::Config(msg));
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return bad(format!("eps must be positive and finite, got {}", self.eps));
        }
        if !(0.0..=1.0).contains(&self.fraction) {
            return bad(format!("fraction must lie in [0, 1], got {}", self.fraction));
        }
        if self.block_size == 0 {
            return bad("block size must be positive".into());
        }
        if self.workers_a == 0 || self.workers_b == 0 {
            return bad("worker counts must be positive".into());
        }
        for (name, s) in [("slowdown_a", self.slowdown_a), ("slowdown_b", self.slowdown_b)] {
            if !(s >= 1.0 && s.is_finite()) {
                return bad(format!("{name} must be a finite value >= 1, got {s}"));
            }
        }
        Ok(())
    }

    pub fn workers(&self, e: ExecutorId) -> usize {
        match e {
            ExecutorId::A => self.workers_a,
            ExecutorId::B => self.workers_b,
        }
    }

    pub fn slowdown(&self, e: ExecutorId) -> f64 {
        match e {
            ExecutorId::A => self.slowdown_a,
            ExecutorId::B => self.slowdown_b,
        }
    }

    /// Whether iteration `iter` (1-based) replaces the residual update by `rhs - A·x`.
    pub fn recomputes_at(&self, iter: usize) -> bool {
        self.recompute_interval > 0 && iter > 0 && iter % self.recompute_interval == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let c = SolverConfig::default();
        c.validate().unwrap();
        assert_eq!(c.eps, 1e-6);
        assert_eq!(c.recompute_interval, 50);
    }

    #[test]
    fn rejects_bad_values() {
        let mut c = SolverConfig { fraction: 1.5, ..Default::default() };
        assert!(c.validate().is_err());
        c.fraction = 0.5;
        c.workers_b = 0;
        assert!(c.validate().is_err());
        c.workers_b = 1;
        c.slowdown_a = 0.5;
        assert!(c.validate().is_err());
        c.slowdown_a = 1.0;
        c.eps = 0.0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn recompute_schedule() {
        let c = SolverConfig { recompute_interval: 5, ..Default::default() };
        let hits: Vec<_> = (1..=12).filter(|&i| c.recomputes_at(i)).collect();
        assert_eq!(hits, vec![5, 10]);
        let off = SolverConfig { recompute_interval: 0, ..Default::default() };
        assert!(!(1..1000).any(|i| off.recomputes_at(i)));
    }
}
