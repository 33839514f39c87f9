//! Deterministic SPD test matrices: squared-exponential kernel matrices over a
//! noisy sine trajectory, plus a diagonal jitter.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Result, SolverError};
use crate::matrix::{block_count, BlockedSPDMatrix};

#[derive(Clone, Debug, PartialEq)]
pub struct KernelParams {
    /// `σ_f²`
    pub signal_variance: f64,
    /// `ℓ`; `None` picks the median pairwise distance of a subsample.
    pub length_scale: Option<f64>,
    /// `σ_n²`, added to the diagonal.
    pub noise: f64,
    /// Input dimension.
    pub dim: usize,
}

impl Default for KernelParams {
    fn default() -> Self {
        Self {
            signal_variance: 1.0,
            length_scale: None,
            noise: 1e-2,
            dim: 2,
        }
    }
}

impl KernelParams {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(SolverError::Config(format!("{name} must be positive and finite, got {v}")))
            }
        };
        positive("signal variance", self.signal_variance)?;
        positive("noise", self.noise)?;
        if let Some(l) = self.length_scale {
            positive("length scale", l)?;
        }
        if self.dim == 0 {
            return Err(SolverError::Config("input dimension must be positive".into()));
        }
        Ok(())
    }
}

const TIME_SPAN: f64 = 10.0;
const OMEGA: f64 = 1.3;
const INPUT_NOISE: f64 = 0.05;
const SUBSAMPLE: usize = 512;

/// `n` points in `dim` dimensions, row-major.
///
/// Point `i` is `(t_i, sin(ω t_i) + e, sin(2ω t_i)/2 + e, …)` with `t_i` evenly
/// spaced and `e` drawn from the ChaCha stream `i` of `seed`, so any point can be
/// produced independently of the others.
pub fn generate_inputs(n: usize, dim: usize, seed: u64) -> Vec<f64> {
    let dt = if n > 1 { TIME_SPAN / (n - 1) as f64 } else { 0.0 };
    (0..n)
        .into_par_iter()
        .flat_map_iter(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let t = i as f64 * dt;
            (0..dim)
                .map(|k| {
                    if k == 0 {
                        t
                    } else {
                        let e: f64 = rng.random_range(-INPUT_NOISE..INPUT_NOISE);
                        (k as f64 * OMEGA * t).sin() / k as f64 + e
                    }
                })
                .collect::<Vec<_>>()
        })
        .collect()
}

fn sq_dist(x: &[f64], p: usize, q: usize, dim: usize) -> f64 {
    let (a, b) = (&x[p * dim..(p + 1) * dim], &x[q * dim..(q + 1) * dim]);
    a.iter().zip(b).map(|(u, v)| (u - v) * (u - v)).sum()
}

/// Median pairwise distance over an evenly strided subsample of at most 512 points.
pub fn median_distance(points: &[f64], dim: usize) -> f64 {
    let n = points.len() / dim;
    if n < 2 {
        return 1.0;
    }
    let stride = n.div_ceil(SUBSAMPLE);
    let idx: Vec<usize> = (0..n).step_by(stride).collect();
    let mut d: Vec<f64> = Vec::with_capacity(idx.len() * (idx.len() - 1) / 2);
    for (a, &p) in idx.iter().enumerate() {
        for &q in &idx[a + 1..] {
            d.push(sq_dist(points, p, q, dim).sqrt());
        }
    }
    let mid = d.len() / 2;
    let (_, m, _) = d.select_nth_unstable_by(mid, f64::total_cmp);
    if *m > 0.0 {
        *m
    } else {
        1.0
    }
}

/// `K[p][q] = σ_f²·exp(−‖x_p − x_q‖² / (2ℓ²)) + σ_n²·δ_pq` in blocked form.
pub fn generate_spd(n: usize, b: usize, params: &KernelParams, seed: u64) -> Result<BlockedSPDMatrix> {
    params.validate()?;
    if n == 0 || b == 0 {
        return Err(SolverError::Dimension(format!("n = {n} and b = {b} must be positive")));
    }
    let dim = params.dim;
    let x = generate_inputs(n, dim, seed);
    let ell = params.length_scale.unwrap_or_else(|| median_distance(&x, dim));
    let scale = 1.0 / (2.0 * ell * ell);
    let kernel = |p: usize, q: usize| {
        if p >= n || q >= n {
            return if p == q { 1.0 } else { 0.0 };
        }
        let k = params.signal_variance * (-sq_dist(&x, p, q, dim) * scale).exp();
        if p == q {
            k + params.noise
        } else {
            k
        }
    };
    let nb = block_count(n, b);
    let rows: Vec<Vec<f64>> = (0..nb)
        .into_par_iter()
        .map(|i| {
            let mut row = Vec::with_capacity((i + 1) * b * b);
            for j in 0..=i {
                for p in 0..b {
                    for q in 0..b {
                        row.push(kernel(i * b + p, j * b + q));
                    }
                }
            }
            row
        })
        .collect();
    BlockedSPDMatrix::from_raw_blocks(n, b, rows.concat())
}

/// Deterministic right-hand side with entries in `[-1, 1)`.
pub fn generate_rhs(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(u64::MAX);
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::SolverConfig;

    #[test]
    fn inputs_are_deterministic() {
        assert_eq!(generate_inputs(50, 3, 7), generate_inputs(50, 3, 7));
        assert_ne!(generate_inputs(50, 3, 7)[1], generate_inputs(50, 3, 8)[1]);
        assert_eq!(generate_inputs(1, 2, 7).len(), 2);
    }

    #[test]
    fn kernel_entries() {
        let p = KernelParams::default();
        let m = generate_spd(37, 8, &p, 3).unwrap();
        for i in 0..37 {
            assert_eq!(m.element(i, i).unwrap(), 1.0 + 1e-2);
        }
        for (a, c) in [(0, 5), (36, 1), (20, 19)] {
            assert_eq!(m.element(a, c).unwrap(), m.element(c, a).unwrap());
            assert!(m.element(a, c).unwrap() < 1.0);
        }
        // padding is an identity extension
        let blk = m.block(4, 4).unwrap();
        assert_eq!(blk[7 * 8 + 7], 1.0);
        assert_eq!(blk[7 * 8 + 6], 0.0);
    }

    #[test]
    fn matches_lower_fn_construction() {
        let p = KernelParams { length_scale: Some(0.7), ..Default::default() };
        let m = generate_spd(20, 6, &p, 9).unwrap();
        let rebuilt = BlockedSPDMatrix::from_lower_fn(20, 6, |a, c| m.element(a, c).unwrap()).unwrap();
        assert_eq!(m.raw(), rebuilt.raw());
    }

    #[test]
    fn generated_matrix_factorizes() {
        let m = generate_spd(256, 32, &KernelParams::default(), 42).unwrap();
        let cfg = SolverConfig { block_size: 32, ..Default::default() };
        crate::cholesky::factorize(&m, &cfg).unwrap();
    }

    #[test]
    fn bad_params_rejected() {
        let p = KernelParams { noise: 0.0, ..Default::default() };
        assert!(generate_spd(4, 2, &p, 0).is_err());
        let p = KernelParams { dim: 0, ..Default::default() };
        assert!(p.validate().is_err());
    }

    #[test]
    fn single_point_median_defaults_to_one() {
        assert_eq!(median_distance(&generate_inputs(1, 2, 0), 2), 1.0);
    }
}
