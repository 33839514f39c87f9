//! Packed lower-triangular block storage for symmetric matrices and the
//! matching block-partitioned vectors.
//!
//! A matrix of side `n` with block size `b` is padded to `N·b` where
//! `N = ceil(n / b)`. Only the `N(N+1)/2` blocks `(i, j)` with `j <= i` are
//! stored, one after another in triangular-offset order, each block `b×b`
//! row-major. The padding region holds an identity extension so the padded
//! matrix stays SPD and every kernel can work on full blocks.

use std::ops::Range;

use crate::error::{Result, SolverError};

/// Number of block rows needed to cover `n` elements with blocks of side `b`.
pub fn block_count(n: usize, b: usize) -> usize {
    n.div_ceil(b)
}

/// Offset of block `(i, j)` in triangular storage with `blocks` block rows.
pub fn block_index(i: usize, j: usize, blocks: usize) -> Result<usize> {
    if j > i || i >= blocks {
        return Err(SolverError::BlockOutOfRange {
            row: i,
            col: j,
            blocks,
        });
    }
    Ok(tri_offset(i, j))
}

#[inline]
pub(crate) fn tri_offset(i: usize, j: usize) -> usize {
    i * (i + 1) / 2 + j
}

fn check_dims(n: usize, b: usize) -> Result<()> {
    if n == 0 || b == 0 {
        return Err(SolverError::Config(format!(
            "matrix side and block size must be positive (n = {n}, b = {b})"
        )));
    }
    Ok(())
}

/// Symmetric matrix stored as packed lower-triangular `b×b` blocks.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockedSPDMatrix {
    n: usize,
    b: usize,
    nb: usize,
    data: Vec<f64>,
}

impl BlockedSPDMatrix {
    /// Builds a matrix from a function of the lower triangle, `value(p, q)` with `q <= p < n`.
    ///
    /// Upper halves of diagonal blocks are filled with the mirrored values.
    pub fn from_lower_fn(n: usize, b: usize, mut value: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        check_dims(n, b)?;
        let nb = block_count(n, b);
        let mut m = Self {
            n,
            b,
            nb,
            data: vec![0.0; nb * (nb + 1) / 2 * b * b],
        };
        for i in 0..nb {
            for j in 0..=i {
                let off = tri_offset(i, j) * b * b;
                for p in 0..b {
                    let gp = i * b + p;
                    for q in 0..b {
                        let gq = j * b + q;
                        let v = if gp >= n || gq >= n {
                            if gp == gq { 1.0 } else { 0.0 }
                        } else if gq <= gp {
                            value(gp, gq)
                        } else {
                            // upper half of a diagonal block
                            continue;
                        };
                        m.data[off + p * b + q] = v;
                    }
                }
                if i == j {
                    let blk = &mut m.data[off..off + b * b];
                    for p in 0..b {
                        for q in p + 1..b {
                            blk[p * b + q] = blk[q * b + p];
                        }
                    }
                }
            }
        }
        Ok(m)
    }

    pub fn identity(n: usize, b: usize) -> Result<Self> {
        Self::from_lower_fn(n, b, |p, q| if p == q { 1.0 } else { 0.0 })
    }

    /// Builds from a dense row-major `n×n` array, reading only its lower triangle.
    pub fn from_dense(n: usize, b: usize, dense: &[f64]) -> Result<Self> {
        if dense.len() != n * n {
            return Err(SolverError::Dimension(format!(
                "dense input has {} values, expected {}",
                dense.len(),
                n * n
            )));
        }
        Self::from_lower_fn(n, b, |p, q| dense[p * n + q])
    }

    /// Wraps raw triangular block data, e.g. as read from a file.
    pub fn from_raw_blocks(n: usize, b: usize, data: Vec<f64>) -> Result<Self> {
        check_dims(n, b)?;
        let nb = block_count(n, b);
        let expected = nb * (nb + 1) / 2 * b * b;
        if data.len() != expected {
            return Err(SolverError::Dimension(format!(
                "raw block data has {} values, expected {expected}",
                data.len()
            )));
        }
        Ok(Self { n, b, nb, data })
    }

    /// Logical side length.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn block_size(&self) -> usize {
        self.b
    }

    /// Number of block rows `N`.
    pub fn block_rows(&self) -> usize {
        self.nb
    }

    /// Number of stored blocks, `N(N+1)/2`.
    pub fn num_blocks(&self) -> usize {
        self.nb * (self.nb + 1) / 2
    }

    /// Padded side length `N·b`.
    pub fn padded_n(&self) -> usize {
        self.nb * self.b
    }

    pub fn padding(&self) -> usize {
        self.padded_n() - self.n
    }

    pub fn raw(&self) -> &[f64] {
        &self.data
    }

    pub fn block(&self, i: usize, j: usize) -> Result<&[f64]> {
        let k = block_index(i, j, self.nb)?;
        Ok(self.block_at(k))
    }

    pub fn block_mut(&mut self, i: usize, j: usize) -> Result<&mut [f64]> {
        let k = block_index(i, j, self.nb)?;
        Ok(self.block_at_mut(k))
    }

    /// Block at triangular offset `k`.
    #[inline]
    pub fn block_at(&self, k: usize) -> &[f64] {
        let bb = self.b * self.b;
        &self.data[k * bb..(k + 1) * bb]
    }

    #[inline]
    pub fn block_at_mut(&mut self, k: usize) -> &mut [f64] {
        let bb = self.b * self.b;
        &mut self.data[k * bb..(k + 1) * bb]
    }

    /// Symmetric element read. Reads the lower triangle only, also inside diagonal blocks.
    pub fn element(&self, p: usize, q: usize) -> Result<f64> {
        if p >= self.n || q >= self.n {
            return Err(SolverError::ElementOutOfRange {
                row: p,
                col: q,
                n: self.n,
            });
        }
        Ok(self.padded_element(p, q))
    }

    /// Element of the padded matrix, `p, q < N·b`.
    #[inline]
    pub(crate) fn padded_element(&self, p: usize, q: usize) -> f64 {
        let (p, q) = if q > p { (q, p) } else { (p, q) };
        let b = self.b;
        self.block_at(tri_offset(p / b, q / b))[(p % b) * b + q % b]
    }

    /// Entries of the lower triangle of the logical `n×n` matrix as a dense row-major array
    /// (upper triangle zero).
    pub fn lower_dense(&self) -> Vec<f64> {
        let n = self.n;
        let mut out = vec![0.0; n * n];
        for p in 0..n {
            for q in 0..=p {
                out[p * n + q] = self.padded_element(p, q);
            }
        }
        out
    }

    /// The full symmetric logical matrix, dense row-major.
    pub fn to_dense(&self) -> Vec<f64> {
        let n = self.n;
        let mut out = vec![0.0; n * n];
        for p in 0..n {
            for q in 0..=p {
                let v = self.padded_element(p, q);
                out[p * n + q] = v;
                out[q * n + p] = v;
            }
        }
        out
    }

    /// Same logical matrix with a different block size.
    pub fn reblock(&self, b: usize) -> Result<Self> {
        if b == self.b {
            return Ok(self.clone());
        }
        Self::from_lower_fn(self.n, b, |p, q| self.padded_element(p, q))
    }

    /// Largest absolute value in the logical lower triangle.
    pub fn max_abs(&self) -> f64 {
        let mut m = 0.0f64;
        for p in 0..self.n {
            for q in 0..=p {
                m = m.max(self.padded_element(p, q).abs());
            }
        }
        m
    }
}

/// A vector partitioned into block rows of the paired matrix's block size.
///
/// The padded tail (indices `>= n`) is kept at zero.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockVector {
    n: usize,
    b: usize,
    data: Vec<f64>,
}

impl BlockVector {
    pub fn zeros(n: usize, b: usize) -> Result<Self> {
        check_dims(n, b)?;
        Ok(Self {
            n,
            b,
            data: vec![0.0; block_count(n, b) * b],
        })
    }

    pub fn from_slice(values: &[f64], b: usize) -> Result<Self> {
        let mut v = Self::zeros(values.len(), b)?;
        v.data[..values.len()].copy_from_slice(values);
        Ok(v)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn block_size(&self) -> usize {
        self.b
    }

    pub fn block_rows(&self) -> usize {
        self.data.len() / self.b
    }

    /// Logical values (without padding).
    pub fn values(&self) -> &[f64] {
        &self.data[..self.n]
    }

    /// Padded storage.
    pub fn padded(&self) -> &[f64] {
        &self.data
    }

    pub(crate) fn padded_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn block_row(&self, i: usize) -> &[f64] {
        &self.data[i * self.b..(i + 1) * self.b]
    }

    /// Padded elements covered by block rows `rows`.
    pub fn rows(&self, rows: Range<usize>) -> &[f64] {
        &self.data[rows.start * self.b..rows.end * self.b]
    }

    /// Number of logical (non-padding) elements inside block rows `rows`.
    pub fn logical_len(&self, rows: &Range<usize>) -> usize {
        let lo = (rows.start * self.b).min(self.n);
        let hi = (rows.end * self.b).min(self.n);
        hi - lo
    }

    pub fn norm2(&self) -> f64 {
        self.values().iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn into_values(mut self) -> Vec<f64> {
        self.data.truncate(self.n);
        self.data
    }
}
