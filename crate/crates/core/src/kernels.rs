//! Dense FP64 kernels on single `b×b` blocks and on block-row ranges.
//!
//! Every output element is accumulated sequentially in ascending index order,
//! starting from `0.0`. Loops may be reordered or interleaved across *different*
//! output elements, never within one element's sum, so a given element has the
//! same bits no matter which executor or worker computed it.

use std::ops::Range;

use crate::error::{Result, SolverError};
use crate::matrix::{tri_offset, BlockVector, BlockedSPDMatrix};

fn check_finite(c: &[f64], what: &str) -> Result<()> {
    if c.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(SolverError::Numerical(what.to_string()))
    }
}

/// In-place Cholesky factor of the lower triangle of a diagonal block.
///
/// Row-oriented Cholesky–Crout: for each row, the off-diagonal entries left to
/// right, then the diagonal. The strict upper triangle is not touched.
pub fn potf_block(d: &mut [f64], b: usize, block_row: usize) -> Result<()> {
    debug_assert_eq!(d.len(), b * b);
    for p in 0..b {
        for q in 0..p {
            let mut s = 0.0;
            for k in 0..q {
                s += d[p * b + k] * d[q * b + k];
            }
            d[p * b + q] = (d[p * b + q] - s) / d[q * b + q];
        }
        let mut s = 0.0;
        for k in 0..p {
            let v = d[p * b + k];
            s += v * v;
        }
        let pivot = d[p * b + p] - s;
        if !(pivot > 0.0) || !pivot.is_finite() {
            return Err(SolverError::NotSpd {
                block_row,
                pivot: p,
            });
        }
        d[p * b + p] = pivot.sqrt();
    }
    Ok(())
}

/// Overwrites `x` (holding `B`) with the solution `X` of `X·Lᵀ = B`.
pub fn trsm_block(x: &mut [f64], l: &[f64], b: usize) -> Result<()> {
    debug_assert_eq!(x.len(), b * b);
    for q in 0..b {
        let diag = l[q * b + q];
        if diag == 0.0 || !diag.is_finite() {
            return Err(SolverError::SingularBlock { index: q });
        }
    }
    for row in x.chunks_exact_mut(b) {
        for q in 0..b {
            let lq = &l[q * b..q * b + q];
            let mut s = 0.0;
            for k in 0..q {
                s += row[k] * lq[k];
            }
            row[q] = (row[q] - s) / l[q * b + q];
        }
    }
    Ok(())
}

/// `acc[s][col] = Σ_k p[r+s][k]·q[col][k]` for the 1 or 4 rows starting at `r`, ascending `k`.
///
/// `qt` is `q` transposed, so the innermost loop runs across output columns.
fn product_rows(p: &[f64], qt: &[f64], b: usize, r: usize, four: bool, acc: &mut [f64]) {
    if four {
        let (a0, rest) = acc.split_at_mut(b);
        let (a1, rest) = rest.split_at_mut(b);
        let (a2, a3) = rest.split_at_mut(b);
        let a3 = &mut a3[..b];
        a0.fill(0.0);
        a1.fill(0.0);
        a2.fill(0.0);
        a3.fill(0.0);
        for k in 0..b {
            let (p0, p1, p2, p3) = (
                p[r * b + k],
                p[(r + 1) * b + k],
                p[(r + 2) * b + k],
                p[(r + 3) * b + k],
            );
            let qk = &qt[k * b..(k + 1) * b];
            for c in 0..b {
                let v = qk[c];
                a0[c] += p0 * v;
                a1[c] += p1 * v;
                a2[c] += p2 * v;
                a3[c] += p3 * v;
            }
        }
    } else {
        let a0 = &mut acc[..b];
        a0.fill(0.0);
        for k in 0..b {
            let pk = p[r * b + k];
            let qk = &qt[k * b..(k + 1) * b];
            for c in 0..b {
                a0[c] += pk * qk[c];
            }
        }
    }
}

fn transpose(q: &[f64], b: usize) -> Vec<f64> {
    let mut qt = vec![0.0; b * b];
    for r in 0..b {
        for c in 0..b {
            qt[c * b + r] = q[r * b + c];
        }
    }
    qt
}

/// `C ← C − P·Qᵀ` where each product entry is summed over ascending `k` before subtracting.
pub fn gemm_update(c: &mut [f64], p: &[f64], q: &[f64], b: usize) -> Result<()> {
    let qt = transpose(q, b);
    let mut acc = vec![0.0; 4 * b];
    let mut r = 0;
    while r < b {
        let step = if r + 4 <= b { 4 } else { 1 };
        product_rows(p, &qt, b, r, step == 4, &mut acc);
        for s in 0..step {
            let crow = &mut c[(r + s) * b..(r + s + 1) * b];
            for (cv, av) in crow.iter_mut().zip(&acc[s * b..(s + 1) * b]) {
                *cv -= av;
            }
        }
        r += step;
    }
    check_finite(c, "gemm update")
}

/// `lower(C) ← lower(C − P·Pᵀ)` on a diagonal block; the strict upper triangle is left as is.
pub fn syrk_update(c: &mut [f64], p: &[f64], b: usize) -> Result<()> {
    let pt = transpose(p, b);
    let mut acc = vec![0.0; 4 * b];
    let mut r = 0;
    while r < b {
        let step = if r + 4 <= b { 4 } else { 1 };
        product_rows(p, &pt, b, r, step == 4, &mut acc);
        for s in 0..step {
            let row = r + s;
            let crow = &mut c[row * b..row * b + row + 1];
            for (cv, av) in crow.iter_mut().zip(&acc[s * b..]) {
                *cv -= av;
            }
        }
        r += step;
    }
    let mut ok = true;
    for row in 0..b {
        ok &= c[row * b..row * b + row + 1].iter().all(|v| v.is_finite());
    }
    if ok {
        Ok(())
    } else {
        Err(SolverError::Numerical("syrk update".into()))
    }
}

/// Block row `i` of `A·x` into `out` (length `b`); `x` is the padded vector.
pub(crate) fn symv_block_row(a: &BlockedSPDMatrix, x: &[f64], i: usize, out: &mut [f64]) {
    let b = a.block_size();
    let nb = a.block_rows();
    out.fill(0.0);
    for j in 0..nb {
        let xj = &x[j * b..(j + 1) * b];
        if j < i {
            // row-major rows of A_ij, four output rows interleaved
            let blk = a.block_at(tri_offset(i, j));
            let mut p = 0;
            while p + 4 <= b {
                let (mut s0, mut s1, mut s2, mut s3) = (out[p], out[p + 1], out[p + 2], out[p + 3]);
                let r0 = &blk[p * b..(p + 1) * b];
                let r1 = &blk[(p + 1) * b..(p + 2) * b];
                let r2 = &blk[(p + 2) * b..(p + 3) * b];
                let r3 = &blk[(p + 3) * b..(p + 4) * b];
                for q in 0..b {
                    let xv = xj[q];
                    s0 += r0[q] * xv;
                    s1 += r1[q] * xv;
                    s2 += r2[q] * xv;
                    s3 += r3[q] * xv;
                }
                out[p] = s0;
                out[p + 1] = s1;
                out[p + 2] = s2;
                out[p + 3] = s3;
                p += 4;
            }
            for p in p..b {
                let row = &blk[p * b..(p + 1) * b];
                let mut s = out[p];
                for q in 0..b {
                    s += row[q] * xj[q];
                }
                out[p] = s;
            }
        } else if j == i {
            // lower triangle only: a(p, q) = D[max][min]
            let blk = a.block_at(tri_offset(i, i));
            for (p, o) in out.iter_mut().enumerate() {
                let mut s = *o;
                for q in 0..b {
                    let v = if q <= p { blk[p * b + q] } else { blk[q * b + p] };
                    s += v * xj[q];
                }
                *o = s;
            }
        } else {
            // transposed A_ji: contiguous across output rows
            let blk = a.block_at(tri_offset(j, i));
            for q in 0..b {
                let xv = xj[q];
                let row = &blk[q * b..(q + 1) * b];
                for (o, &v) in out.iter_mut().zip(row) {
                    *o += v * xv;
                }
            }
        }
    }
}

fn check_rows(rows: &Range<usize>, blocks: usize) -> Result<()> {
    if rows.start > rows.end || rows.end > blocks {
        return Err(SolverError::RangeOutOfBounds {
            lo: rows.start,
            hi: rows.end,
            blocks,
        });
    }
    Ok(())
}

fn check_pair(a: &BlockVector, b: &BlockVector) -> Result<()> {
    if a.n() != b.n() || a.block_size() != b.block_size() {
        return Err(SolverError::Dimension(format!(
            "vector shapes differ: (n={}, b={}) vs (n={}, b={})",
            a.n(),
            a.block_size(),
            b.n(),
            b.block_size()
        )));
    }
    Ok(())
}

/// Block rows `rows` of `A·x`, as a padded slice of length `(hi − lo)·b`.
pub fn symv_range(a: &BlockedSPDMatrix, x: &BlockVector, rows: Range<usize>) -> Result<Vec<f64>> {
    check_rows(&rows, a.block_rows())?;
    if x.n() != a.n() || x.block_size() != a.block_size() {
        return Err(SolverError::Dimension("vector does not match matrix blocking".into()));
    }
    let b = a.block_size();
    let mut out = vec![0.0; rows.len() * b];
    for (k, i) in rows.enumerate() {
        symv_block_row(a, x.padded(), i, &mut out[k * b..(k + 1) * b]);
    }
    Ok(out)
}

/// Sequential dot product of two equal-length slices.
#[inline]
pub fn dot_block(u: &[f64], v: &[f64]) -> f64 {
    let mut s = 0.0;
    for (a, b) in u.iter().zip(v) {
        s += a * b;
    }
    s
}

/// Folds per-block partials onto `seed` in ascending order.
///
/// Folding the partials of `[r, N)` onto the value of `[0, r)` reproduces the
/// full-range value bit for bit, which is how the two executors combine.
pub fn fold_partials(seed: f64, partials: &[f64]) -> f64 {
    partials.iter().fold(seed, |acc, p| acc + p)
}

/// Per-block-row dot products over `rows`.
pub fn dot_partials(u: &BlockVector, v: &BlockVector, rows: Range<usize>) -> Result<Vec<f64>> {
    check_pair(u, v)?;
    check_rows(&rows, u.block_rows())?;
    Ok(rows.map(|i| dot_block(u.block_row(i), v.block_row(i))).collect())
}

/// `Σ` over `rows` of the per-block dot products, ascending.
pub fn dot_range(u: &BlockVector, v: &BlockVector, rows: Range<usize>) -> Result<f64> {
    Ok(fold_partials(0.0, &dot_partials(u, v, rows)?))
}

/// Continues a prefix value `seed` (covering the rows before `rows`) over `rows`.
pub fn dot_range_seeded(seed: f64, u: &BlockVector, v: &BlockVector, rows: Range<usize>) -> Result<f64> {
    Ok(fold_partials(seed, &dot_partials(u, v, rows)?))
}

#[inline]
pub(crate) fn axpy_slice(y: &mut [f64], x: &[f64], alpha: f64) {
    for (yv, xv) in y.iter_mut().zip(x) {
        *yv += alpha * xv;
    }
}

#[inline]
pub(crate) fn xpay_slice(s: &mut [f64], r: &[f64], beta: f64) {
    for (sv, rv) in s.iter_mut().zip(r) {
        *sv = rv + beta * *sv;
    }
}

/// `y ← y + α·x` over block rows `rows`.
pub fn axpy_range(y: &mut BlockVector, x: &BlockVector, alpha: f64, rows: Range<usize>) -> Result<()> {
    check_pair(y, x)?;
    check_rows(&rows, y.block_rows())?;
    let b = y.block_size();
    let span = rows.start * b..rows.end * b;
    axpy_slice(&mut y.padded_mut()[span.clone()], &x.padded()[span], alpha);
    Ok(())
}

/// `s ← r + β·s` over block rows `rows`.
pub fn xpay_range(s: &mut BlockVector, r: &BlockVector, beta: f64, rows: Range<usize>) -> Result<()> {
    check_pair(s, r)?;
    check_rows(&rows, s.block_rows())?;
    let b = s.block_size();
    let span = rows.start * b..rows.end * b;
    xpay_slice(&mut s.padded_mut()[span.clone()], &r.padded()[span], beta);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{RngExt, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_block(rng: &mut ChaCha8Rng, b: usize) -> Vec<f64> {
        (0..b * b).map(|_| rng.random_range(-1.0..1.0)).collect()
    }

    /// Well-conditioned SPD block: M·Mᵀ + b·I.
    fn spd_block(rng: &mut ChaCha8Rng, b: usize) -> Vec<f64> {
        let m = random_block(rng, b);
        let mut d = vec![0.0; b * b];
        for p in 0..b {
            for q in 0..b {
                let mut s = 0.0;
                for k in 0..b {
                    s += m[p * b + k] * m[q * b + k];
                }
                d[p * b + q] = s + if p == q { b as f64 } else { 0.0 };
            }
        }
        d
    }

    // naive triple loop with the mandated accumulation order
    fn naive_gemm(c: &[f64], p: &[f64], q: &[f64], b: usize) -> Vec<f64> {
        let mut out = c.to_vec();
        for r in 0..b {
            for col in 0..b {
                let mut acc = 0.0;
                for k in 0..b {
                    acc += p[r * b + k] * q[col * b + k];
                }
                out[r * b + col] -= acc;
            }
        }
        out
    }

    fn naive_syrk(c: &[f64], p: &[f64], b: usize) -> Vec<f64> {
        let full = naive_gemm(c, p, p, b);
        let mut out = c.to_vec();
        for r in 0..b {
            for col in 0..=r {
                out[r * b + col] = full[r * b + col];
            }
        }
        out
    }

    #[test]
    fn potf_examples() {
        let mut d = vec![4.0, 2.0, 2.0, 3.0];
        potf_block(&mut d, 2, 0).unwrap();
        assert_eq!(d[0], 2.0);
        assert_eq!(d[2], 1.0);
        assert!((d[3] - 2f64.sqrt()).abs() < 1e-15);
        // strict upper untouched
        assert_eq!(d[1], 2.0);

        let mut id = vec![1.0, 0.0, 0.0, 1.0];
        potf_block(&mut id, 2, 0).unwrap();
        assert_eq!(id, vec![1.0, 0.0, 0.0, 1.0]);

        let mut bad = vec![1.0, 2.0, 2.0, 1.0];
        assert!(matches!(
            potf_block(&mut bad, 2, 3),
            Err(SolverError::NotSpd { block_row: 3, pivot: 1 })
        ));
        let mut nan = vec![f64::NAN, 0.0, 0.0, 1.0];
        assert!(matches!(potf_block(&mut nan, 2, 0), Err(SolverError::NotSpd { pivot: 0, .. })));
    }

    #[test]
    fn potf_reconstructs_input() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for b in [1, 3, 8, 17] {
            let d = spd_block(&mut rng, b);
            let mut l = d.clone();
            potf_block(&mut l, b, 0).unwrap();
            let max = d.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            for p in 0..b {
                for q in 0..=p {
                    let mut s = 0.0;
                    for k in 0..=q {
                        s += l[p * b + k] * l[q * b + k];
                    }
                    assert!((s - d[p * b + q]).abs() <= 1e-12 * max);
                }
            }
        }
    }

    #[test]
    fn trsm_examples() {
        let s2 = 2f64.sqrt();
        let l = vec![2.0, 0.0, 1.0, s2];
        let mut x = vec![2.0, 0.0, 0.0, 2.0];
        trsm_block(&mut x, &l, 2).unwrap();
        // solved from X·Lᵀ = 2I row by row
        let expect = [1.0, -s2 / 2.0, 0.0, s2];
        for (a, e) in x.iter().zip(expect) {
            assert!((a - e).abs() < 1e-15, "{x:?}");
        }
        // X·Lᵀ = B by direct multiply
        for p in 0..2 {
            for q in 0..2 {
                let v: f64 = (0..=q).map(|k| x[p * 2 + k] * l[q * 2 + k]).sum();
                let b = if p == q { 2.0 } else { 0.0 };
                assert!((v - b).abs() < 1e-14);
            }
        }

        let id = vec![1.0, 0.0, 0.0, 1.0];
        let mut y = vec![3.0, -1.0, 0.5, 7.0];
        trsm_block(&mut y, &id, 2).unwrap();
        assert_eq!(y, vec![3.0, -1.0, 0.5, 7.0]);

        let mut z = vec![0.0; 4];
        trsm_block(&mut z, &l, 2).unwrap();
        assert_eq!(z, vec![0.0; 4]);

        let singular = vec![1.0, 0.0, 1.0, 0.0];
        assert!(matches!(
            trsm_block(&mut z, &singular, 2),
            Err(SolverError::SingularBlock { index: 1 })
        ));
    }

    #[test]
    fn trsm_residual_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for b in [4, 9, 16] {
            let mut l = spd_block(&mut rng, b);
            potf_block(&mut l, b, 0).unwrap();
            let rhs = random_block(&mut rng, b);
            let mut x = rhs.clone();
            trsm_block(&mut x, &l, b).unwrap();
            let maxb = rhs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let diag: Vec<f64> = (0..b).map(|i| l[i * b + i]).collect();
            let kappa = diag.iter().cloned().fold(0.0, f64::max) / diag.iter().cloned().fold(f64::MAX, f64::min);
            for p in 0..b {
                for q in 0..b {
                    let v: f64 = (0..=q).map(|k| x[p * b + k] * l[q * b + k]).sum();
                    assert!((v - rhs[p * b + q]).abs() <= 1e-12 * maxb * kappa.max(1.0) * b as f64);
                }
            }
        }
    }

    #[test]
    fn gemm_examples() {
        let mut c = vec![1.0, 2.0, 3.0, 4.0];
        gemm_update(&mut c, &[0.0; 4], &[5.0, 6.0, 7.0, 8.0], 2).unwrap();
        assert_eq!(c, vec![1.0, 2.0, 3.0, 4.0]);

        let id = [1.0, 0.0, 0.0, 1.0];
        let mut z = vec![0.0; 4];
        gemm_update(&mut z, &id, &id, 2).unwrap();
        assert_eq!(z, vec![-1.0, 0.0, 0.0, -1.0]);

        let mut c = vec![1.0, 0.0, 0.0, 1.0];
        gemm_update(&mut c, &[1.0, 2.0, 3.0, 4.0], &id, 2).unwrap();
        assert_eq!(c, vec![0.0, -2.0, -3.0, -3.0]);

        let mut inf = vec![0.0; 4];
        assert!(matches!(
            gemm_update(&mut inf, &[f64::INFINITY, 0.0, 0.0, 0.0], &id, 2),
            Err(SolverError::Numerical(_))
        ));
    }

    #[test]
    fn syrk_examples() {
        let mut c = vec![5.0, 9.0, 2.0, 5.0];
        syrk_update(&mut c, &[0.0; 4], 2).unwrap();
        assert_eq!(c, vec![5.0, 9.0, 2.0, 5.0]);

        let mut c = vec![2.0, 0.0, 0.0, 2.0];
        syrk_update(&mut c, &[1.0, 0.0, 0.0, 1.0], 2).unwrap();
        assert_eq!(c[0], 1.0);
        assert_eq!(c[2], 0.0);
        assert_eq!(c[3], 1.0);

        let mut c = vec![5.0, 99.0, 2.0, 5.0];
        syrk_update(&mut c, &[1.0, 1.0, 1.0, 1.0], 2).unwrap();
        assert_eq!(c, vec![3.0, 99.0, 0.0, 3.0]);
    }

    #[test]
    fn gemm_and_syrk_match_naive_bitwise() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for b in [1, 2, 3, 4, 5, 7, 8, 13, 32] {
            let c = random_block(&mut rng, b);
            let p = random_block(&mut rng, b);
            let q = random_block(&mut rng, b);
            let mut got = c.clone();
            gemm_update(&mut got, &p, &q, b).unwrap();
            assert_eq!(got, naive_gemm(&c, &p, &q, b), "gemm b={b}");
            let mut got = c.clone();
            syrk_update(&mut got, &p, b).unwrap();
            assert_eq!(got, naive_syrk(&c, &p, b), "syrk b={b}");
        }
    }

    #[test]
    fn symv_examples() {
        let a = BlockedSPDMatrix::from_dense(2, 1, &[2.0, 1.0, 1.0, 3.0]).unwrap();
        let x = BlockVector::from_slice(&[1.0, 1.0], 1).unwrap();
        assert_eq!(symv_range(&a, &x, 0..2).unwrap(), vec![3.0, 4.0]);
        assert!(symv_range(&a, &x, 0..0).unwrap().is_empty());
        assert!(matches!(
            symv_range(&a, &x, 1..3),
            Err(SolverError::RangeOutOfBounds { .. })
        ));

        let id = BlockedSPDMatrix::identity(10, 4).unwrap();
        let v: Vec<f64> = (0..10).map(|i| i as f64 * 0.5 - 1.0).collect();
        let xv = BlockVector::from_slice(&v, 4).unwrap();
        let y = symv_range(&id, &xv, 0..3).unwrap();
        assert_eq!(&y[..10], &v[..]);
        assert_eq!(&y[10..], &[0.0, 0.0]);
    }

    fn dense_matvec_ascending(a: &BlockedSPDMatrix, x: &[f64]) -> Vec<f64> {
        let n = a.padded_n();
        (0..n)
            .map(|p| {
                let mut s = 0.0;
                for q in 0..n {
                    s += a.padded_element(p, q) * x[q];
                }
                s
            })
            .collect()
    }

    #[test]
    fn symv_matches_dense_oracle_bitwise() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for (n, b) in [(1, 1), (7, 3), (16, 4), (37, 8), (64, 5)] {
            let vals: Vec<f64> = (0..n * n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let a = BlockedSPDMatrix::from_dense(n, b, &vals).unwrap();
            let xs: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let x = BlockVector::from_slice(&xs, b).unwrap();
            let y = symv_range(&a, &x, 0..a.block_rows()).unwrap();
            let oracle = dense_matvec_ascending(&a, x.padded());
            assert_eq!(y, oracle, "n={n} b={b}");
        }
    }

    #[test]
    fn dot_examples() {
        let mut e = vec![0.0; 6];
        e[4] = 1.0;
        let u = BlockVector::from_slice(&e, 4).unwrap();
        assert_eq!(dot_range(&u, &u, 0..2).unwrap(), 1.0);
        let a = BlockVector::from_slice(&[1.0, 2.0, 3.0], 1).unwrap();
        let b = BlockVector::from_slice(&[4.0, 5.0, 6.0], 1).unwrap();
        assert_eq!(dot_range(&a, &b, 0..3).unwrap(), 32.0);
    }

    #[test]
    fn axpy_xpay_examples() {
        let mut y = BlockVector::from_slice(&[1.0, 1.0], 1).unwrap();
        let x = BlockVector::from_slice(&[2.0, 4.0], 1).unwrap();
        axpy_range(&mut y, &x, 0.0, 0..2).unwrap();
        assert_eq!(y.values(), &[1.0, 1.0]);
        axpy_range(&mut y, &x, 0.5, 0..2).unwrap();
        assert_eq!(y.values(), &[2.0, 3.0]);

        let mut s = BlockVector::from_slice(&[9.0, 9.0, 9.0], 2).unwrap();
        let r = BlockVector::from_slice(&[1.0, 2.0, 3.0], 2).unwrap();
        xpay_range(&mut s, &r, 0.0, 0..2).unwrap();
        assert_eq!(s.values(), &[1.0, 2.0, 3.0]);
        assert_eq!(s.padded()[3], 0.0);
        // ranges do not reach outside their rows
        let mut y = BlockVector::from_slice(&[1.0, 1.0, 1.0, 1.0], 2).unwrap();
        let x = BlockVector::from_slice(&[1.0, 1.0, 1.0, 1.0], 2).unwrap();
        axpy_range(&mut y, &x, 1.0, 1..2).unwrap();
        assert_eq!(y.values(), &[1.0, 1.0, 2.0, 2.0]);
    }

    proptest! {
        #[test]
        fn dot_split_reproduces_full_range(vals in proptest::collection::vec(-1e3f64..1e3, 1..120), b in 1usize..9, split_seed in 0usize..1000) {
            let n = vals.len();
            let u = BlockVector::from_slice(&vals, b).unwrap();
            let w: Vec<f64> = vals.iter().map(|v| v.sin() * 3.0 + 0.1).collect();
            let v = BlockVector::from_slice(&w, b).unwrap();
            let nb = u.block_rows();
            let r = split_seed % (nb + 1);
            let full = dot_range(&u, &v, 0..nb).unwrap();
            let prefix = dot_range(&u, &v, 0..r).unwrap();
            let combined = dot_range_seeded(prefix, &u, &v, r..nb).unwrap();
            prop_assert_eq!(combined.to_bits(), full.to_bits());
            prop_assert!(n > 0);
        }

        #[test]
        fn symv_range_split_is_bitwise(n in 1usize..40, b in 1usize..7, seed in 0u64..1000, split_seed in 0usize..100) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = BlockedSPDMatrix::from_lower_fn(n, b, |_, _| rng.random_range(-1.0..1.0)).unwrap();
            let xs: Vec<f64> = (0..n).map(|i| (i as f64).cos()).collect();
            let x = BlockVector::from_slice(&xs, b).unwrap();
            let nb = a.block_rows();
            let r = split_seed % (nb + 1);
            let mut joined = symv_range(&a, &x, 0..r).unwrap();
            joined.extend(symv_range(&a, &x, r..nb).unwrap());
            prop_assert_eq!(joined, symv_range(&a, &x, 0..nb).unwrap());
        }
    }
}
