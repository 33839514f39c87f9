//! Reference computations for the integration tests. Nothing here calls into
//! the solver code; inputs come in as dense row-major arrays.

#![allow(dead_code)]

use hetspd::BlockedSPDMatrix;

/// Unblocked scalar Cholesky–Crout, dense row-major lower factor.
pub fn crout(a: &[f64], n: usize) -> Vec<f64> {
    let mut l = vec![0.0; n * n];
    for p in 0..n {
        for q in 0..=p {
            let mut s = 0.0;
            for k in 0..q {
                s += l[p * n + k] * l[q * n + k];
            }
            l[p * n + q] = if p == q {
                (a[p * n + p] - s).sqrt()
            } else {
                (a[p * n + q] - s) / l[q * n + q]
            };
        }
    }
    l
}

/// Gaussian elimination with partial pivoting on a dense copy.
pub fn gauss_solve(a: &[f64], rhs: &[f64], n: usize) -> Vec<f64> {
    let mut m = a.to_vec();
    let mut x = rhs.to_vec();
    for c in 0..n {
        let piv = (c..n)
            .max_by(|&i, &j| m[i * n + c].abs().total_cmp(&m[j * n + c].abs()))
            .unwrap();
        if piv != c {
            for k in 0..n {
                m.swap(c * n + k, piv * n + k);
            }
            x.swap(c, piv);
        }
        for r in c + 1..n {
            let f = m[r * n + c] / m[c * n + c];
            for k in c..n {
                m[r * n + k] -= f * m[c * n + k];
            }
            x[r] -= f * x[c];
        }
    }
    for r in (0..n).rev() {
        let mut s = x[r];
        for k in r + 1..n {
            s -= m[r * n + k] * x[k];
        }
        x[r] = s / m[r * n + r];
    }
    x
}

/// `‖A − L·Lᵀ‖_F / ‖A‖_F` from dense arrays; `l` is lower triangular.
///
/// Rows of `L` are transposed into columns once so the inner products run over
/// contiguous memory with four independent partial sums.
pub fn relative_reconstruction_error(a: &[f64], l: &[f64], n: usize) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for p in 0..n {
        let lp = &l[p * n..p * n + p + 1];
        for q in 0..=p {
            let lq = &l[q * n..q * n + q + 1];
            let m = q + 1;
            let mut acc = [0.0f64; 4];
            let chunks = m / 4;
            for c in 0..chunks {
                for t in 0..4 {
                    acc[t] += lp[4 * c + t] * lq[4 * c + t];
                }
            }
            let mut s = acc[0] + acc[1] + acc[2] + acc[3];
            for k in 4 * chunks..m {
                s += lp[k] * lq[k];
            }
            let d = a[p * n + q] - s;
            let w = if p == q { 1.0 } else { 2.0 };
            num += w * d * d;
            den += w * a[p * n + q] * a[p * n + q];
        }
    }
    (num / den).sqrt()
}

pub fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// `rhs − A·x` with a dense symmetric `A`.
pub fn residual(a: &[f64], x: &[f64], rhs: &[f64], n: usize) -> Vec<f64> {
    (0..n)
        .map(|p| rhs[p] - (0..n).map(|q| a[p * n + q] * x[q]).sum::<f64>())
        .collect()
}

/// Every element of the lower triangle, read one by one through `element`.
pub fn lower_of(m: &BlockedSPDMatrix) -> Vec<f64> {
    let n = m.n();
    let mut out = vec![0.0; n * n];
    for p in 0..n {
        for q in 0..=p {
            out[p * n + q] = m.element(p, q).unwrap();
        }
    }
    out
}

pub fn bits(v: &[f64]) -> Vec<u64> {
    v.iter().map(|x| x.to_bits()).collect()
}
