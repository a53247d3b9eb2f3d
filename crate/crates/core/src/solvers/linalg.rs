//! Small dense kernels. Matrices are stored column-major as `Vec<Vec<f64>>`
//! (one inner vector per column) where that is the natural access pattern.

use alloc::vec;
use alloc::vec::Vec;

/// Least-squares solution of `min |A y - b|` by Householder QR with column
/// pivoting. `a` holds the columns of `A` back to back, each of length
/// `b.len()`; both buffers are overwritten. Columns whose pivot falls below
/// `rank_tol * |R_11|` are set to zero, which yields a basic solution for
/// rank-deficient systems.
pub(crate) fn lstsq(a: &mut [f64], b: &mut [f64], rank_tol: f64) -> Vec<f64> {
    let m = b.len();
    if a.is_empty() {
        return Vec::new();
    }
    let n = a.len() / m;
    let mut perm: Vec<usize> = (0..n).collect();
    let mut norms: Vec<f64> = a.chunks_exact(m).map(|c| dot(c, c)).collect();
    let mut rank = 0;
    let mut r00 = 0.0;
    for k in 0..n.min(m) {
        // pivot on the largest remaining column norm
        let mut piv = k;
        for j in k + 1..n {
            if norms[j] > norms[piv] {
                piv = j;
            }
        }
        if piv != k {
            for i in 0..m {
                a.swap(k * m + i, piv * m + i);
            }
            norms.swap(k, piv);
            perm.swap(k, piv);
        }
        let (head, tail) = a.split_at_mut((k + 1) * m);
        let v = &mut head[k * m + k..];
        let alpha = libm::sqrt(dot(v, v));
        if k == 0 {
            r00 = alpha;
        }
        if alpha <= rank_tol * r00 || alpha == 0.0 {
            break;
        }
        rank = k + 1;
        // the Householder vector lives in column k until the reflection is applied
        let sign = if v[0] >= 0.0 { 1.0 } else { -1.0 };
        v[0] += sign * alpha;
        let vnorm_sq = dot(v, v);
        for (j, col) in tail.chunks_exact_mut(m).enumerate() {
            reflect(v, vnorm_sq, &mut col[k..]);
            norms[k + 1 + j] = col[k + 1..].iter().map(|x| x * x).sum();
        }
        reflect(v, vnorm_sq, &mut b[k..]);
        v[0] = -sign * alpha;
    }
    // back substitution on the leading rank x rank block
    let mut y = vec![0.0; n];
    for i in (0..rank).rev() {
        let mut s = b[i];
        for j in i + 1..rank {
            s -= a[j * m + i] * y[j];
        }
        y[i] = s / a[i * m + i];
    }
    let mut out = vec![0.0; n];
    for (i, &p) in perm.iter().enumerate() {
        out[p] = y[i];
    }
    out
}

fn reflect(v: &[f64], vnorm_sq: f64, x: &mut [f64]) {
    let s = 2.0 * dot(v, x) / vnorm_sq;
    for (xi, vi) in x.iter_mut().zip(v) {
        *xi -= s * vi;
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Solve a square system (row-major) by Gaussian elimination with partial
/// pivoting. Returns `None` when the matrix is numerically singular.
pub(crate) fn solve_square(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for k in 0..n {
        let piv = (k..n).max_by(|&i, &j| a[i][k].abs().partial_cmp(&a[j][k].abs()).unwrap())?;
        if a[piv][k].abs() < 1e-300 {
            return None;
        }
        a.swap(k, piv);
        b.swap(k, piv);
        for i in k + 1..n {
            let f = a[i][k] / a[k][k];
            if f != 0.0 {
                for j in k..n {
                    a[i][j] -= f * a[k][j];
                }
                b[i] -= f * b[k];
            }
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = b[i];
        for j in i + 1..n {
            s -= a[i][j] * x[j];
        }
        x[i] = s / a[i][i];
    }
    Some(x)
}
