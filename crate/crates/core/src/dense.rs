//! Small row-major dense kernels.

use alloc::vec;
use alloc::vec::Vec;

use crate::float;

/// In-place Cholesky of the `n × n` symmetric matrix `a`; only the lower
/// triangle is read and the factor overwrites it. Returns the first
/// non-positive pivot as `Err((index, value))`.
pub(crate) fn cholesky_in_place(a: &mut [f64], n: usize) -> Result<(), (usize, f64)> {
    for j in 0..n {
        let (head, tail) = a.split_at_mut(j * n);
        let row_j = &mut tail[..n];
        // Row j of L, left of the diagonal.
        for k in 0..j {
            let row_k = &head[k * n..k * n + k + 1];
            let mut s = row_j[k];
            for m in 0..k {
                s -= row_j[m] * row_k[m];
            }
            row_j[k] = s / row_k[k];
        }
        let mut dj = row_j[j];
        for m in 0..j {
            dj -= row_j[m] * row_j[m];
        }
        if !(dj > 0.0) {
            return Err((j, dj));
        }
        row_j[j] = float::sqrt(dj);
        for v in row_j[j + 1..].iter_mut() {
            *v = 0.0;
        }
    }
    Ok(())
}

/// Overwrites the `r × m` block `b` with `b L^-T`, for lower-triangular `l` (`m × m`).
pub(crate) fn right_solve_lower_t(l: &[f64], m: usize, b: &mut [f64], r: usize) {
    for row in 0..r {
        let x = &mut b[row * m..(row + 1) * m];
        for j in 0..m {
            let lj = &l[j * m..j * m + j + 1];
            let mut s = x[j];
            for k in 0..j {
                s -= x[k] * lj[k];
            }
            x[j] = s / lj[j];
        }
    }
}

/// Dot product with four independent accumulators.
#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    let (a, b) = (&a[..n], &b[..n]);
    let mut acc = [0.0; 4];
    let mut ca = a.chunks_exact(4);
    let mut cb = b.chunks_exact(4);
    for (x, y) in (&mut ca).zip(&mut cb) {
        acc[0] += x[0] * y[0];
        acc[1] += x[1] * y[1];
        acc[2] += x[2] * y[2];
        acc[3] += x[3] * y[3];
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for (x, y) in ca.remainder().iter().zip(cb.remainder()) {
        s += x * y;
    }
    s
}

/// `c -= a bᵀ` with `a: r × m`, `b: s × m`, `c: r × s`.
pub(crate) fn sub_abt(c: &mut [f64], a: &[f64], b: &[f64], r: usize, s: usize, m: usize) {
    for i in 0..r {
        let ai = &a[i * m..(i + 1) * m];
        let ci = &mut c[i * s..(i + 1) * s];
        for j in 0..s {
            ci[j] -= dot(ai, &b[j * m..(j + 1) * m]);
        }
    }
}

/// Solves `L y = x` in place.
pub(crate) fn forward_lower(l: &[f64], m: usize, x: &mut [f64]) {
    for j in 0..m {
        let lj = &l[j * m..j * m + j + 1];
        let mut s = x[j];
        for k in 0..j {
            s -= lj[k] * x[k];
        }
        x[j] = s / lj[j];
    }
}

/// Solves `Lᵀ y = x` in place.
pub(crate) fn backward_lower_t(l: &[f64], m: usize, x: &mut [f64]) {
    for j in (0..m).rev() {
        x[j] /= l[j * m + j];
        let xj = x[j];
        for k in 0..j {
            x[k] -= l[j * m + k] * xj;
        }
    }
}

/// Eigen-decomposition of a small symmetric matrix by cyclic Jacobi
/// rotations. Returns eigenvalues ascending and the matching eigenvectors as
/// columns of a row-major `n × n` matrix.
pub(crate) fn sym_eigen(a: &[f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut m = a.to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    for _sweep in 0..100 {
        let mut off = 0.0;
        let mut diag = 0.0;
        for i in 0..n {
            diag += m[i * n + i] * m[i * n + i];
            for j in i + 1..n {
                off += m[i * n + j] * m[i * n + j];
            }
        }
        if off <= 1e-32 * diag || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = m[p * n + p];
                let aqq = m[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + float::sqrt(theta * theta + 1.0));
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / float::sqrt(t * t + 1.0);
                let s = t * c;
                for k in 0..n {
                    let mkp = m[k * n + p];
                    let mkq = m[k * n + q];
                    m[k * n + p] = c * mkp - s * mkq;
                    m[k * n + q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[p * n + k];
                    let mqk = m[q * n + k];
                    m[p * n + k] = c * mpk - s * mqk;
                    m[q * n + k] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[i * n + i].total_cmp(&m[j * n + j]));
    let vals = order.iter().map(|&i| m[i * n + i]).collect();
    let mut vecs = vec![0.0; n * n];
    for (new, &old) in order.iter().enumerate() {
        for k in 0..n {
            vecs[k * n + new] = v[k * n + old];
        }
    }
    (vals, vecs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cholesky_solves() {
        let a = [4.0, 2.0, 0.4, 2.0, 5.0, 1.0, 0.4, 1.0, 3.0];
        let mut l = a;
        cholesky_in_place(&mut l, 3).unwrap();
        let mut x = [1.0, 2.0, 3.0];
        forward_lower(&l, 3, &mut x);
        backward_lower_t(&l, 3, &mut x);
        for i in 0..3 {
            let r: f64 = (0..3).map(|j| a[i * 3 + j] * x[j]).sum();
            assert!((r - [1.0, 2.0, 3.0][i]).abs() < 1e-14);
        }
        let mut bad = [1.0, 2.0, 2.0, 1.0];
        assert!(cholesky_in_place(&mut bad, 2).is_err());
    }

    #[test]
    fn jacobi_eigen() {
        let a = [2.0, -1.0, 0.0, -1.0, 2.0, -1.0, 0.0, -1.0, 2.0];
        let (vals, vecs) = sym_eigen(&a, 3);
        let s2 = 2f64.sqrt();
        let expect = [2.0 - s2, 2.0, 2.0 + s2];
        for k in 0..3 {
            assert!((vals[k] - expect[k]).abs() < 1e-13);
            for i in 0..3 {
                let av: f64 = (0..3).map(|j| a[i * 3 + j] * vecs[j * 3 + k]).sum();
                assert!((av - vals[k] * vecs[i * 3 + k]).abs() < 1e-13);
            }
        }
    }
}
