//! Smallest eigenpair of `A x = λ M x` for symmetric `A` and SPD `M`.
//!
//! A shift `σ` is lowered until `A_P - σM` admits a Cholesky factorization,
//! which certifies `σ < λ_min(A_P)`. A Davidson iteration then expands an
//! M-orthonormal search space by `(A_P - σM)^-1 r` for the current residual
//! `r` and extracts the smallest Ritz pair of `A`. With `A_P = A` the search
//! space is the shift-invert Krylov space; with a nearby `A_P` (a previous
//! nonlinear step) the factorization acts as a preconditioner and is reused.

use alloc::vec;
use alloc::vec::Vec;

use crate::cholesky::BlockCholesky;
use crate::dense;
use crate::float;
use crate::sparse::SymSparseMatrix;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct EigOptions {
    /// Relative residual `‖Ax - λMx‖ / (‖Ax‖ + |λ| ‖Mx‖)` to reach.
    pub tol: f64,
    /// Search-space expansions.
    pub max_iter: usize,
    /// Search-space size before a restart.
    pub krylov_dim: usize,
    /// Initial shift; by default `min(x0ᵀAx0 / x0ᵀMx0 - 10, 0)`.
    pub shift: Option<f64>,
    /// The sign of the result is chosen so that `referenceᵀ M x >= 0`; without
    /// one, so that the coefficient sum is nonnegative.
    pub reference: Option<Vec<f64>>,
}

impl Default for EigOptions {
    fn default() -> Self {
        EigOptions { tol: 1e-10, max_iter: 500, krylov_dim: 24, shift: None, reference: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigResult {
    pub lambda: f64,
    /// M-normalized eigenvector.
    pub x: Vec<f64>,
    /// Relative residual of the returned pair.
    pub residual: f64,
    /// Search-space expansions used.
    pub iterations: usize,
    /// Shift of the factorization that was used.
    pub shift: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    dense::dot(a, b)
}

fn norm(a: &[f64]) -> f64 {
    float::sqrt(dot(a, a))
}

/// Cholesky factorization of `A - σM` for some `σ` below the spectrum of `A`.
#[derive(Debug, Clone)]
pub struct ShiftedFactor {
    shift: f64,
    factor: BlockCholesky,
}

impl ShiftedFactor {
    /// Factors `A - σM`, lowering `σ` with doubling steps until it succeeds.
    pub fn below(a: &SymSparseMatrix, m: &SymSparseMatrix, sigma: f64) -> Result<Self> {
        if !sigma.is_finite() {
            return Err(Error::InvalidParameter { name: "shift", reason: "must be finite" });
        }
        let mut sigma = sigma;
        let mut step = 1.0f64.max(1e-3 * sigma.abs());
        for _ in 0..200 {
            let shifted = a.add_scaled(m, -sigma)?;
            match BlockCholesky::factor(&shifted) {
                Ok(factor) => return Ok(ShiftedFactor { shift: sigma, factor }),
                Err(Error::NotPositiveDefinite { .. }) => {
                    sigma -= step;
                    step *= 2.0;
                }
                Err(e) => return Err(e),
            }
        }
        Err(Error::InvalidParameter { name: "shift", reason: "no shift below the spectrum found" })
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    pub fn n(&self) -> usize {
        self.factor.n()
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        self.factor.solve(b)
    }
}

/// Default starting shift for the start vector `x0`.
pub fn default_shift(a: &SymSparseMatrix, m: &SymSparseMatrix, x0: &[f64]) -> f64 {
    let rq = a.quad_form(x0) / m.quad_form(x0);
    (rq - 10.0).min(0.0)
}

fn start_vector(a: &SymSparseMatrix, m: &SymSparseMatrix, x0: Option<&[f64]>) -> Result<Vec<f64>> {
    let n = a.n();
    if m.n() != n {
        return Err(Error::DimensionMismatch { expected: n, found: m.n() });
    }
    if n == 0 {
        return Err(Error::InvalidParameter { name: "matrix", reason: "empty" });
    }
    a.check_finite()?;
    m.check_finite()?;
    let x = match x0 {
        Some(v) if v.len() == n => v.to_vec(),
        Some(v) => return Err(Error::DimensionMismatch { expected: n, found: v.len() }),
        None => vec![1.0; n],
    };
    if !(m.quad_form(&x) > 0.0) {
        return Err(Error::InvalidParameter { name: "x0", reason: "start vector has no M-norm" });
    }
    Ok(x)
}

/// Computes the smallest eigenpair, starting from `x0` (or the all-ones
/// vector) and factoring `A` itself.
pub fn smallest_eigenpair(
    a: &SymSparseMatrix,
    m: &SymSparseMatrix,
    x0: Option<&[f64]>,
    opts: &EigOptions,
) -> Result<EigResult> {
    let x = start_vector(a, m, x0)?;
    let sigma = opts.shift.unwrap_or_else(|| default_shift(a, m, &x));
    let pre = ShiftedFactor::below(a, m, sigma)?;
    smallest_eigenpair_with(a, m, Some(&x), opts, &pre)
}

/// As [`smallest_eigenpair`], but with a given factorization of a nearby
/// shifted operator.
pub fn smallest_eigenpair_with(
    a: &SymSparseMatrix,
    m: &SymSparseMatrix,
    x0: Option<&[f64]>,
    opts: &EigOptions,
    pre: &ShiftedFactor,
) -> Result<EigResult> {
    let n = a.n();
    let x = start_vector(a, m, x0)?;
    if pre.n() != n {
        return Err(Error::DimensionMismatch { expected: n, found: pre.n() });
    }
    if !(opts.tol > 0.0) || opts.krylov_dim < 2 {
        return Err(Error::InvalidParameter { name: "tol", reason: "tolerance must be positive, basis at least 2" });
    }
    let kmax = opts.krylov_dim.min(n).max(1);
    let mut v: Vec<Vec<f64>> = Vec::with_capacity(kmax);
    let mut av: Vec<Vec<f64>> = Vec::with_capacity(kmax);
    let mut mv: Vec<Vec<f64>> = Vec::with_capacity(kmax);
    let mut t = x;
    let mut lambda = f64::NAN;
    let mut residual = f64::INFINITY;
    let mut y = vec![0.0; n];
    for iter in 1..=opts.max_iter {
        if !expand(m, &mut v, &mut mv, &mut t) {
            // Residual direction already in the space: use a plain
            // shift-invert step instead.
            t = pre.solve(&m.mul(&y));
            if !expand(m, &mut v, &mut mv, &mut t) {
                break;
            }
        }
        av.push(a.mul(v.last().expect("just pushed")));
        let k = v.len();
        let mut h = vec![0.0; k * k];
        for i in 0..k {
            for j in 0..=i {
                let val = 0.5 * (dot(&v[i], &av[j]) + dot(&v[j], &av[i]));
                h[i * k + j] = val;
                h[j * k + i] = val;
            }
        }
        let (vals, vecs) = dense::sym_eigen(&h, k);
        lambda = vals[0];
        let combine = |basis: &[Vec<f64>], col: usize| {
            let mut out = vec![0.0; n];
            for (j, b) in basis.iter().enumerate() {
                let c = vecs[j * k + col];
                out.iter_mut().zip(b).for_each(|(o, bi)| *o += c * bi);
            }
            out
        };
        y = combine(&v, 0);
        let ay = combine(&av, 0);
        let my = combine(&mv, 0);
        let r: Vec<f64> = ay.iter().zip(&my).map(|(p, q)| p - lambda * q).collect();
        residual = norm(&r) / (norm(&ay) + lambda.abs() * norm(&my)).max(f64::MIN_POSITIVE);
        if residual <= opts.tol {
            canonicalize(m, &mut y, opts.reference.as_deref());
            return Ok(EigResult { lambda, x: y, residual, iterations: iter, shift: pre.shift() });
        }
        if k >= kmax {
            // Thick restart on the two lowest Ritz vectors.
            let keep = 2.min(k);
            let nv: Vec<Vec<f64>> = (0..keep).map(|c| combine(&v, c)).collect();
            let na: Vec<Vec<f64>> = (0..keep).map(|c| combine(&av, c)).collect();
            let nm: Vec<Vec<f64>> = (0..keep).map(|c| combine(&mv, c)).collect();
            v = nv;
            av = na;
            mv = nm;
        }
        t = pre.solve(&r);
    }
    canonicalize(m, &mut y, opts.reference.as_deref());
    Err(Error::EigNotConverged { lambda, residual, iterate: y })
}

/// M-orthogonalizes `t` against `v` (twice) and appends it; `false` when
/// nothing of `t` is left.
fn expand(m: &SymSparseMatrix, v: &mut Vec<Vec<f64>>, mv: &mut Vec<Vec<f64>>, t: &mut [f64]) -> bool {
    let before = float::sqrt(m.quad_form(t));
    if !(before > 0.0 && before.is_finite()) {
        return false;
    }
    for _pass in 0..2 {
        for (b, mb) in v.iter().zip(mv.iter()) {
            let c = dot(mb, t);
            t.iter_mut().zip(b).for_each(|(ti, bi)| *ti -= c * bi);
        }
    }
    let mt = m.mul(t);
    let nt = dot(t, &mt);
    if !(nt > 0.0) || float::sqrt(nt) <= 1e-10 * before {
        return false;
    }
    let inv = 1.0 / float::sqrt(nt);
    v.push(t.iter().map(|x| x * inv).collect());
    mv.push(mt.iter().map(|x| x * inv).collect());
    true
}

fn canonicalize(m: &SymSparseMatrix, x: &mut [f64], reference: Option<&[f64]>) {
    let s = match reference {
        Some(r) if r.len() == x.len() => m.form(r, x),
        _ => x.iter().sum(),
    };
    if s < 0.0 {
        x.iter_mut().for_each(|v| *v = -*v);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_problem() {
        let a = SymSparseMatrix::from_diagonal(&[3.0, 1.0, 2.0]);
        let m = SymSparseMatrix::from_diagonal(&[1.0, 1.0, 1.0]);
        let r = smallest_eigenpair(&a, &m, None, &EigOptions::default()).unwrap();
        assert!((r.lambda - 1.0).abs() < 1e-12);
        assert!((r.x[1] - 1.0).abs() < 1e-10);
        assert!(r.shift < 1.0);
    }

    #[test]
    fn high_initial_shift_is_lowered() {
        let a = SymSparseMatrix::from_diagonal(&[3.0, 1.0, 2.0, 5.0]);
        let m = SymSparseMatrix::from_diagonal(&[1.0, 2.0, 1.0, 1.0]);
        let opts = EigOptions { shift: Some(1e3), ..EigOptions::default() };
        let r = smallest_eigenpair(&a, &m, None, &opts).unwrap();
        assert!((r.lambda - 0.5).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_input() {
        let a = SymSparseMatrix::from_diagonal(&[1.0, 2.0]);
        let m = SymSparseMatrix::from_diagonal(&[1.0]);
        assert!(smallest_eigenpair(&a, &m, None, &EigOptions::default()).is_err());
    }
}
