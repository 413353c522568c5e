//! Reference-interval machinery: Gauss-Legendre rules and the Legendre
//! polynomials used as the modal basis on `[-1, 1]`.
//!
//! Local spaces on a box are tensor products of `P_0..P_p` in each axis, so
//! everything the higher levels need reduces to the 1D tables built here.

use alloc::vec;
use alloc::vec::Vec;
use core::num::NonZeroUsize;

use crate::float;

const NEWTON_TOL: f64 = 1e-15;
const NEWTON_MAX_ITER: usize = 100;

/// An `n`-point Gauss-Legendre rule on `(-1, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadRule1D {
    points: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadRule1D {
    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Sum of `w_i f(x_i)`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    /// Nodes and weights mapped affinely onto `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let x = self.points.iter().map(|&t| mid + half * t).collect();
        let w = self.weights.iter().map(|&w| w * half).collect();
        (x, w)
    }
}

/// Gauss-Legendre rule with `n` points, by Newton iteration on `P_n` from
/// Chebyshev-type initial guesses.
pub fn gauss_rule(n: NonZeroUsize) -> QuadRule1D {
    let n = n.get();
    let mut points = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // i-th largest root.
        let mut x = float::cos(core::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5));
        let mut dp = 0.0;
        for _ in 0..NEWTON_MAX_ITER {
            let (p, d) = legendre_pair(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= NEWTON_TOL {
                break;
            }
        }
        let (_, d) = legendre_pair(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        points[n - 1 - i] = x;
        points[i] = -x;
        weights[n - 1 - i] = w;
        weights[i] = w;
    }
    if n % 2 == 1 {
        points[n / 2] = 0.0;
    }
    QuadRule1D { points, weights }
}

/// `gauss_rule` for call sites that already know `n >= 1`.
pub(crate) fn gauss(n: usize) -> QuadRule1D {
    gauss_rule(NonZeroUsize::new(n).expect("Gauss rule needs at least one point"))
}

/// `(P_n(x), P_n'(x))`.
fn legendre_pair(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    let mut d0 = 0.0;
    let mut d1 = 1.0;
    for k in 1..n {
        let kf = k as f64;
        let p2 = ((2.0 * kf + 1.0) * x * p1 - kf * p0) / (kf + 1.0);
        let d2 = d0 + (2.0 * kf + 1.0) * p1;
        p0 = p1;
        p1 = p2;
        d0 = d1;
        d1 = d2;
    }
    (p1, d1)
}

/// Values and first derivatives of `P_0..P_p` at `x`.
pub fn legendre_eval(p: usize, x: f64) -> (Vec<f64>, Vec<f64>) {
    let mut values = vec![0.0; p + 1];
    let mut derivs = vec![0.0; p + 1];
    legendre_into(x, &mut values, &mut derivs);
    (values, derivs)
}

/// Fills `values[k] = P_k(x)` and `derivs[k] = P_k'(x)` for `k < values.len()`.
pub(crate) fn legendre_into(x: f64, values: &mut [f64], derivs: &mut [f64]) {
    let n = values.len();
    if n == 0 {
        return;
    }
    values[0] = 1.0;
    derivs[0] = 0.0;
    if n == 1 {
        return;
    }
    values[1] = x;
    derivs[1] = 1.0;
    for k in 1..n - 1 {
        let kf = k as f64;
        values[k + 1] = ((2.0 * kf + 1.0) * x * values[k] - kf * values[k - 1]) / (kf + 1.0);
        derivs[k + 1] = derivs[k - 1] + (2.0 * kf + 1.0) * values[k];
    }
}

/// `P_k` and `P_k'` tabulated at a set of 1D points.
#[derive(Debug, Clone)]
pub struct RefBasis {
    degree: usize,
    npoints: usize,
    values: Vec<f64>,
    derivs: Vec<f64>,
}

impl RefBasis {
    pub fn tabulate(degree: usize, points: &[f64]) -> Self {
        let nb = degree + 1;
        let mut values = vec![0.0; nb * points.len()];
        let mut derivs = vec![0.0; nb * points.len()];
        let mut v = vec![0.0; nb];
        let mut d = vec![0.0; nb];
        for (q, &x) in points.iter().enumerate() {
            legendre_into(x, &mut v, &mut d);
            for k in 0..nb {
                values[k * points.len() + q] = v[k];
                derivs[k * points.len() + q] = d[k];
            }
        }
        RefBasis { degree, npoints: points.len(), values, derivs }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn npoints(&self) -> usize {
        self.npoints
    }

    /// `P_k` at every tabulated point.
    pub fn values(&self, k: usize) -> &[f64] {
        &self.values[k * self.npoints..(k + 1) * self.npoints]
    }

    /// `P_k'` at every tabulated point.
    pub fn derivs(&self, k: usize) -> &[f64] {
        &self.derivs[k * self.npoints..(k + 1) * self.npoints]
    }
}

/// `∫_{-1}^{1} P_k^2 = 2 / (2k + 1)`.
#[inline]
pub fn legendre_norm_sq(k: usize) -> f64 {
    2.0 / (2.0 * k as f64 + 1.0)
}

/// `∫_{-1}^{1} P_a' P_b'`, which is `min(a,b) (min(a,b) + 1)` when `a + b` is
/// even and zero otherwise.
#[inline]
pub fn legendre_stiffness(a: usize, b: usize) -> f64 {
    if (a + b) % 2 == 1 {
        return 0.0;
    }
    let m = a.min(b) as f64;
    m * (m + 1.0)
}

/// `P_k(-1) = (-1)^k`, `P_k(1) = 1`.
#[inline]
pub(crate) fn legendre_at_end(k: usize, upper: bool) -> f64 {
    if upper || k.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// `P_k'(1) = k(k+1)/2`, `P_k'(-1) = (-1)^(k+1) k(k+1)/2`.
#[inline]
pub(crate) fn legendre_deriv_at_end(k: usize, upper: bool) -> f64 {
    let v = 0.5 * (k * (k + 1)) as f64;
    if upper || k % 2 == 1 {
        v
    } else {
        -v
    }
}
