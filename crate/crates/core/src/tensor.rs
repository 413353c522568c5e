//! Sum-factorized kernels for tensor-product bases on tensor-product point
//! grids. Missing axes (d < 3) are padded with one mode and one point whose
//! table entry is `1`.
//!
//! Mode multi-index `(a0, a1, a2)` is stored at `a0 + m0 (a1 + m1 a2)`, and grid
//! points likewise at `q0 + n0 (q1 + n1 q2)`.

use alloc::vec;
use alloc::vec::Vec;

/// A 1D table `t[a * npts + q]`.
#[derive(Debug, Clone)]
pub(crate) struct Table {
    pub modes: usize,
    pub npts: usize,
    pub data: Vec<f64>,
}

impl Table {
    pub fn unit() -> Self {
        Table { modes: 1, npts: 1, data: vec![1.0] }
    }

    /// Legendre `P_a` (or `P_a'` when `deriv`) at reference points.
    pub fn legendre(p: usize, xi: &[f64], deriv: bool) -> Self {
        let modes = p + 1;
        let npts = xi.len();
        let mut data = vec![0.0; modes * npts];
        let mut v = vec![0.0; modes];
        let mut dv = vec![0.0; modes];
        for (q, &x) in xi.iter().enumerate() {
            crate::refelem::legendre_into(x, &mut v, &mut dv);
            for a in 0..modes {
                data[a * npts + q] = if deriv { dv[a] } else { v[a] };
            }
        }
        Table { modes, npts, data }
    }

    #[inline]
    pub fn at(&self, a: usize, q: usize) -> f64 {
        self.data[a * self.npts + q]
    }

    /// Row of pairwise products `t[a][q] t[b][q]`, pair index `a * modes + b`.
    pub fn pair_products(&self) -> Table {
        let m = self.modes;
        let n = self.npts;
        let mut data = vec![0.0; m * m * n];
        for a in 0..m {
            for b in 0..m {
                let row = &mut data[(a * m + b) * n..(a * m + b + 1) * n];
                for q in 0..n {
                    row[q] = self.data[a * n + q] * self.data[b * n + q];
                }
            }
        }
        Table { modes: m * m, npts: n, data }
    }
}

/// Values on the point grid of the expansion with coefficients `c`:
/// `out[q] = Σ_a c[a] Π_k t_k[a_k][q_k]`.
pub(crate) fn interpolate(t: [&Table; 3], c: &[f64]) -> Vec<f64> {
    let (m0, m1, m2) = (t[0].modes, t[1].modes, t[2].modes);
    let (n0, n1, n2) = (t[0].npts, t[1].npts, t[2].npts);
    debug_assert_eq!(c.len(), m0 * m1 * m2);
    let mut s0 = vec![0.0; n0 * m1 * m2];
    for r in 0..m1 * m2 {
        let cin = &c[r * m0..(r + 1) * m0];
        let out = &mut s0[r * n0..(r + 1) * n0];
        for (a0, &cv) in cin.iter().enumerate() {
            if cv == 0.0 {
                continue;
            }
            let row = &t[0].data[a0 * n0..(a0 + 1) * n0];
            for q0 in 0..n0 {
                out[q0] += cv * row[q0];
            }
        }
    }
    let mut s1 = vec![0.0; n0 * n1 * m2];
    for a2 in 0..m2 {
        for a1 in 0..m1 {
            let src = &s0[n0 * (a1 + m1 * a2)..n0 * (a1 + m1 * a2 + 1)];
            for q1 in 0..n1 {
                let w = t[1].at(a1, q1);
                let dst = &mut s1[n0 * (q1 + n1 * a2)..n0 * (q1 + n1 * a2 + 1)];
                for q0 in 0..n0 {
                    dst[q0] += w * src[q0];
                }
            }
        }
    }
    let mut out = vec![0.0; n0 * n1 * n2];
    let plane = n0 * n1;
    for a2 in 0..m2 {
        let src = &s1[plane * a2..plane * (a2 + 1)];
        for q2 in 0..n2 {
            let w = t[2].at(a2, q2);
            let dst = &mut out[plane * q2..plane * (q2 + 1)];
            for i in 0..plane {
                dst[i] += w * src[i];
            }
        }
    }
    out
}

/// Transpose of [`interpolate`]: `out[a] = Σ_q f[q] Π_k t_k[a_k][q_k]`.
pub(crate) fn integrate(t: [&Table; 3], f: &[f64]) -> Vec<f64> {
    let (m0, m1, m2) = (t[0].modes, t[1].modes, t[2].modes);
    let (n0, n1, n2) = (t[0].npts, t[1].npts, t[2].npts);
    debug_assert_eq!(f.len(), n0 * n1 * n2);
    // Contract q2 first: s2[q0 + n0 (q1 + n1 a2)].
    let plane = n0 * n1;
    let mut s2 = vec![0.0; plane * m2];
    for a2 in 0..m2 {
        let dst = &mut s2[plane * a2..plane * (a2 + 1)];
        for q2 in 0..n2 {
            let w = t[2].at(a2, q2);
            if w == 0.0 {
                continue;
            }
            let src = &f[plane * q2..plane * (q2 + 1)];
            for i in 0..plane {
                dst[i] += w * src[i];
            }
        }
    }
    // s1[q0 + n0 (a1 + m1 a2)]
    let mut s1 = vec![0.0; n0 * m1 * m2];
    for a2 in 0..m2 {
        for q1 in 0..n1 {
            let src = &s2[n0 * (q1 + n1 * a2)..n0 * (q1 + n1 * a2 + 1)];
            for a1 in 0..m1 {
                let w = t[1].at(a1, q1);
                let dst = &mut s1[n0 * (a1 + m1 * a2)..n0 * (a1 + m1 * a2 + 1)];
                for q0 in 0..n0 {
                    dst[q0] += w * src[q0];
                }
            }
        }
    }
    let mut out = vec![0.0; m0 * m1 * m2];
    for r in 0..m1 * m2 {
        let src = &s1[r * n0..(r + 1) * n0];
        for a0 in 0..m0 {
            let row = &t[0].data[a0 * n0..(a0 + 1) * n0];
            let mut s = 0.0;
            for q0 in 0..n0 {
                s += row[q0] * src[q0];
            }
            out[a0 + m0 * r] = s;
        }
    }
    out
}

/// Dense weighted mass block `B[a][b] = Σ_q w[q] φ_a(x_q) φ_b(x_q)` for the
/// tensor basis described by `t`, accumulated into `block` (row-major,
/// `nb × nb` with `nb = m0 m1 m2`).
pub(crate) fn add_weighted_mass(t: [&Table; 3], w: &[f64], block: &mut [f64]) {
    let pairs = [t[0].pair_products(), t[1].pair_products(), t[2].pair_products()];
    let g = integrate([&pairs[0], &pairs[1], &pairs[2]], w);
    let (m0, m1, m2) = (t[0].modes, t[1].modes, t[2].modes);
    let nb = m0 * m1 * m2;
    debug_assert_eq!(block.len(), nb * nb);
    // g index: (a0 m0 + b0) + m0² ((a1 m1 + b1) + m1² (a2 m2 + b2))
    for a2 in 0..m2 {
        for b2 in 0..m2 {
            for a1 in 0..m1 {
                for b1 in 0..m1 {
                    for a0 in 0..m0 {
                        let ia = a0 + m0 * (a1 + m1 * a2);
                        for b0 in 0..m0 {
                            let ib = b0 + m0 * (b1 + m1 * b2);
                            let gi = (a0 * m0 + b0)
                                + m0 * m0 * ((a1 * m1 + b1) + m1 * m1 * (a2 * m2 + b2));
                            block[ia * nb + ib] += g[gi];
                        }
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_interp(t: [&Table; 3], c: &[f64]) -> Vec<f64> {
        let (m0, m1, m2) = (t[0].modes, t[1].modes, t[2].modes);
        let (n0, n1, n2) = (t[0].npts, t[1].npts, t[2].npts);
        let mut out = vec![0.0; n0 * n1 * n2];
        for q2 in 0..n2 {
            for q1 in 0..n1 {
                for q0 in 0..n0 {
                    let mut s = 0.0;
                    for a2 in 0..m2 {
                        for a1 in 0..m1 {
                            for a0 in 0..m0 {
                                s += c[a0 + m0 * (a1 + m1 * a2)]
                                    * t[0].at(a0, q0)
                                    * t[1].at(a1, q1)
                                    * t[2].at(a2, q2);
                            }
                        }
                    }
                    out[q0 + n0 * (q1 + n1 * q2)] = s;
                }
            }
        }
        out
    }

    #[test]
    fn interpolate_and_integrate_match_brute_force() {
        let t0 = Table::legendre(3, &[-0.9, -0.2, 0.4, 0.8, 0.95], false);
        let t1 = Table::legendre(2, &[-0.5, 0.1, 0.7], true);
        let t2 = Table::legendre(1, &[-0.3, 0.6], false);
        let c: Vec<f64> = (0..24).map(|i| (i as f64 * 0.37).sin()).collect();
        let fast = interpolate([&t0, &t1, &t2], &c);
        let slow = brute_interp([&t0, &t1, &t2], &c);
        for (a, b) in fast.iter().zip(&slow) {
            assert!((a - b).abs() < 1e-13);
        }
        // <interp(c), f> == <c, integrate(f)>
        let f: Vec<f64> = (0..30).map(|i| (i as f64 * 0.11).cos()).collect();
        let g = integrate([&t0, &t1, &t2], &f);
        let lhs: f64 = fast.iter().zip(&f).map(|(a, b)| a * b).sum();
        let rhs: f64 = c.iter().zip(&g).map(|(a, b)| a * b).sum();
        assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn weighted_mass_matches_brute_force() {
        let t0 = Table::legendre(2, &[-0.7, 0.0, 0.7, 0.9], false);
        let t1 = Table::legendre(2, &[-0.8, -0.1, 0.5], false);
        let u = Table::unit();
        let w: Vec<f64> = (0..12).map(|i| 1.0 + 0.1 * i as f64).collect();
        let mut block = vec![0.0; 81];
        add_weighted_mass([&t0, &t1, &u], &w, &mut block);
        for a in 0..9 {
            for b in 0..9 {
                let mut s = 0.0;
                for q1 in 0..3 {
                    for q0 in 0..4 {
                        s += w[q0 + 4 * q1]
                            * t0.at(a % 3, q0)
                            * t1.at(a / 3, q1)
                            * t0.at(b % 3, q0)
                            * t1.at(b / 3, q1);
                    }
                }
                assert!((block[a * 9 + b] - s).abs() < 1e-13);
            }
        }
    }
}
