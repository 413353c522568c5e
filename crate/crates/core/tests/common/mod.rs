//! Independent reference values shared by the integration tests.
#![allow(dead_code)]

/// Adaptive Simpson on `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn step<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
        }
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    step(f, a, b, fa, fm, fb, whole, tol, 40)
}

/// `∫_{[0,1]^(d-1)} (1 + |u|²)^(-α/2) du` by (nested) adaptive Simpson.
fn face_integral(d: usize, alpha: f64, tol: f64) -> f64 {
    let g = |s: f64| (1.0 + s).powf(-0.5 * alpha);
    match d {
        2 => adaptive_simpson(&|u: f64| g(u * u), 0.0, 1.0, tol),
        3 => adaptive_simpson(&|u: f64| adaptive_simpson(&|v: f64| g(u * u + v * v), 0.0, 1.0, tol), 0.0, 1.0, tol),
        _ => panic!("dimension {d}"),
    }
}

/// `∫_{[0,L]^d} |x|^-α dx`.
///
/// The cube splits into `d` congruent pyramids over its far faces; on each,
/// `x = t (1, u)` with `t ∈ (0, L)`, `u ∈ (0,1)^(d-1)` turns the radial part
/// into `∫ t^(d-1-α) dt`, leaving a smooth face integral. Two tolerances are
/// compared as a convergence check.
pub fn corner_cube_integral(d: usize, alpha: f64, edge: f64) -> f64 {
    let fine = face_integral(d, alpha, 1e-14);
    let coarse = face_integral(d, alpha, 1e-11);
    assert!((fine - coarse).abs() <= 1e-10 * fine, "oracle not converged");
    d as f64 / (d as f64 - alpha) * edge.powf(d as f64 - alpha) * fine
}
