//! Errors against a nested reference solution and exponential rate fits.
//!
//! All norms are integrated on the reference mesh: every reference element
//! lies inside exactly one coarse element, whose polynomial is evaluated
//! (with its analytic gradient) at the reference quadrature points.

use alloc::vec::Vec;

use crate::float;
use crate::hpspace::{parent_map, DiscreteField};
use crate::mesh::{Face, FaceKind};
use crate::quadrature::{element_rule, face_rule};
use crate::{Error, Point, Result};

/// Extra Gauss points beyond the larger of the two degrees.
const ERROR_EXTRA_POINTS: usize = 2;

/// One row of a convergence table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRecord {
    pub ell: usize,
    pub ndofs: usize,
    pub lambda: f64,
    pub err_l2: f64,
    pub err_dg: f64,
    pub err_linf: f64,
    pub err_lambda: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorColumn {
    L2,
    Dg,
    Linf,
    Lambda,
}

impl ErrorColumn {
    pub const ALL: [ErrorColumn; 4] = [ErrorColumn::L2, ErrorColumn::Dg, ErrorColumn::Linf, ErrorColumn::Lambda];

    /// CSV column name.
    pub fn name(self) -> &'static str {
        match self {
            ErrorColumn::L2 => "err_l2",
            ErrorColumn::Dg => "err_dg",
            ErrorColumn::Linf => "err_linf",
            ErrorColumn::Lambda => "err_lambda",
        }
    }
}

impl ConvergenceRecord {
    pub fn error(&self, column: ErrorColumn) -> f64 {
        match column {
            ErrorColumn::L2 => self.err_l2,
            ErrorColumn::Dg => self.err_dg,
            ErrorColumn::Linf => self.err_linf,
            ErrorColumn::Lambda => self.err_lambda,
        }
    }
}

/// Abscissa of an exponential fit `err ≈ C exp(-b x)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Abscissa {
    /// `x = ℓ`.
    Level,
    /// `x = N^(1/(d+1))` in dimension `d`.
    DofRoot(usize),
}

impl Abscissa {
    pub fn name(self) -> &'static str {
        match self {
            Abscissa::Level => "ell",
            Abscissa::DofRoot(_) => "N_root",
        }
    }

    pub fn value(self, r: &ConvergenceRecord) -> f64 {
        match self {
            Abscissa::Level => r.ell as f64,
            Abscissa::DofRoot(d) => float::powf(r.ndofs as f64, 1.0 / (d as f64 + 1.0)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitResult {
    pub b: f64,
    pub c: f64,
    pub r2: f64,
    pub abscissa: Abscissa,
    /// Rows that entered the fit.
    pub rows: usize,
}

/// Errors at or below this are treated as the algebraic plateau and dropped.
pub const FIT_FLOOR: f64 = 1e-12;

/// Least-squares fit of `log err = log C - b x`.
pub fn fit_exponential(records: &[ConvergenceRecord], column: ErrorColumn, abscissa: Abscissa) -> Result<FitResult> {
    let pts: Vec<(f64, f64)> = records
        .iter()
        .filter(|r| r.error(column) > FIT_FLOOR && r.error(column).is_finite())
        .map(|r| (abscissa.value(r), float::ln(r.error(column))))
        .collect();
    if pts.len() < 3 {
        return Err(Error::TooFewRows(pts.len()));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if !(sxx > 0.0) {
        return Err(Error::InvalidParameter { name: "abscissa", reason: "all rows share one abscissa" });
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = pts.iter().map(|p| (p.1 - my) * (p.1 - my)).sum();
    let ss_res: f64 = pts.iter().map(|p| {
        let e = p.1 - (intercept + slope * p.0);
        e * e
    }).sum();
    let r2 = if ss_tot <= 1e-300 { 1.0 } else { (1.0 - ss_res / ss_tot).clamp(0.0, 1.0) };
    Ok(FitResult { b: -slope, c: float::exp(intercept), r2, abscissa, rows: pts.len() })
}

/// Squared contributions to the DG error norm.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DgErrorParts {
    /// `Σ_K ‖e‖² + ‖∇e‖²`.
    pub volume: f64,
    /// `Σ_{interior e} p_e²/h_e ‖[e]‖²`.
    pub interior_jump: f64,
    /// Same over boundary faces.
    pub boundary_jump: f64,
}

impl DgErrorParts {
    pub fn total(&self) -> f64 {
        self.volume + self.interior_jump + self.boundary_jump
    }
}

/// All error norms of one coarse solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorNorms {
    pub l2: f64,
    pub dg: f64,
    pub linf: f64,
    pub dg_parts: DgErrorParts,
}

struct Difference<'a> {
    coarse: &'a DiscreteField,
    reference: &'a DiscreteField,
    parents: Vec<usize>,
}

impl<'a> Difference<'a> {
    fn new(coarse: &'a DiscreteField, reference: &'a DiscreteField) -> Result<Self> {
        let parents = parent_map(coarse.space().mesh(), reference.space().mesh())?;
        Ok(Difference { coarse, reference, parents })
    }

    /// `e` and `∇e` using reference element `el`'s side.
    fn at(&self, el: usize, x: &Point) -> (f64, Point) {
        let (vc, gc) = self.coarse.value_grad_in(self.parents[el], x);
        let (vr, gr) = self.reference.value_grad_in(el, x);
        (vc - vr, [gc[0] - gr[0], gc[1] - gr[1], gc[2] - gr[2]])
    }

    fn points(&self, el: usize) -> usize {
        let pf = self.reference.space().degree(el);
        let pc = self.coarse.space().degree(self.parents[el]);
        pf.max(pc) + ERROR_EXTRA_POINTS
    }

    fn face_points(&self, face: &Face) -> usize {
        face.owners().map(|k| self.points(k)).max().unwrap_or(ERROR_EXTRA_POINTS)
    }
}

/// L², DG and L∞ norms of `coarse - reference` in one pass.
pub fn error_norms(coarse: &DiscreteField, reference: &DiscreteField) -> Result<ErrorNorms> {
    let diff = Difference::new(coarse, reference)?;
    let space = reference.space();
    let mesh = space.mesh();
    let d = mesh.d;
    let mut l2 = 0.0;
    let mut h1 = 0.0;
    let mut linf: f64 = 0.0;
    for el in &mesh.elements {
        let rule = element_rule(el, d, diff.points(el.id));
        for cell in &rule.cells {
            cell.for_each(|x, w| {
                let (e, g) = diff.at(el.id, &x);
                l2 += w * e * e;
                h1 += w * (g[0] * g[0] + g[1] * g[1] + g[2] * g[2]);
                linf = linf.max(e.abs());
            });
        }
        for corner in 0..(1usize << d) {
            let mut x = el.lower;
            for k in 0..d {
                if corner >> k & 1 == 1 {
                    x[k] = el.upper(k);
                }
            }
            linf = linf.max(diff.at(el.id, &x).0.abs());
        }
    }
    let mut parts = DgErrorParts { volume: l2 + h1, ..DgErrorParts::default() };
    for face in &mesh.faces {
        let pe = space.face_degree(face) as f64;
        let weight = pe * pe / face.h_e;
        let jump = face_jump_sq(&diff, face, d);
        match face.kind {
            FaceKind::Interior => parts.interior_jump += weight * jump,
            FaceKind::Boundary => parts.boundary_jump += weight * jump,
        }
    }
    Ok(ErrorNorms { l2: float::sqrt(l2), dg: float::sqrt(parts.total()), linf, dg_parts: parts })
}

fn face_jump_sq(diff: &Difference<'_>, face: &Face, d: usize) -> f64 {
    let cell = face_rule(face, d, diff.face_points(face));
    let mut s = 0.0;
    cell.for_each(|x, w| {
        let j = match (face.kind, face.plus) {
            (FaceKind::Interior, Some(plus)) => diff.at(face.minus, &x).0 - diff.at(plus, &x).0,
            _ => diff.at(face.minus, &x).0,
        };
        s += w * j * j;
    });
    s
}

pub fn l2_error(coarse: &DiscreteField, reference: &DiscreteField) -> Result<f64> {
    error_norms(coarse, reference).map(|e| e.l2)
}

pub fn linf_error(coarse: &DiscreteField, reference: &DiscreteField) -> Result<f64> {
    error_norms(coarse, reference).map(|e| e.linf)
}

pub fn dg_error(coarse: &DiscreteField, reference: &DiscreteField) -> Result<f64> {
    error_norms(coarse, reference).map(|e| e.dg)
}

pub fn dg_error_parts(coarse: &DiscreteField, reference: &DiscreteField) -> Result<DgErrorParts> {
    error_norms(coarse, reference).map(|e| e.dg_parts)
}

/// DG error augmented by `Σ_e p_e^-2 ‖r^(1/2) ⟨∇e⟩·n‖²`, with `r` the
/// distance to the singular point. Diagnostic only.
pub fn full_dg_error(coarse: &DiscreteField, reference: &DiscreteField) -> Result<f64> {
    let base = error_norms(coarse, reference)?;
    let diff = Difference::new(coarse, reference)?;
    let space = reference.space();
    let mesh = space.mesh();
    let d = mesh.d;
    let c = mesh.center;
    let mut extra = 0.0;
    for face in &mesh.faces {
        let pe = space.face_degree(face) as f64;
        let cell = face_rule(face, d, diff.face_points(face));
        let k = face.axis;
        let mut s = 0.0;
        cell.for_each(|x, w| {
            let avg = match face.plus {
                Some(plus) => 0.5 * (diff.at(face.minus, &x).1[k] + diff.at(plus, &x).1[k]),
                None => diff.at(face.minus, &x).1[k],
            };
            let r = float::sqrt((0..d).map(|i| (x[i] - c[i]) * (x[i] - c[i])).sum());
            s += w * r * avg * avg;
        });
        extra += s / (pe * pe);
    }
    Ok(float::sqrt(base.dg * base.dg + extra))
}

/// `|λ - λ_ref|`.
pub fn eigenvalue_error(lambda: f64, reference: f64) -> f64 {
    (lambda - reference).abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(ell: usize, e: f64) -> ConvergenceRecord {
        ConvergenceRecord { ell, ndofs: 10 * (ell + 1), lambda: 1.0, err_l2: e, err_dg: e, err_linf: e, err_lambda: e }
    }

    #[test]
    fn exact_exponential_data() {
        let rows: Vec<_> = (1..=6).map(|l| rec(l, 3.0 * (-0.7 * l as f64).exp())).collect();
        let f = fit_exponential(&rows, ErrorColumn::Dg, Abscissa::Level).unwrap();
        assert!((f.b - 0.7).abs() < 1e-10);
        assert!((f.c - 3.0).abs() < 1e-10);
        assert!((f.r2 - 1.0).abs() < 1e-10);
    }

    #[test]
    fn constant_errors_and_floor() {
        let rows: Vec<_> = (1..=4).map(|l| rec(l, 0.25)).collect();
        let f = fit_exponential(&rows, ErrorColumn::L2, Abscissa::Level).unwrap();
        assert!(f.b.abs() < 1e-14);
        assert_eq!(f.r2, 1.0);
        let mut rows: Vec<_> = (1..=4).map(|l| rec(l, 0.5f64.powi(l as i32))).collect();
        rows[2].err_l2 = 1e-13;
        rows[3].err_l2 = 0.0;
        assert_eq!(fit_exponential(&rows, ErrorColumn::L2, Abscissa::Level), Err(Error::TooFewRows(2)));
    }
}
