//! Text formats written by the driver. Floats are printed with `{:.16e}` so
//! that identical runs give byte-identical files.

use std::fmt::Write as _;
use std::sync::Arc;

use anyhow::{bail, Context};
use hpdg_core::analysis::{Abscissa, ErrorColumn, FitResult};
use hpdg_core::{build_graded_mesh, ConvergenceRecord, DegreeRounding, FaceKind, GradedMesh, HpSpace, SymSparseMatrix};

pub const CSV_HEADER: &str = "ell,N,lambda,err_l2,err_dg,err_linf,err_lambda";

pub fn convergence_csv(records: &[ConvergenceRecord]) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for r in records {
        writeln!(
            s,
            "{},{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            r.ell, r.ndofs, r.lambda, r.err_l2, r.err_dg, r.err_linf, r.err_lambda
        )
        .unwrap();
    }
    s
}

/// Inverse of [`convergence_csv`].
pub fn parse_convergence_csv(text: &str) -> anyhow::Result<Vec<ConvergenceRecord>> {
    let mut lines = text.lines();
    if lines.next() != Some(CSV_HEADER) {
        bail!("unexpected CSV header");
    }
    lines
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            if f.len() != 7 {
                bail!("expected 7 fields in {l:?}");
            }
            let num = |i: usize| f[i].parse::<f64>().with_context(|| format!("field {i} of {l:?}"));
            Ok(ConvergenceRecord {
                ell: f[0].parse()?,
                ndofs: f[1].parse()?,
                lambda: num(2)?,
                err_l2: num(3)?,
                err_dg: num(4)?,
                err_linf: num(5)?,
                err_lambda: num(6)?,
            })
        })
        .collect()
}

/// One `column abscissa b C r2` line per fit; failed fits print `nan`.
pub fn fit_lines(fits: &[(ErrorColumn, Abscissa, Option<FitResult>)]) -> String {
    let mut s = String::new();
    for (col, abs, fit) in fits {
        match fit {
            Some(f) => writeln!(s, "{} {} {:.16e} {:.16e} {:.16e}", col.name(), abs.name(), f.b, f.c, f.r2),
            None => writeln!(s, "{} {} nan nan nan", col.name(), abs.name()),
        }
        .unwrap();
    }
    s
}

/// Two-column `ell error` data for one norm.
pub fn error_dat(records: &[ConvergenceRecord], column: ErrorColumn) -> String {
    let mut s = format!("# ell {}\n", column.name());
    for r in records {
        writeln!(s, "{} {:.16e}", r.ell, r.error(column)).unwrap();
    }
    s
}

/// `k lambda residual`, one line per nonlinear step.
pub fn scf_log(lambdas: &[f64], residuals: &[f64]) -> String {
    let mut s = String::from("# k lambda residual\n");
    for (k, (l, r)) in lambdas.iter().zip(residuals).enumerate() {
        writeln!(s, "{} {:.16e} {:.16e}", k + 1, l, r).unwrap();
    }
    s
}

/// Elements as `id layer lower... h`, then faces as
/// `kind minus plus axis lower... upper...` (`plus` is `-` on the boundary).
pub fn mesh_dump(mesh: &GradedMesh) -> String {
    let d = mesh.d;
    let mut s = format!("# elements {} faces {} d {} sigma {} levels {}\n", mesh.len(), mesh.faces.len(), d, mesh.sigma, mesh.levels);
    for el in &mesh.elements {
        write!(s, "E {} {}", el.id, el.layer).unwrap();
        for k in 0..d {
            write!(s, " {:.16e}", el.lower[k]).unwrap();
        }
        for k in 0..d {
            write!(s, " {:.16e}", el.size[k]).unwrap();
        }
        writeln!(s, " {:.16e}", el.h).unwrap();
    }
    for f in &mesh.faces {
        let kind = match f.kind {
            FaceKind::Interior => "I",
            FaceKind::Boundary => "B",
        };
        let plus = f.plus.map_or("-".to_string(), |p| p.to_string());
        write!(s, "F {kind} {} {plus} {}", f.minus, f.axis).unwrap();
        for k in 0..d {
            write!(s, " {:.16e}", f.lower[k]).unwrap();
        }
        for k in 0..d {
            write!(s, " {:.16e}", f.upper[k]).unwrap();
        }
        writeln!(s).unwrap();
    }
    s
}

/// Lower triangle as `i j value`.
pub fn matrix_dump(a: &SymSparseMatrix) -> String {
    let mut s = format!("# n {}\n", a.n());
    for (i, j, v) in a.lower_triplets() {
        writeln!(s, "{i} {j} {v:.16e}").unwrap();
    }
    s
}

/// Everything needed to rebuild the space of a stored field.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldHeader {
    pub dim: usize,
    pub sigma: f64,
    pub levels: usize,
    pub p0: usize,
    pub slope: f64,
    pub rounding: DegreeRounding,
    pub ndofs: usize,
}

impl FieldHeader {
    pub fn of(space: &HpSpace) -> Self {
        let mesh = space.mesh();
        FieldHeader {
            dim: mesh.d,
            sigma: mesh.sigma,
            levels: mesh.levels,
            p0: space.p0(),
            slope: space.slope(),
            rounding: space.rounding(),
            ndofs: space.ndofs(),
        }
    }

    pub fn build_space(&self) -> anyhow::Result<Arc<HpSpace>> {
        let mesh = Arc::new(build_graded_mesh(self.dim, self.sigma, self.levels)?);
        let space = HpSpace::new(mesh, self.p0, self.slope, self.rounding)?;
        if space.ndofs() != self.ndofs {
            bail!("stored field has {} coefficients, rebuilt space {}", self.ndofs, space.ndofs());
        }
        Ok(Arc::new(space))
    }
}

fn rounding_name(r: DegreeRounding) -> &'static str {
    match r {
        DegreeRounding::HalfUp => "half-up",
        DegreeRounding::Floor => "floor",
        DegreeRounding::Ceil => "ceil",
    }
}

pub fn write_field(header: &FieldHeader, coeffs: &[f64]) -> String {
    let mut s = String::from("hpdg-field 1\n");
    writeln!(
        s,
        "{} {:.16e} {} {} {:.16e} {} {}",
        header.dim,
        header.sigma,
        header.levels,
        header.p0,
        header.slope,
        rounding_name(header.rounding),
        header.ndofs
    )
    .unwrap();
    for c in coeffs {
        writeln!(s, "{c:.16e}").unwrap();
    }
    s
}

pub fn read_field(text: &str) -> anyhow::Result<(FieldHeader, Vec<f64>)> {
    let mut lines = text.lines();
    if lines.next() != Some("hpdg-field 1") {
        bail!("not a field file");
    }
    let head: Vec<&str> = lines.next().context("missing header")?.split_whitespace().collect();
    if head.len() != 7 {
        bail!("malformed field header");
    }
    let header = FieldHeader {
        dim: head[0].parse()?,
        sigma: head[1].parse()?,
        levels: head[2].parse()?,
        p0: head[3].parse()?,
        slope: head[4].parse()?,
        rounding: crate::config::parse_rounding(head[5]).map_err(anyhow::Error::msg)?,
        ndofs: head[6].parse()?,
    };
    let coeffs: Vec<f64> = lines.filter(|l| !l.is_empty()).map(str::parse).collect::<Result<_, _>>()?;
    if coeffs.len() != header.ndofs {
        bail!("expected {} coefficients, found {}", header.ndofs, coeffs.len());
    }
    Ok((header, coeffs))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip() {
        let r = ConvergenceRecord { ell: 2, ndofs: 90, lambda: 15.25, err_l2: 1e-3, err_dg: 2e-2, err_linf: 3e-3, err_lambda: 4e-5 };
        let text = convergence_csv(&[r]);
        assert!(text.starts_with("ell,N,lambda,err_l2,err_dg,err_linf,err_lambda\n2,90,"));
        assert_eq!(parse_convergence_csv(&text).unwrap(), vec![r]);
    }

    #[test]
    fn field_round_trip() {
        let mesh = Arc::new(build_graded_mesh(2, 0.5, 2).unwrap());
        let space = Arc::new(HpSpace::new(mesh, 2, 0.5, DegreeRounding::HalfUp).unwrap());
        let f = space.project(|x| x[0] - x[1] * x[1], 1);
        let text = write_field(&FieldHeader::of(&space), f.coeffs());
        let (h, c) = read_field(&text).unwrap();
        assert_eq!(h, FieldHeader::of(&space));
        assert_eq!(c, f.coeffs());
        assert_eq!(h.build_space().unwrap().ndofs(), space.ndofs());
    }

    #[test]
    fn scf_log_lines() {
        assert_eq!(scf_log(&[1.0], &[0.5]), "# k lambda residual\n1 1.0000000000000000e0 5.0000000000000000e-1\n");
    }
}
