use std::sync::Arc;

use hpdg_core::hpspace::build_space;
use hpdg_core::{
    assemble_mass, assemble_sip, build_graded_mesh, smallest_eigenpair, EigOptions, PenaltyConfig, Potential,
};

fn problem() -> (hpdg_core::SymSparseMatrix, hpdg_core::SymSparseMatrix, Vec<f64>) {
    let mesh = Arc::new(build_graded_mesh(2, 0.5, 2).unwrap());
    let space = build_space(mesh, 2, 0.5).unwrap();
    let a = assemble_sip(&space, &Potential::attractive(1.0), &PenaltyConfig::default()).unwrap();
    let m = assemble_mass(&space);
    let x0 = space.constant(1.0).into_coeffs();
    (a, m, x0)
}

#[test]
fn shift_by_mass_moves_the_eigenvalue() {
    let (a, m, x0) = problem();
    let base = smallest_eigenpair(&a, &m, Some(&x0), &EigOptions::default()).unwrap();
    let shifted = smallest_eigenpair(&a.add_scaled(&m, 5.0).unwrap(), &m, Some(&x0), &EigOptions::default()).unwrap();
    assert!((shifted.lambda - base.lambda - 5.0).abs() < 1e-8 * shifted.lambda.abs());
    let overlap: f64 = m.form(&base.x, &shifted.x);
    assert!((overlap.abs() - 1.0).abs() < 1e-8);
}

#[test]
fn mass_against_itself_has_unit_spectrum() {
    let (_, m, x0) = problem();
    let r = smallest_eigenpair(&m, &m, Some(&x0), &EigOptions::default()).unwrap();
    assert!((r.lambda - 1.0).abs() < 1e-12);
}

#[test]
fn eigenpair_satisfies_the_residual_contract() {
    let (a, m, x0) = problem();
    let r = smallest_eigenpair(&a, &m, Some(&x0), &EigOptions::default()).unwrap();
    assert!((m.quad_form(&r.x) - 1.0).abs() < 1e-12);
    assert!(r.residual <= 1e-10);
    let ax = a.mul(&r.x);
    let mx = m.mul(&r.x);
    let res: f64 = ax.iter().zip(&mx).map(|(p, q)| (p - r.lambda * q).powi(2)).sum::<f64>().sqrt();
    let scale = ax.iter().map(|v| v * v).sum::<f64>().sqrt();
    assert!(res <= 1e-9 * scale);
    // The ground state does not change sign, so it never points away from the constant.
    assert!(m.form(&x0, &r.x) > 0.0);
}
