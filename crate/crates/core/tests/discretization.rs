use std::sync::Arc;

use hpdg_core::hpspace::build_space;
use hpdg_core::mesh::BoxSpec;
use hpdg_core::{
    assemble_mass, assemble_sip, build_graded_mesh, smallest_eigenpair, EigOptions, GradedMesh, PenaltyConfig,
    Potential,
};

/// Exact `∫_{-1/2}^{1/2} q(x) dx` for a polynomial given by ascending coefficients.
fn poly_integral(q: &[f64]) -> f64 {
    q.iter()
        .enumerate()
        .map(|(k, c)| {
            let e = k as u32 + 1;
            c * (0.5f64.powi(e as i32) - (-0.5f64).powi(e as i32)) / e as f64
        })
        .sum()
}

fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// `∫ |∇v|²` for `v = b(x) b(y)` with `b = 1/4 - t²`, by exact polynomial algebra.
fn bubble_energy() -> f64 {
    let b = [0.25, 0.0, -1.0];
    let db = [0.0, -2.0];
    2.0 * poly_integral(&poly_mul(&db, &db)) * poly_integral(&poly_mul(&b, &b))
}

fn bubble(x: &[f64; 3]) -> f64 {
    (0.25 - x[0] * x[0]) * (0.25 - x[1] * x[1])
}

#[test]
fn bubble_energy_oracle_is_one_over_45() {
    assert!((bubble_energy() - 1.0 / 45.0).abs() < 1e-15);
}

#[test]
fn patch_test_on_graded_meshes() {
    let expect = bubble_energy();
    for ell in [0, 2, 4] {
        for p0 in [2, 3] {
            let mesh = Arc::new(build_graded_mesh(2, 0.5, ell).unwrap());
            let space = build_space(mesh, p0, 0.5).unwrap();
            let a = assemble_sip(&space, &Potential::zero(), &PenaltyConfig::default()).unwrap();
            let v = space.project(bubble, 2);
            let e = a.quad_form(v.coeffs());
            assert!((e - expect).abs() < 1e-10, "ell {ell} p0 {p0}: {e}");
        }
    }
}

#[test]
fn patch_test_with_anisotropic_ratio() {
    let expect = bubble_energy();
    let mesh = Arc::new(build_graded_mesh(2, 0.3, 3).unwrap());
    let space = build_space(mesh, 2, 0.25).unwrap();
    let a = assemble_sip(&space, &Potential::zero(), &PenaltyConfig::default()).unwrap();
    let v = space.project(bubble, 2);
    assert!((a.quad_form(v.coeffs()) - expect).abs() < 1e-10);
}

#[test]
fn hanging_face_patch() {
    // One big box next to two halves: a single 1-irregular interface.
    let boxes = [
        BoxSpec { lower: [-0.5, -0.5, 0.0], size: [0.5, 1.0, 0.0], layer: 0 },
        BoxSpec { lower: [0.0, -0.5, 0.0], size: [0.5, 0.5, 0.0], layer: 1 },
        BoxSpec { lower: [0.0, 0.0, 0.0], size: [0.5, 0.5, 0.0], layer: 1 },
    ];
    let mesh = Arc::new(GradedMesh::from_boxes(2, &boxes).unwrap());
    let space = build_space(mesh, 2, 0.0).unwrap();
    let a = assemble_sip(&space, &Potential::zero(), &PenaltyConfig::default()).unwrap();
    let v = space.project(bubble, 2);
    assert!((a.quad_form(v.coeffs()) - bubble_energy()).abs() < 1e-12);
    assert!(a.symmetry_defect() < 1e-13);
}

#[test]
fn sip_matrix_is_symmetric_and_mass_is_exact() {
    let mesh = Arc::new(build_graded_mesh(3, 0.5, 2).unwrap());
    let space = build_space(mesh, 2, 0.5).unwrap();
    let a = assemble_sip(&space, &Potential::attractive(0.5), &PenaltyConfig::default()).unwrap();
    assert!(a.symmetry_defect() < 1e-12);
    let m = assemble_mass(&space);
    let one = space.constant(1.0);
    assert!((m.quad_form(one.coeffs()) - 1.0).abs() < 1e-14);
    let f = space.project(|x| x[0] + 2.0 * x[1] * x[2], 1);
    // ∫ (x + 2yz)² = 1/12 + 4/144
    assert!((m.quad_form(f.coeffs()) - (1.0 / 12.0 + 4.0 / 144.0)).abs() < 1e-14);
}

#[test]
fn laplacian_ground_state_on_the_unit_square() {
    let mesh = Arc::new(build_graded_mesh(2, 0.5, 3).unwrap());
    let space = build_space(mesh, 3, 0.0).unwrap();
    let a = assemble_sip(&space, &Potential::zero(), &PenaltyConfig::default()).unwrap();
    let m = assemble_mass(&space);
    let r = smallest_eigenpair(&a, &m, None, &EigOptions::default()).unwrap();
    let exact = 2.0 * std::f64::consts::PI.powi(2);
    assert!(((r.lambda - exact) / exact).abs() < 1e-6, "{}", r.lambda);
}

#[test]
fn potential_rejects_nonintegrable_exponent() {
    let mesh = Arc::new(build_graded_mesh(2, 0.5, 1).unwrap());
    let space = build_space(mesh, 1, 0.0).unwrap();
    assert!(assemble_sip(&space, &Potential::attractive(2.0), &PenaltyConfig::default()).is_err());
}
