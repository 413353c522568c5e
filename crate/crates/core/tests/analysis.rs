use std::sync::Arc;

use hpdg_core::analysis::{dg_error_parts, error_norms, Abscissa, ErrorColumn};
use hpdg_core::hpspace::build_space;
use hpdg_core::mesh::BoxSpec;
use hpdg_core::{build_graded_mesh, fit_exponential, ConvergenceRecord, FaceKind, GradedMesh, HpSpace};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn unit_square() -> Arc<HpSpace> {
    let boxes = [BoxSpec { lower: [-0.5, -0.5, 0.0], size: [1.0, 1.0, 0.0], layer: 0 }];
    build_space(Arc::new(GradedMesh::from_boxes(2, &boxes).unwrap()), 1, 0.0).unwrap()
}

fn halves() -> Arc<HpSpace> {
    let boxes = [
        BoxSpec { lower: [-0.5, -0.5, 0.0], size: [0.5, 1.0, 0.0], layer: 0 },
        BoxSpec { lower: [0.0, -0.5, 0.0], size: [0.5, 1.0, 0.0], layer: 0 },
    ];
    build_space(Arc::new(GradedMesh::from_boxes(2, &boxes).unwrap()), 1, 0.0).unwrap()
}

#[test]
fn identical_fields_have_zero_error() {
    let mesh = Arc::new(build_graded_mesh(2, 0.5, 2).unwrap());
    let space = build_space(mesh, 2, 0.5).unwrap();
    let f = space.project(|x| (3.0 * x[0]).sin() * x[1], 2);
    let e = error_norms(&f, &f).unwrap();
    assert_eq!((e.l2, e.dg, e.linf), (0.0, 0.0, 0.0));
}

#[test]
fn constant_offset_on_nested_meshes() {
    let coarse = build_space(Arc::new(build_graded_mesh(2, 0.5, 1).unwrap()), 2, 0.0).unwrap();
    let fine = build_space(Arc::new(build_graded_mesh(2, 0.5, 3).unwrap()), 3, 0.0).unwrap();
    let e = error_norms(&coarse.constant(0.0), &fine.constant(1.0)).unwrap();
    assert!((e.l2 - 1.0).abs() < 1e-13);
    assert!((e.linf - 1.0).abs() < 1e-13);
    // The gradient vanishes and interior jumps cancel; only the boundary penalty remains.
    assert!(e.dg_parts.interior_jump < 1e-26);
    assert!((e.dg_parts.volume - 1.0).abs() < 1e-13);
}

#[test]
fn linear_field_on_one_element_matches_closed_form() {
    let space = unit_square();
    let zero = space.constant(0.0);
    let x = space.project(|p| p[0], 1);
    let e = error_norms(&zero, &x).unwrap();
    // ∫x² = 1/12, ∫|∇x|² = 1, boundary ∫x² = 1/4 + 1/4 + 1/12 + 1/12 with p = h = 1.
    assert!((e.l2 - 1.0 / 12f64.sqrt()).abs() < 1e-14);
    assert!((e.linf - 0.5).abs() < 1e-14);
    assert!((e.dg - (1.0 / 12.0 + 1.0 + 2.0 / 3.0f64).sqrt()).abs() < 1e-13);
}

#[test]
fn penalty_part_of_a_single_jump() {
    let space = halves();
    let step = space.field(vec![0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0]).unwrap();
    let parts = dg_error_parts(&space.constant(0.0), &step).unwrap();
    let mesh = space.mesh();
    let interior = mesh.faces.iter().find(|f| f.kind == FaceKind::Interior).unwrap();
    let p_e = space.face_degree(interior) as f64;
    assert!((parts.interior_jump - p_e * p_e / interior.h_e * interior.measure(2)).abs() < 1e-13);
    let boundary: f64 = mesh
        .faces
        .iter()
        .filter(|f| f.kind == FaceKind::Boundary && f.minus == 1)
        .map(|f| (space.face_degree(f) as f64).powi(2) / f.h_e * f.measure(2))
        .sum();
    assert!((parts.boundary_jump - boundary).abs() < 1e-13);
    assert!((parts.volume - 0.5).abs() < 1e-14);
}

#[test]
fn norms_are_ordered_and_satisfy_the_triangle_inequality() {
    let coarse = build_space(Arc::new(build_graded_mesh(2, 0.5, 1).unwrap()), 1, 0.0).unwrap();
    let fine = build_space(Arc::new(build_graded_mesh(2, 0.5, 3).unwrap()), 3, 0.0).unwrap();
    let g = |x: &[f64; 3]| (x[0] * x[0] + x[1] * x[1]).sqrt();
    let h = |x: &[f64; 3]| (2.0 * x[0]).cos() + x[1];
    let (gc, hf) = (coarse.project(g, 3), fine.project(h, 3));
    let zero_c = coarse.constant(0.0);
    let ab = error_norms(&gc, &hf).unwrap();
    let a0 = error_norms(&gc, &fine.constant(0.0)).unwrap();
    let b0 = error_norms(&zero_c, &hf).unwrap();
    assert!(ab.l2 <= ab.dg);
    assert!(ab.l2 <= ab.linf + 1e-14);
    assert!(ab.dg <= a0.dg + b0.dg + 1e-12);
    assert!(ab.l2 <= a0.l2 + b0.l2 + 1e-12);
}

fn records(errors: &[f64]) -> Vec<ConvergenceRecord> {
    errors
        .iter()
        .enumerate()
        .map(|(i, &e)| ConvergenceRecord {
            ell: i + 1,
            ndofs: 10 * (i + 1) * (i + 1),
            lambda: 1.0,
            err_l2: e,
            err_dg: e,
            err_linf: e,
            err_lambda: e,
        })
        .collect()
}

#[test]
fn fitted_rate_ignores_a_common_scale() {
    let errors: Vec<f64> = (1..=6).map(|l| 0.3 * (-0.7 * l as f64).exp() * (1.0 + 0.1 * (l as f64).sin())).collect();
    let scaled: Vec<f64> = errors.iter().map(|e| 1e3 * e).collect();
    let a = fit_exponential(&records(&errors), ErrorColumn::Dg, Abscissa::Level).unwrap();
    let b = fit_exponential(&records(&scaled), ErrorColumn::Dg, Abscissa::Level).unwrap();
    assert!((a.b - b.b).abs() < 1e-12);
    assert!((a.r2 - b.r2).abs() < 1e-12);
    assert!((b.c / a.c - 1e3).abs() < 1e-9);
}

#[test]
fn noisy_data_recovers_the_rate() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let errors: Vec<f64> =
        (1..=8).map(|l| 2.0 * (-0.9 * l as f64).exp() * (1.0 + 0.01 * rng.random_range(-1.0..1.0))).collect();
    let fit = fit_exponential(&records(&errors), ErrorColumn::L2, Abscissa::Level).unwrap();
    assert!((fit.b - 0.9).abs() < 0.01, "b = {}", fit.b);
    assert!(fit.r2 > 0.999);
}

#[test]
fn dof_root_abscissa() {
    // N = 8 ℓ³ makes N^(1/(d+1)) = 2ℓ in 2D, halving the rate per level.
    let mut rs = records(&(1..=5).map(|l| (-0.5 * l as f64).exp()).collect::<Vec<_>>());
    rs.iter_mut().for_each(|r| r.ndofs = 8 * r.ell.pow(3));
    let fit = fit_exponential(&rs, ErrorColumn::Lambda, Abscissa::DofRoot(2)).unwrap();
    assert!((fit.b - 0.25).abs() < 1e-12, "b = {}", fit.b);
}
