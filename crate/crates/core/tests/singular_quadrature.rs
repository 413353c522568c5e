mod common;

use hpdg_core::quadrature::{element_rule, singular_depth, singular_rule, singular_rule_1d, POTENTIAL_EXTRA_POINTS};
use hpdg_core::build_graded_mesh;

fn radius(x: &[f64; 3], d: usize) -> f64 {
    (0..d).map(|k| x[k] * x[k]).sum::<f64>().sqrt()
}

#[test]
fn oracle_matches_closed_form_in_2d() {
    // ∫_{[0,1]^2} 1/r = 2 asinh(1).
    let exact = 2.0 * 1f64.asinh();
    assert!((common::corner_cube_integral(2, 1.0, 1.0) - exact).abs() < 1e-12);
}

#[test]
fn corner_elements_match_oracle() {
    for d in [2, 3] {
        let mesh = build_graded_mesh(d, 0.5, 3).unwrap();
        for alpha in [0.5, 1.0, 1.5] {
            for el in mesh.elements.iter().filter(|e| e.touches_c) {
                let oracle = common::corner_cube_integral(d, alpha, el.h);
                for p in [1, 3, 6] {
                    let rule =
                        singular_rule(el, d, &mesh.center, p + POTENTIAL_EXTRA_POINTS, singular_depth(p), alpha).unwrap();
                    let got = rule.integrate(|x| radius(x, d).powf(-alpha));
                    let rel = ((got - oracle) / oracle).abs();
                    assert!(rel < 1e-8, "d {d} alpha {alpha} p {p}: rel {rel:e}");
                }
            }
        }
    }
}

#[test]
fn smooth_factor_is_integrated_accurately() {
    // ∫_0^1 x^-1/2 (1 + x)^2 dx = 2 + 4/3 + 2/5.
    let r = singular_rule_1d(10, 20, 0.5).unwrap();
    let got = r.integrate(|x| x[0].powf(-0.5) * (1.0 + x[0]).powi(2));
    assert!((got - (2.0 + 4.0 / 3.0 + 0.4)).abs() < 1e-8);
}

#[test]
fn elements_away_from_the_vertex_use_plain_tensor_rules() {
    let mesh = build_graded_mesh(2, 0.5, 2).unwrap();
    let far = mesh.elements.iter().find(|e| !e.touches_c).unwrap();
    let rule = element_rule(far, 2, 4);
    assert_eq!(rule.len(), 16);
    assert!((rule.integrate(|_| 1.0) - far.measure(2)).abs() < 1e-15);
}
