//! Physical quadrature on elements and faces.
//!
//! Every rule is a union of tensor-product cells so that the sum-factorized
//! kernels apply cell by cell. Elements with the singular point as a vertex
//! get a composite rule graded toward it: level `l` covers the shell between
//! the sub-boxes of relative size `2^-l` and `2^-(l+1)`, and the innermost box
//! of relative size `2^-depth` is collapsed to one point at its centre whose
//! weight carries the exact value of `∫ r^-α` over that box. This makes the
//! rule exact (up to the shell Gauss error) for `r^-α` times a constant; for
//! `r^-α` times a smooth function the error decays like `2^-depth`.

use alloc::vec;
use alloc::vec::Vec;

use crate::float;
use crate::mesh::{Element, Face};
use crate::refelem::gauss;
use crate::{Error, Point, Result};

/// Extra Gauss points (beyond `p`) for volume terms with the potential.
pub const POTENTIAL_EXTRA_POINTS: usize = 8;
/// Extra Gauss points for the nonlinear mass term.
pub const NONLINEAR_EXTRA_POINTS: usize = 4;
/// Extra Gauss points on faces.
pub const FACE_EXTRA_POINTS: usize = 4;

/// Composite depth used for a local degree `p`.
pub fn singular_depth(p: usize) -> usize {
    20usize.max(2 * p)
}

/// Tensor-product cell: per-axis physical nodes and weights. Axes beyond the
/// dimension hold a single node with weight `1`.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorCell {
    pub nodes: [Vec<f64>; 3],
    pub weights: [Vec<f64>; 3],
}

impl TensorCell {
    pub fn len(&self) -> usize {
        self.nodes.iter().map(Vec::len).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn shape(&self) -> [usize; 3] {
        [self.nodes[0].len(), self.nodes[1].len(), self.nodes[2].len()]
    }

    /// Points and weights in grid order `q0 + n0 (q1 + n1 q2)`.
    pub fn for_each<F: FnMut(Point, f64)>(&self, mut f: F) {
        let [n0, n1, n2] = self.shape();
        for q2 in 0..n2 {
            for q1 in 0..n1 {
                for q0 in 0..n0 {
                    let x = [self.nodes[0][q0], self.nodes[1][q1], self.nodes[2][q2]];
                    let w = self.weights[0][q0] * self.weights[1][q1] * self.weights[2][q2];
                    f(x, w);
                }
            }
        }
    }

    fn on_box(lower: &Point, upper: &Point, d: usize, n: usize) -> Self {
        let rule = gauss(n);
        let mut nodes: [Vec<f64>; 3] = [vec![0.0], vec![0.0], vec![0.0]];
        let mut weights: [Vec<f64>; 3] = [vec![1.0], vec![1.0], vec![1.0]];
        for k in 0..d {
            let (x, w) = rule.mapped(lower[k], upper[k]);
            nodes[k] = x;
            weights[k] = w;
        }
        TensorCell { nodes, weights }
    }
}

/// Quadrature rule on one element.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementRule {
    pub d: usize,
    pub cells: Vec<TensorCell>,
}

impl ElementRule {
    pub fn points(&self) -> Vec<Point> {
        let mut out = Vec::with_capacity(self.len());
        for c in &self.cells {
            c.for_each(|x, _| out.push(x));
        }
        out
    }

    pub fn weights(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len());
        for c in &self.cells {
            c.for_each(|_, w| out.push(w));
        }
        out
    }

    pub fn len(&self) -> usize {
        self.cells.iter().map(TensorCell::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn integrate<F: Fn(&Point) -> f64>(&self, f: F) -> f64 {
        let mut s = 0.0;
        for c in &self.cells {
            c.for_each(|x, w| s += w * f(&x));
        }
        s
    }
}

/// Tensor Gauss rule with `n` points per axis mapped onto `el`.
pub fn element_rule(el: &Element, d: usize, n: usize) -> ElementRule {
    let mut upper = [0.0; 3];
    for k in 0..d {
        upper[k] = el.upper(k);
    }
    ElementRule { d, cells: vec![TensorCell::on_box(&el.lower, &upper, d, n)] }
}

/// Composite rule on `el` graded toward its vertex `c`, for integrands that
/// behave like `r^-alpha` there.
pub fn singular_rule(el: &Element, d: usize, c: &Point, n: usize, depth: usize, alpha: f64) -> Result<ElementRule> {
    let mut dir = [1.0; 3];
    let tol = 1e-13 * el.h;
    for k in 0..d {
        if (c[k] - el.lower[k]).abs() <= tol {
            dir[k] = 1.0;
        } else if (c[k] - el.upper(k)).abs() <= tol {
            dir[k] = -1.0;
        } else {
            return Err(Error::NotSingularVertex(el.id));
        }
    }
    composite(d, c, &dir, &el.size, n, depth, alpha)
}

/// The same composite scheme on `(0, 1)` with the singularity at `0`.
pub fn singular_rule_1d(n: usize, depth: usize, alpha: f64) -> Result<ElementRule> {
    composite(1, &[0.0; 3], &[1.0; 3], &[1.0, 0.0, 0.0], n, depth, alpha)
}

fn composite(d: usize, c: &Point, dir: &Point, extent: &Point, n: usize, depth: usize, alpha: f64) -> Result<ElementRule> {
    if depth < 1 {
        return Err(Error::InvalidParameter { name: "depth", reason: "must be at least 1" });
    }
    if !(alpha < d as f64) {
        return Err(Error::InvalidParameter { name: "alpha", reason: "r^-alpha must be integrable" });
    }
    let corners = 1usize << d;
    let mut cells = Vec::with_capacity(depth * (corners - 1) + 1);
    let mut scale = 1.0;
    for _ in 0..depth {
        shell_cells(d, c, dir, extent, scale, n, &mut cells);
        scale *= 0.5;
    }
    // Innermost box of relative size `scale`, collapsed to its centre.
    let unit_integral = corner_box_integral(d, extent, alpha);
    let tail = float::powf(scale, d as f64 - alpha) * unit_integral;
    let mut centre = [0.0; 3];
    let mut r2 = 0.0;
    for k in 0..d {
        let off = 0.5 * scale * extent[k];
        centre[k] = c[k] + dir[k] * off;
        r2 += off * off;
    }
    let w = tail * float::powf(float::sqrt(r2), alpha);
    let mut nodes: [Vec<f64>; 3] = [vec![0.0], vec![0.0], vec![0.0]];
    let mut weights: [Vec<f64>; 3] = [vec![1.0], vec![1.0], vec![1.0]];
    for k in 0..d {
        nodes[k] = vec![centre[k]];
    }
    weights[0] = vec![w];
    cells.push(TensorCell { nodes, weights });
    Ok(ElementRule { d, cells })
}

/// Cells covering `B(scale) \ B(scale / 2)`, where `B(s)` is the box at `c`
/// spanning `s * extent` in direction `dir`.
fn shell_cells(d: usize, c: &Point, dir: &Point, extent: &Point, scale: f64, n: usize, out: &mut Vec<TensorCell>) {
    let corners = 1usize << d;
    for child in 1..corners {
        let mut lower = [0.0; 3];
        let mut upper = [0.0; 3];
        for k in 0..d {
            let (a, b) = if child >> k & 1 == 1 {
                (0.5 * scale * extent[k], scale * extent[k])
            } else {
                (0.0, 0.5 * scale * extent[k])
            };
            if dir[k] > 0.0 {
                lower[k] = c[k] + a;
                upper[k] = c[k] + b;
            } else {
                lower[k] = c[k] - b;
                upper[k] = c[k] - a;
            }
        }
        out.push(TensorCell::on_box(&lower, &upper, d, n));
    }
}

/// `∫ r^-α` over the box `[0, extent]` with `r` measured from its lower corner,
/// by the self-similarity `I = I_shell + 2^(α-d) I`.
fn corner_box_integral(d: usize, extent: &Point, alpha: f64) -> f64 {
    const SHELL_POINTS: usize = 24;
    let mut cells = Vec::new();
    shell_cells(d, &[0.0; 3], &[1.0; 3], extent, 1.0, SHELL_POINTS, &mut cells);
    let mut shell = 0.0;
    for cell in &cells {
        cell.for_each(|x, w| {
            let r = float::sqrt((0..d).map(|k| x[k] * x[k]).sum());
            shell += w * float::powf(r, -alpha);
        });
    }
    shell / (1.0 - float::powf(2.0, alpha - d as f64))
}

/// Tensor Gauss rule with `n` points per tangential axis on `face`.
pub fn face_rule(face: &Face, d: usize, n: usize) -> TensorCell {
    let mut cell = TensorCell::on_box(&face.lower, &face.upper, d, n);
    cell.nodes[face.axis] = vec![face.lower[face.axis]];
    cell.weights[face.axis] = vec![1.0];
    cell
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_graded_mesh, BoxSpec, GradedMesh};

    fn unit_square_element() -> Element {
        let m = GradedMesh::from_boxes(2, &[BoxSpec { lower: [0.0; 3], size: [1.0, 1.0, 0.0], layer: 0 }]).unwrap();
        m.elements[0].clone()
    }

    #[test]
    fn tensor_rule_basics() {
        let el = unit_square_element();
        let r = element_rule(&el, 2, 2);
        assert_eq!(r.len(), 4);
        for w in r.weights() {
            assert!((w - 0.25).abs() < 1e-15);
        }
        assert!((r.integrate(|_| 1.0) - 1.0).abs() < 1e-15);
        assert!((r.integrate(|x| x[0] * x[0]) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn one_dimensional_sanity() {
        let r = singular_rule_1d(8, 20, 0.5).unwrap();
        assert!((r.integrate(|x| 1.0 / x[0].sqrt()) - 2.0).abs() < 1e-6);
        assert!(r.weights().iter().all(|&w| w > 0.0));
    }

    #[test]
    fn points_stay_away_from_the_vertex() {
        let m = build_graded_mesh(2, 0.5, 3).unwrap();
        for el in m.elements.iter().filter(|e| e.touches_c) {
            let depth = 20;
            let r = singular_rule(el, 2, &m.center, 6, depth, 1.0).unwrap();
            let min_r = 0.5f64.powi(depth as i32 + 2) * el.h;
            for x in r.points() {
                assert!(el.contains(&x, 2, 0.0));
                assert!((x[0] * x[0] + x[1] * x[1]).sqrt() >= min_r);
            }
            assert!(r.weights().iter().all(|&w| w > 0.0));
        }
        let far = m.elements.iter().find(|e| !e.touches_c).unwrap();
        assert!(matches!(
            singular_rule(far, 2, &m.center, 4, 20, 1.0),
            Err(Error::NotSingularVertex(_))
        ));
    }

    #[test]
    fn face_rule_has_face_measure() {
        let m = build_graded_mesh(3, 0.5, 2).unwrap();
        for f in &m.faces {
            let c = face_rule(f, 3, 3);
            let mut s = 0.0;
            c.for_each(|x, w| {
                assert_eq!(x[f.axis], f.lower[f.axis]);
                s += w;
            });
            assert!((s - f.measure(3)).abs() < 1e-15);
        }
    }
}
