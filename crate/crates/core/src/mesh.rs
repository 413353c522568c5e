//! Geometrically graded axiparallel meshes of `(-1/2, 1/2)^d` refined toward
//! the origin, and their (possibly 1-irregular) face sets.
//!
//! Refinement step `j` splits each of the `2^d` boxes that have the origin as
//! a vertex at ratio `σ` along every axis. Children that do not touch the
//! origin are never refined again and form layer `Ω_j`; after `ℓ` steps the
//! `2^d` boxes at the origin join layer `Ω_ℓ`. For `σ = 1/2` every element is
//! a cube of edge `σ^j / 2`. For `σ < 1/2` children away from the origin are
//! boxes, and `h_K` is their longest edge.

use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Point, Result};

const GEOM_TOL: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq)]
pub struct Element {
    pub id: usize,
    pub lower: Point,
    /// Edge lengths per axis.
    pub size: Point,
    /// Longest edge.
    pub h: f64,
    pub layer: usize,
    pub touches_c: bool,
}

impl Element {
    pub fn upper(&self, axis: usize) -> f64 {
        self.lower[axis] + self.size[axis]
    }

    pub fn center(&self) -> Point {
        let mut c = [0.0; 3];
        for k in 0..3 {
            c[k] = self.lower[k] + 0.5 * self.size[k];
        }
        c
    }

    pub fn measure(&self, d: usize) -> f64 {
        self.size[..d].iter().product()
    }

    /// Closed-box membership up to `tol`.
    pub fn contains(&self, x: &Point, d: usize, tol: f64) -> bool {
        (0..d).all(|k| x[k] >= self.lower[k] - tol && x[k] <= self.upper(k) + tol)
    }

    /// Affine map to reference coordinates in `[-1, 1]^d`.
    pub fn to_reference(&self, x: &Point, d: usize) -> Point {
        let mut xi = [0.0; 3];
        for k in 0..d {
            xi[k] = 2.0 * (x[k] - self.lower[k]) / self.size[k] - 1.0;
        }
        xi
    }

    pub fn from_reference(&self, xi: &Point, d: usize) -> Point {
        let mut x = [0.0; 3];
        for k in 0..d {
            x[k] = self.lower[k] + 0.5 * (xi[k] + 1.0) * self.size[k];
        }
        x
    }

    /// Euclidean distance from `c` to the closed box.
    pub fn distance_to(&self, c: &Point, d: usize) -> f64 {
        let mut s = 0.0;
        for k in 0..d {
            let g = if c[k] < self.lower[k] {
                self.lower[k] - c[k]
            } else if c[k] > self.upper(k) {
                c[k] - self.upper(k)
            } else {
                0.0
            };
            s += g * g;
        }
        crate::float::sqrt(s)
    }

    /// Box contains `other` up to `tol`.
    pub fn encloses(&self, other: &Element, d: usize, tol: f64) -> bool {
        (0..d).all(|k| {
            other.lower[k] >= self.lower[k] - tol && other.upper(k) <= self.upper(k) + tol
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FaceKind {
    Interior,
    Boundary,
}

/// A face of the mesh skeleton.
///
/// For interior faces `minus` lies below the face plane along `axis` and
/// `plus` above it, so the unit normal `+e_axis` points from `minus` to
/// `plus`. For boundary faces `plus` is `None` and `normal_sign` gives the
/// outward normal of `minus`.
#[derive(Debug, Clone, PartialEq)]
pub struct Face {
    pub kind: FaceKind,
    pub minus: usize,
    pub plus: Option<usize>,
    pub axis: usize,
    pub normal_sign: f64,
    /// Extent of the face; `lower[axis] == upper[axis]`.
    pub lower: Point,
    pub upper: Point,
    pub h_e: f64,
    /// Entire face of only the finer neighbour.
    pub subface: bool,
}

impl Face {
    pub fn measure(&self, d: usize) -> f64 {
        (0..d)
            .filter(|&k| k != self.axis)
            .map(|k| self.upper[k] - self.lower[k])
            .product()
    }

    pub fn owners(&self) -> impl Iterator<Item = usize> + '_ {
        core::iter::once(self.minus).chain(self.plus)
    }
}

#[derive(Debug, Clone)]
pub struct GradedMesh {
    pub d: usize,
    pub sigma: f64,
    pub levels: usize,
    /// The singular point.
    pub center: Point,
    pub elements: Vec<Element>,
    pub faces: Vec<Face>,
}

/// Describes one box for [`GradedMesh::from_boxes`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxSpec {
    pub lower: Point,
    pub size: Point,
    pub layer: usize,
}

/// Graded mesh of `(-1/2, 1/2)^d` with `ell` refinement steps toward the origin.
pub fn build_graded_mesh(d: usize, sigma: f64, ell: usize) -> Result<GradedMesh> {
    if d != 2 && d != 3 {
        return Err(Error::InvalidParameter { name: "dim", reason: "must be 2 or 3" });
    }
    if !(sigma > 0.0 && sigma <= 0.5) {
        return Err(Error::InvalidParameter { name: "sigma", reason: "must lie in (0, 1/2]" });
    }
    let corners = 1usize << d;
    let mut boxes = Vec::with_capacity(corners + (corners * corners - corners) * ell);
    // Edge of the boxes at the origin before step j.
    let mut h = 0.5;
    for step in 1..=ell {
        let inner = sigma * h;
        for orthant in 0..corners {
            for child in 1..corners {
                let mut lo = [0.0; 3];
                let mut hi = [0.0; 3];
                for k in 0..d {
                    if child >> k & 1 == 1 {
                        lo[k] = inner;
                        hi[k] = h;
                    } else {
                        hi[k] = inner;
                    }
                }
                boxes.push(orthant_box(d, orthant, &lo, &hi, step));
            }
        }
        h = inner;
    }
    for orthant in 0..corners {
        let lo = [0.0; 3];
        let hi = [h; 3];
        boxes.push(orthant_box(d, orthant, &lo, &hi, ell));
    }
    let mut mesh = GradedMesh::from_boxes(d, &boxes)?;
    mesh.sigma = sigma;
    mesh.levels = ell;
    Ok(mesh)
}

/// Maps `[lo, hi]` in the positive orthant into the orthant selected by the
/// bits of `orthant` (bit set means positive side).
fn orthant_box(d: usize, orthant: usize, lo: &Point, hi: &Point, layer: usize) -> BoxSpec {
    let mut lower = [0.0; 3];
    let mut size = [0.0; 3];
    for k in 0..d {
        size[k] = hi[k] - lo[k];
        lower[k] = if orthant >> k & 1 == 1 { lo[k] } else { -hi[k] };
    }
    BoxSpec { lower, size, layer }
}

impl GradedMesh {
    /// Builds a mesh from explicit boxes whose union is the domain. Element
    /// ids follow the order of `boxes`; the singular point is the origin.
    pub fn from_boxes(d: usize, boxes: &[BoxSpec]) -> Result<Self> {
        if d != 2 && d != 3 {
            return Err(Error::InvalidParameter { name: "dim", reason: "must be 2 or 3" });
        }
        let center = [0.0; 3];
        let elements: Vec<Element> = boxes
            .iter()
            .enumerate()
            .map(|(id, b)| {
                let h = b.size[..d].iter().cloned().fold(0.0, f64::max);
                let mut el = Element {
                    id,
                    lower: b.lower,
                    size: b.size,
                    h,
                    layer: b.layer,
                    touches_c: false,
                };
                el.touches_c = el.contains(&center, d, GEOM_TOL * h);
                el
            })
            .collect();
        let levels = elements.iter().map(|e| e.layer).max().unwrap_or(0);
        let mut mesh = GradedMesh { d, sigma: 0.5, levels, center, elements, faces: Vec::new() };
        mesh.faces = enumerate_faces(&mesh)?;
        Ok(mesh)
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Element whose closed box contains `x`; ties go to the smallest id.
    pub fn locate(&self, x: &Point) -> Result<usize> {
        self.elements
            .iter()
            .find(|el| el.contains(x, self.d, GEOM_TOL))
            .map(|el| el.id)
            .ok_or(Error::PointOutsideDomain { x: x[0], y: x[1], z: x[2] })
    }

    /// Element containing the open neighbourhood of an interior point.
    pub(crate) fn locate_interior(&self, x: &Point) -> Option<usize> {
        self.elements
            .iter()
            .find(|el| (0..self.d).all(|k| x[k] > el.lower[k] && x[k] < el.upper(k)))
            .map(|el| el.id)
    }
}

/// Enumerates the skeleton of `mesh`. Interfaces across a level jump are
/// split into the entire faces of the finer elements.
pub fn enumerate_faces(mesh: &GradedMesh) -> Result<Vec<Face>> {
    let d = mesh.d;
    let els = &mesh.elements;
    let mut faces = Vec::new();
    let mut covered = vec![0.0; 2 * d];
    for k_el in els {
        covered.iter_mut().for_each(|c| *c = 0.0);
        let mut pending: Vec<Face> = Vec::new();
        for n_el in els {
            if n_el.id == k_el.id {
                continue;
            }
            for axis in 0..d {
                for upper_side in [false, true] {
                    let plane = if upper_side { k_el.upper(axis) } else { k_el.lower[axis] };
                    let other = if upper_side { n_el.lower[axis] } else { n_el.upper(axis) };
                    let scale = k_el.h.min(n_el.h);
                    if (plane - other).abs() > GEOM_TOL * scale.max(1.0) {
                        continue;
                    }
                    let mut lower = [0.0; 3];
                    let mut upper = [0.0; 3];
                    let mut whole_k = true;
                    let mut whole_n = true;
                    let mut overlaps = true;
                    for t in (0..d).filter(|&t| t != axis) {
                        let lo = k_el.lower[t].max(n_el.lower[t]);
                        let hi = k_el.upper(t).min(n_el.upper(t));
                        if hi - lo <= GEOM_TOL * scale {
                            overlaps = false;
                            break;
                        }
                        lower[t] = lo;
                        upper[t] = hi;
                        let tol = GEOM_TOL * scale.max(1e-300);
                        whole_k &= (lo - k_el.lower[t]).abs() <= tol
                            && (hi - k_el.upper(t)).abs() <= tol;
                        whole_n &= (lo - n_el.lower[t]).abs() <= tol
                            && (hi - n_el.upper(t)).abs() <= tol;
                    }
                    if !overlaps {
                        continue;
                    }
                    if !whole_k && !whole_n {
                        return Err(Error::IrregularFace {
                            a: k_el.id.min(n_el.id),
                            b: k_el.id.max(n_el.id),
                        });
                    }
                    lower[axis] = plane;
                    upper[axis] = plane;
                    let face = Face {
                        kind: FaceKind::Interior,
                        minus: k_el.id,
                        plus: Some(n_el.id),
                        axis,
                        normal_sign: 1.0,
                        lower,
                        upper,
                        h_e: k_el.h.min(n_el.h),
                        subface: !(whole_k && whole_n),
                    };
                    covered[2 * axis + usize::from(upper_side)] += face.measure(d);
                    // Each interface is emitted once, by the element below it.
                    if upper_side {
                        pending.push(face);
                    }
                }
            }
        }
        for axis in 0..d {
            for upper_side in [false, true] {
                let full: f64 = (0..d)
                    .filter(|&t| t != axis)
                    .map(|t| k_el.size[t])
                    .product();
                let c = covered[2 * axis + usize::from(upper_side)];
                if c == 0.0 {
                    let plane = if upper_side { k_el.upper(axis) } else { k_el.lower[axis] };
                    let mut lower = k_el.lower;
                    let mut upper = [0.0; 3];
                    for t in 0..d {
                        upper[t] = k_el.upper(t);
                    }
                    lower[axis] = plane;
                    upper[axis] = plane;
                    pending.push(Face {
                        kind: FaceKind::Boundary,
                        minus: k_el.id,
                        plus: None,
                        axis,
                        normal_sign: if upper_side { 1.0 } else { -1.0 },
                        lower,
                        upper,
                        h_e: k_el.h,
                        subface: false,
                    });
                } else if (c - full).abs() > 1e-12 * full {
                    return Err(Error::UncoveredFace { element: k_el.id, axis });
                }
            }
        }
        pending.sort_by(|a, b| {
            (a.axis, a.normal_sign > 0.0, a.plus.unwrap_or(usize::MAX))
                .cmp(&(b.axis, b.normal_sign > 0.0, b.plus.unwrap_or(usize::MAX)))
        });
        faces.extend(pending);
    }
    Ok(faces)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn count(d: usize, ell: usize) -> usize {
        let c = 1 << d;
        c + (c * c - c) * ell
    }

    #[test]
    fn initial_split() {
        let m = build_graded_mesh(2, 0.5, 0).unwrap();
        assert_eq!(m.len(), 4);
        assert!(m.elements.iter().all(|e| e.layer == 0 && e.touches_c));
        let interior = m.faces.iter().filter(|f| f.kind == FaceKind::Interior).count();
        let boundary = m.faces.iter().filter(|f| f.kind == FaceKind::Boundary).count();
        assert_eq!((interior, boundary), (4, 8));
        for f in &m.faces {
            assert!(!f.subface);
            assert_eq!(f.h_e, 0.5);
            assert!((f.measure(2) - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn element_counts() {
        assert_eq!(build_graded_mesh(2, 0.5, 2).unwrap().len(), 28);
        assert_eq!(build_graded_mesh(3, 0.5, 1).unwrap().len(), 64);
        for d in [2, 3] {
            for ell in 0..=6 {
                assert_eq!(build_graded_mesh(d, 0.5, ell).unwrap().len(), count(d, ell));
            }
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(matches!(
            build_graded_mesh(2, 0.6, 1),
            Err(Error::InvalidParameter { name: "sigma", .. })
        ));
        assert!(build_graded_mesh(2, 0.0, 1).is_err());
        assert!(matches!(
            build_graded_mesh(4, 0.5, 1),
            Err(Error::InvalidParameter { name: "dim", .. })
        ));
    }

    #[test]
    fn level_jump_faces_are_split() {
        let m = build_graded_mesh(2, 0.5, 1).unwrap();
        // Layer-1 elements have edge 1/4; all of them are the same size, so
        // there is no level jump yet.
        assert!(m.faces.iter().all(|f| !f.subface));
        let m = build_graded_mesh(2, 0.5, 2).unwrap();
        let subs: Vec<&Face> = m.faces.iter().filter(|f| f.subface).collect();
        assert!(!subs.is_empty());
        for f in subs {
            let a = &m.elements[f.minus];
            let b = &m.elements[f.plus.unwrap()];
            assert_ne!(a.layer, b.layer);
            let fine = a.layer.max(b.layer);
            let h_fine = 0.5 * 0.5f64.powi(fine as i32);
            assert_eq!(f.h_e, h_fine);
            assert!((f.measure(2) - h_fine).abs() < 1e-15);
        }
    }

    #[test]
    fn general_sigma_tiles_and_is_one_irregular() {
        for d in [2, 3] {
            let m = build_graded_mesh(d, 0.3, 3).unwrap();
            let vol: f64 = m.elements.iter().map(|e| e.measure(d)).sum();
            assert!((vol - 1.0).abs() < 1e-13);
            assert_eq!(m.elements.iter().filter(|e| e.touches_c).count(), 1 << d);
        }
    }

    #[test]
    fn custom_irregular_mesh_is_rejected() {
        // Two boxes stacked against one box, offset so neither face is whole.
        let boxes = [
            BoxSpec { lower: [0.0, 0.0, 0.0], size: [1.0, 0.6, 0.0], layer: 0 },
            BoxSpec { lower: [0.0, 0.6, 0.0], size: [1.0, 0.4, 0.0], layer: 0 },
            BoxSpec { lower: [1.0, 0.0, 0.0], size: [1.0, 0.3, 0.0], layer: 0 },
            BoxSpec { lower: [1.0, 0.3, 0.0], size: [1.0, 0.7, 0.0], layer: 0 },
        ];
        assert!(matches!(GradedMesh::from_boxes(2, &boxes), Err(Error::IrregularFace { .. })));
    }

    #[test]
    fn locate() {
        let m = build_graded_mesh(2, 0.5, 0).unwrap();
        let id = m.locate(&[0.3, 0.3, 0.0]).unwrap();
        assert_eq!(m.elements[id].lower, [0.0, 0.0, 0.0]);
        assert_eq!(m.locate(&[0.0, 0.0, 0.0]).unwrap(), 0);
        let id = m.locate(&[0.5, -0.5, 0.0]).unwrap();
        assert_eq!(m.elements[id].lower, [0.0, -0.5, 0.0]);
        assert!(m.locate(&[0.6, 0.0, 0.0]).is_err());
    }
}
