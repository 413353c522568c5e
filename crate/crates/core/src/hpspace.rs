//! Discontinuous hp spaces on a graded mesh: per-element tensor Legendre
//! bases with degrees growing linearly away from the singular point.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::float;
use crate::mesh::{Element, Face, GradedMesh};
use crate::refelem::{gauss, legendre_into, legendre_norm_sq};
use crate::tensor::{self, Table};
use crate::{Error, Point, Result};

/// How `p0 + 𝔰 (ℓ - j)` is turned into an integer degree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DegreeRounding {
    #[default]
    HalfUp,
    Floor,
    Ceil,
}

impl DegreeRounding {
    pub fn apply(self, x: f64) -> usize {
        // Absorbs representation error in products like 0.1 * 5.
        let eps = 1e-9;
        let r = match self {
            DegreeRounding::HalfUp => float::floor(x + 0.5 + eps),
            DegreeRounding::Floor => float::floor(x + eps),
            DegreeRounding::Ceil => float::ceil(x - eps),
        };
        r.max(0.0) as usize
    }
}

/// Degree for an element in layer `j` of a mesh with `ell` refinement steps.
pub fn layer_degree(p0: usize, slope: f64, ell: usize, j: usize, rounding: DegreeRounding) -> usize {
    p0 + rounding.apply(slope * ell.saturating_sub(j) as f64)
}

#[derive(Debug)]
pub struct HpSpace {
    mesh: Arc<GradedMesh>,
    p0: usize,
    slope: f64,
    rounding: DegreeRounding,
    degrees: Vec<usize>,
    offsets: Vec<usize>,
    ndofs: usize,
}

/// Space with default (half-up) degree rounding.
pub fn build_space(mesh: Arc<GradedMesh>, p0: usize, slope: f64) -> Result<Arc<HpSpace>> {
    HpSpace::new(mesh, p0, slope, DegreeRounding::HalfUp).map(Arc::new)
}

impl HpSpace {
    pub fn new(mesh: Arc<GradedMesh>, p0: usize, slope: f64, rounding: DegreeRounding) -> Result<Self> {
        if p0 < 1 {
            return Err(Error::InvalidParameter { name: "p0", reason: "must be at least 1" });
        }
        if !(slope >= 0.0 && slope.is_finite()) {
            return Err(Error::InvalidParameter { name: "slope", reason: "must be finite and nonnegative" });
        }
        let d = mesh.d;
        let degrees: Vec<usize> = mesh
            .elements
            .iter()
            .map(|el| layer_degree(p0, slope, mesh.levels, el.layer, rounding))
            .collect();
        let mut offsets = Vec::with_capacity(degrees.len() + 1);
        let mut n = 0;
        for &p in &degrees {
            offsets.push(n);
            n += (p + 1).pow(d as u32);
        }
        offsets.push(n);
        Ok(HpSpace { mesh, p0, slope, rounding, degrees, offsets, ndofs: n })
    }

    pub fn mesh(&self) -> &GradedMesh {
        &self.mesh
    }

    pub fn mesh_arc(&self) -> &Arc<GradedMesh> {
        &self.mesh
    }

    pub fn dim(&self) -> usize {
        self.mesh.d
    }

    pub fn p0(&self) -> usize {
        self.p0
    }

    pub fn slope(&self) -> f64 {
        self.slope
    }

    pub fn rounding(&self) -> DegreeRounding {
        self.rounding
    }

    pub fn ndofs(&self) -> usize {
        self.ndofs
    }

    pub fn degree(&self, el: usize) -> usize {
        self.degrees[el]
    }

    pub fn degrees(&self) -> &[usize] {
        &self.degrees
    }

    pub fn offset(&self, el: usize) -> usize {
        self.offsets[el]
    }

    pub fn block_sizes(&self) -> Vec<usize> {
        self.offsets.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn local_dofs(&self, el: usize) -> usize {
        self.offsets[el + 1] - self.offsets[el]
    }

    pub fn dof_range(&self, el: usize) -> core::ops::Range<usize> {
        self.offsets[el]..self.offsets[el + 1]
    }

    /// `p_e`: the largest degree among the owners of `face`.
    pub fn face_degree(&self, face: &Face) -> usize {
        face.owners().map(|k| self.degrees[k]).max().unwrap_or(self.p0)
    }

    /// Mode counts per axis, padded to three axes.
    pub(crate) fn modes(&self, el: usize) -> [usize; 3] {
        let m = self.degrees[el] + 1;
        let mut out = [1; 3];
        out[..self.mesh.d].iter_mut().for_each(|x| *x = m);
        out
    }

    /// Coefficients of the constant function `value`.
    pub fn constant(self: &Arc<Self>, value: f64) -> DiscreteField {
        let mut coeffs = vec![0.0; self.ndofs];
        for el in 0..self.mesh.len() {
            coeffs[self.offsets[el]] = value;
        }
        DiscreteField { space: Arc::clone(self), coeffs }
    }

    /// Element-wise L² projection of `f`, using `p_K + extra` Gauss points per axis.
    pub fn project<F: Fn(&Point) -> f64>(self: &Arc<Self>, f: F, extra: usize) -> DiscreteField {
        let d = self.mesh.d;
        let mut coeffs = vec![0.0; self.ndofs];
        for el in &self.mesh.elements {
            let p = self.degrees[el.id];
            let rule = gauss(p + 1 + extra);
            let pts = rule.points();
            let n = pts.len();
            let mut vals = Vec::with_capacity(n.pow(d as u32));
            let npad = pad3(n, d);
            for q2 in 0..npad[2] {
                for q1 in 0..npad[1] {
                    for q0 in 0..npad[0] {
                        let q = [q0, q1, q2];
                        let mut xi = [0.0; 3];
                        let mut w = 1.0;
                        for k in 0..d {
                            xi[k] = pts[q[k]];
                            w *= rule.weights()[q[k]];
                        }
                        let x = el.from_reference(&xi, d);
                        vals.push(w * f(&x));
                    }
                }
            }
            let t = Table::legendre(p, pts, false);
            let tables = padded_tables(&t, d);
            let moments = tensor::integrate([&tables[0], &tables[1], &tables[2]], &vals);
            let off = self.offsets[el.id];
            for (i, m) in moments.into_iter().enumerate() {
                coeffs[off + i] = m / reference_norm_sq(i, p + 1, d);
            }
        }
        DiscreteField { space: Arc::clone(self), coeffs }
    }

    /// Wraps a coefficient vector.
    pub fn field(self: &Arc<Self>, coeffs: Vec<f64>) -> Result<DiscreteField> {
        if coeffs.len() != self.ndofs {
            return Err(Error::DimensionMismatch { expected: self.ndofs, found: coeffs.len() });
        }
        Ok(DiscreteField { space: Arc::clone(self), coeffs })
    }
}

/// `n` points along the first `d` axes, one along the rest.
pub(crate) fn pad3(n: usize, d: usize) -> [usize; 3] {
    let mut out = [1; 3];
    out[..d].iter_mut().for_each(|x| *x = n);
    out
}

pub(crate) fn padded_tables(t: &Table, d: usize) -> [Table; 3] {
    [
        t.clone(),
        if d >= 2 { t.clone() } else { Table::unit() },
        if d >= 3 { t.clone() } else { Table::unit() },
    ]
}

/// `Π_k 2 / (2 a_k + 1)` for local mode `i` with `m` modes per axis.
pub(crate) fn reference_norm_sq(i: usize, m: usize, d: usize) -> f64 {
    let mut r = i;
    let mut s = 1.0;
    for _ in 0..d {
        s *= legendre_norm_sq(r % m);
        r /= m;
    }
    s
}

/// Element containing `x`, ties broken toward the smallest id.
pub fn locate_point(mesh: &GradedMesh, x: &Point) -> Result<usize> {
    mesh.locate(x)
}

/// Coefficient vector over an [`HpSpace`].
#[derive(Debug, Clone)]
pub struct DiscreteField {
    space: Arc<HpSpace>,
    coeffs: Vec<f64>,
}

impl DiscreteField {
    pub fn space(&self) -> &Arc<HpSpace> {
        &self.space
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    pub fn local(&self, el: usize) -> &[f64] {
        &self.coeffs[self.space.dof_range(el)]
    }

    /// Point value via [`locate_point`].
    pub fn evaluate(&self, x: &Point) -> Result<f64> {
        let el = self.space.mesh.locate(x)?;
        Ok(self.value_in(el, x))
    }

    /// Value of element `el`'s polynomial at `x` (which may lie outside it).
    pub fn value_in(&self, el: usize, x: &Point) -> f64 {
        self.value_grad_in(el, x).0
    }

    /// Value and physical gradient of element `el`'s polynomial at `x`.
    pub fn value_grad_in(&self, el: usize, x: &Point) -> (f64, Point) {
        let space = &self.space;
        let d = space.mesh.d;
        let elem = &space.mesh.elements[el];
        let xi = elem.to_reference(x, d);
        local_value_grad(elem, space.degrees[el], d, self.local(el), &xi)
    }

    /// `self - other` when both live on the same space.
    pub fn sub(&self, other: &DiscreteField) -> Result<DiscreteField> {
        if self.coeffs.len() != other.coeffs.len() {
            return Err(Error::DimensionMismatch { expected: self.coeffs.len(), found: other.coeffs.len() });
        }
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect();
        Ok(DiscreteField { space: Arc::clone(&self.space), coeffs })
    }

    /// Injects `self` into a space on a nested finer (or equal) mesh by local
    /// L² projection; exact whenever the fine degrees are at least the coarse ones.
    pub fn transfer_to(&self, fine: &Arc<HpSpace>) -> Result<DiscreteField> {
        let parents = parent_map(self.space.mesh(), fine.mesh())?;
        let d = fine.mesh.d;
        let mut coeffs = vec![0.0; fine.ndofs];
        for el in &fine.mesh.elements {
            let parent = parents[el.id];
            let pf = fine.degrees[el.id];
            let pc = self.space.degrees[parent];
            let rule = gauss(pf.max(pc) + 1);
            let pts = rule.points();
            let n = pts.len();
            let npad = pad3(n, d);
            let mut vals = Vec::with_capacity(npad.iter().product());
            for q2 in 0..npad[2] {
                for q1 in 0..npad[1] {
                    for q0 in 0..npad[0] {
                        let q = [q0, q1, q2];
                        let mut xi = [0.0; 3];
                        let mut w = 1.0;
                        for k in 0..d {
                            xi[k] = pts[q[k]];
                            w *= rule.weights()[q[k]];
                        }
                        let x = el.from_reference(&xi, d);
                        vals.push(w * self.value_in(parent, &x));
                    }
                }
            }
            let t = Table::legendre(pf, pts, false);
            let tables = padded_tables(&t, d);
            let moments = tensor::integrate([&tables[0], &tables[1], &tables[2]], &vals);
            let off = fine.offsets[el.id];
            for (i, m) in moments.into_iter().enumerate() {
                coeffs[off + i] = m / reference_norm_sq(i, pf + 1, d);
            }
        }
        Ok(DiscreteField { space: Arc::clone(fine), coeffs })
    }
}

/// Value and physical gradient of a local expansion at reference point `xi`.
pub(crate) fn local_value_grad(elem: &Element, p: usize, d: usize, c: &[f64], xi: &Point) -> (f64, Point) {
    let m = p + 1;
    let mut v = [[0.0; 24]; 3];
    let mut dv = [[0.0; 24]; 3];
    let mut vv = vec![0.0; m];
    let mut dd = vec![0.0; m];
    for k in 0..d {
        legendre_into(xi[k], &mut vv, &mut dd);
        if m <= 24 {
            v[k][..m].copy_from_slice(&vv);
            dv[k][..m].copy_from_slice(&dd);
        }
    }
    if m > 24 {
        return slow_value_grad(elem, p, d, c, xi);
    }
    let mut val = 0.0;
    let mut grad = [0.0; 3];
    let npad = pad3(m, d);
    for a2 in 0..npad[2] {
        let (z, dz) = if d == 3 { (v[2][a2], dv[2][a2]) } else { (1.0, 0.0) };
        for a1 in 0..npad[1] {
            let (y, dy) = (v[1][a1], dv[1][a1]);
            for a0 in 0..npad[0] {
                let ci = c[a0 + m * (a1 + m * a2)];
                if ci == 0.0 {
                    continue;
                }
                let (x, dx) = (v[0][a0], dv[0][a0]);
                val += ci * x * y * z;
                grad[0] += ci * dx * y * z;
                grad[1] += ci * x * dy * z;
                if d == 3 {
                    grad[2] += ci * x * y * dz;
                }
            }
        }
    }
    for k in 0..d {
        grad[k] *= 2.0 / elem.size[k];
    }
    (val, grad)
}

fn slow_value_grad(elem: &Element, p: usize, d: usize, c: &[f64], xi: &Point) -> (f64, Point) {
    let m = p + 1;
    let mut tabs = Vec::new();
    for k in 0..d {
        let mut vv = vec![0.0; m];
        let mut dd = vec![0.0; m];
        legendre_into(xi[k], &mut vv, &mut dd);
        tabs.push((vv, dd));
    }
    let mut val = 0.0;
    let mut grad = [0.0; 3];
    for (i, &ci) in c.iter().enumerate() {
        let mut a = [0usize; 3];
        let mut r = i;
        for ak in a.iter_mut().take(d) {
            *ak = r % m;
            r /= m;
        }
        let mut prod = 1.0;
        for k in 0..d {
            prod *= tabs[k].0[a[k]];
        }
        val += ci * prod;
        for k in 0..d {
            let mut g = tabs[k].1[a[k]];
            for j in (0..d).filter(|&j| j != k) {
                g *= tabs[j].0[a[j]];
            }
            grad[k] += ci * g;
        }
    }
    for k in 0..d {
        grad[k] *= 2.0 / elem.size[k];
    }
    (val, grad)
}

/// For each element of `fine`, the element of `coarse` containing it.
pub fn parent_map(coarse: &GradedMesh, fine: &GradedMesh) -> Result<Vec<usize>> {
    if coarse.d != fine.d {
        return Err(Error::DimensionMismatch { expected: coarse.d, found: fine.d });
    }
    let d = fine.d;
    fine.elements
        .iter()
        .map(|el| {
            let c = el.center();
            let parent = coarse.locate_interior(&c).ok_or(Error::NotNested(el.id))?;
            if coarse.elements[parent].encloses(el, d, 1e-13) {
                Ok(parent)
            } else {
                Err(Error::NotNested(el.id))
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_graded_mesh;

    fn space(d: usize, ell: usize, p0: usize, slope: f64) -> Arc<HpSpace> {
        build_space(Arc::new(build_graded_mesh(d, 0.5, ell).unwrap()), p0, slope).unwrap()
    }

    #[test]
    fn degree_formula() {
        assert_eq!(layer_degree(2, 0.5, 4, 0, DegreeRounding::HalfUp), 4);
        assert_eq!(layer_degree(2, 0.5, 4, 1, DegreeRounding::HalfUp), 4);
        assert_eq!(layer_degree(2, 0.5, 4, 1, DegreeRounding::Floor), 3);
        assert_eq!(layer_degree(2, 0.125, 4, 0, DegreeRounding::HalfUp), 3);
        assert_eq!(layer_degree(2, 0.1, 9, 4, DegreeRounding::HalfUp), 3);
        let s = space(2, 5, 3, 0.0);
        assert!(s.degrees().iter().all(|&p| p == 3));
    }

    #[test]
    fn dof_count() {
        let s = space(2, 0, 1, 0.5);
        assert_eq!(s.ndofs(), 16);
        let s = space(3, 2, 2, 0.5);
        let expect: usize = s.degrees().iter().map(|p| (p + 1).pow(3)).sum();
        assert_eq!(s.ndofs(), expect);
    }

    #[test]
    fn innermost_layer_has_base_degree() {
        let s = space(2, 6, 2, 0.5);
        for el in &s.mesh().elements {
            if el.layer == 6 {
                assert_eq!(s.degree(el.id), 2);
            }
        }
    }

    #[test]
    fn constant_and_single_mode_evaluation() {
        let s = space(2, 2, 2, 0.25);
        let one = s.constant(1.0);
        for x in [[0.1, -0.2, 0.0], [0.5, 0.5, 0.0], [0.0, 0.0, 0.0], [-0.37, 0.01, 0.0]] {
            assert!((one.evaluate(&x).unwrap() - 1.0).abs() < 1e-15);
        }
        let mut f = s.constant(0.0);
        let el = 5;
        let off = s.offset(el);
        f.coeffs_mut()[off + 1] = 1.0; // P_1 ⊗ P_0
        let c = s.mesh().elements[el].center();
        assert!(f.value_in(el, &c).abs() < 1e-15);
        let diff = f.sub(&f).unwrap();
        assert!(diff.evaluate(&c).unwrap() == 0.0);
    }

    #[test]
    fn transfer_is_exact_for_nested_spaces() {
        let coarse = space(2, 2, 2, 0.5);
        let fine = space(2, 4, 3, 0.5);
        let f = coarse.project(|x| x[0] * x[0] - 3.0 * x[0] * x[1] + 0.5, 2);
        let g = f.transfer_to(&fine).unwrap();
        for x in [[0.11, 0.23, 0.0], [-0.4, 0.33, 0.0], [0.01, -0.02, 0.0]] {
            assert!((f.evaluate(&x).unwrap() - g.evaluate(&x).unwrap()).abs() < 1e-13);
        }
        assert!(matches!(g.transfer_to(&coarse), Err(Error::NotNested(_))));
    }
}
