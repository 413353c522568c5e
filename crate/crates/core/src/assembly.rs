//! Symmetric interior penalty operator, mass and state-dependent mass matrices.
//!
//! The discrete form is
//!
//! ```text
//! a(u, v) = Σ_K (∇u, ∇v)_K + (V u, v)_K
//!         - Σ_e (⟨∇u⟩, [v])_e + (⟨∇v⟩, [u])_e
//!         + Σ_e α0 p_e² / h_e ([u], [v])_e
//! ```
//!
//! with one-sided traces on the boundary, which imposes `u = 0` weakly.
//! Every block is accumulated in element order and then face order, so
//! results do not depend on anything but the mesh.

use alloc::vec;
use alloc::vec::Vec;

use crate::float;
use crate::hpspace::{reference_norm_sq, DiscreteField, HpSpace};
use crate::mesh::{Element, Face, FaceKind};
use crate::quadrature::{
    element_rule, face_rule, singular_depth, singular_rule, ElementRule, TensorCell, FACE_EXTRA_POINTS,
    NONLINEAR_EXTRA_POINTS, POTENTIAL_EXTRA_POINTS,
};
use crate::refelem::{legendre_at_end, legendre_deriv_at_end, legendre_norm_sq, legendre_stiffness};
use crate::sparse::{BlockBuilder, SymSparseMatrix};
use crate::tensor::{self, Table};
use crate::{Error, Point, Result};

/// `V(x) = strength * r^-exponent`, with `r` the distance to the singular point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Potential {
    pub strength: f64,
    pub exponent: f64,
}

impl Potential {
    pub fn zero() -> Self {
        Potential { strength: 0.0, exponent: 0.0 }
    }

    /// `-r^-alpha`.
    pub fn attractive(alpha: f64) -> Self {
        Potential { strength: -1.0, exponent: alpha }
    }

    /// `r^-alpha`.
    pub fn repulsive(alpha: f64) -> Self {
        Potential { strength: 1.0, exponent: alpha }
    }

    pub fn is_zero(&self) -> bool {
        self.strength == 0.0
    }

    pub fn at_distance(&self, r: f64) -> f64 {
        if self.exponent == 0.0 {
            self.strength
        } else {
            self.strength * float::powf(r, -self.exponent)
        }
    }

    pub fn value(&self, x: &Point, c: &Point) -> f64 {
        let r2: f64 = (0..3).map(|k| (x[k] - c[k]) * (x[k] - c[k])).sum();
        self.at_distance(float::sqrt(r2))
    }

    fn validate(&self) -> Result<()> {
        if !(self.exponent >= 0.0 && self.exponent < 2.0) {
            return Err(Error::InvalidParameter { name: "alpha", reason: "exponent must lie in [0, 2)" });
        }
        if !self.strength.is_finite() {
            return Err(Error::InvalidParameter { name: "pot_sign", reason: "strength must be finite" });
        }
        Ok(())
    }
}

/// Uniform face penalty `α_e = alpha0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PenaltyConfig {
    pub alpha0: f64,
}

impl Default for PenaltyConfig {
    fn default() -> Self {
        PenaltyConfig { alpha0: 10.0 }
    }
}

/// SIP operator including the potential term.
pub fn assemble_sip(space: &HpSpace, potential: &Potential, penalty: &PenaltyConfig) -> Result<SymSparseMatrix> {
    potential.validate()?;
    if !(penalty.alpha0 > 0.0) {
        return Err(Error::InvalidParameter { name: "penalty", reason: "must be positive" });
    }
    let mesh = space.mesh();
    let d = mesh.d;
    let mut builder = BlockBuilder::new(&space.block_sizes());
    for el in &mesh.elements {
        let p = space.degree(el.id);
        let blk = builder.block_mut(el.id, el.id);
        add_stiffness(el, p, d, blk);
        if !potential.is_zero() {
            let rule = potential_rule(el, p, d, &mesh.center, potential)?;
            let c = mesh.center;
            add_rule_mass(el, p, d, &rule, blk, |x| potential.value(x, &c));
        }
    }
    for face in &mesh.faces {
        add_face_terms(space, face, penalty.alpha0, &mut builder);
    }
    let a = builder.finish();
    a.check_finite()?;
    Ok(a)
}

/// Quadrature used for `V φ_i φ_j` on `el`.
pub fn potential_rule(el: &Element, p: usize, d: usize, c: &Point, potential: &Potential) -> Result<ElementRule> {
    let n = p + POTENTIAL_EXTRA_POINTS;
    if el.touches_c {
        singular_rule(el, d, c, n, singular_depth(p), potential.exponent)
    } else {
        Ok(element_rule(el, d, n))
    }
}

/// L² mass matrix; diagonal for the modal Legendre basis.
pub fn assemble_mass(space: &HpSpace) -> SymSparseMatrix {
    let mesh = space.mesh();
    let d = mesh.d;
    let mut builder = BlockBuilder::new(&space.block_sizes());
    for el in &mesh.elements {
        let m = space.degree(el.id) + 1;
        let nb = space.local_dofs(el.id);
        let jac = el.measure(d) / float::powi(2.0, d as i32);
        let blk = builder.block_mut(el.id, el.id);
        for i in 0..nb {
            blk[i * nb + i] = jac * reference_norm_sq(i, m, d);
        }
    }
    builder.finish()
}

/// Mass matrix weighted by `|u|^(delta-1)`.
pub fn assemble_nonlinear_mass(space: &HpSpace, u: &DiscreteField, delta: u32) -> Result<SymSparseMatrix> {
    if !(2..=4).contains(&delta) {
        return Err(Error::InvalidParameter { name: "delta", reason: "must be 2, 3 or 4" });
    }
    if u.coeffs().len() != space.ndofs() {
        return Err(Error::DimensionMismatch { expected: space.ndofs(), found: u.coeffs().len() });
    }
    let power = (delta - 1) as i32;
    let mesh = space.mesh();
    let d = mesh.d;
    let mut builder = BlockBuilder::new(&space.block_sizes());
    for el in &mesh.elements {
        let p = space.degree(el.id);
        let rule = element_rule(el, d, p + NONLINEAR_EXTRA_POINTS);
        let blk = builder.block_mut(el.id, el.id);
        add_state_mass(el, p, d, &rule, u.local(el.id), blk, |uval| float::powi(uval.abs(), power));
    }
    Ok(builder.finish())
}

/// Reference coordinates of one axis of a cell.
fn axis_reference(el: &Element, k: usize, nodes: &[f64]) -> Vec<f64> {
    nodes.iter().map(|&x| 2.0 * (x - el.lower[k]) / el.size[k] - 1.0).collect()
}

fn cell_tables(el: &Element, p: usize, d: usize, cell: &TensorCell) -> [Table; 3] {
    let mut t = [Table::unit(), Table::unit(), Table::unit()];
    for k in 0..d {
        t[k] = Table::legendre(p, &axis_reference(el, k, &cell.nodes[k]), false);
    }
    t
}

/// Adds `Σ_q w_q g(x_q) φ_i φ_j` for a coefficient depending on position only.
fn add_rule_mass<G: Fn(&Point) -> f64>(el: &Element, p: usize, d: usize, rule: &ElementRule, blk: &mut [f64], g: G) {
    for cell in &rule.cells {
        let t = cell_tables(el, p, d, cell);
        let mut w = Vec::with_capacity(cell.len());
        cell.for_each(|x, wq| w.push(wq * g(&x)));
        tensor::add_weighted_mass([&t[0], &t[1], &t[2]], &w, blk);
    }
}

/// Adds `Σ_q w_q g(u(x_q)) φ_i φ_j` for the local expansion `coeffs`.
fn add_state_mass<G: Fn(f64) -> f64>(el: &Element, p: usize, d: usize, rule: &ElementRule, coeffs: &[f64], blk: &mut [f64], g: G) {
    for cell in &rule.cells {
        let t = cell_tables(el, p, d, cell);
        let uq = tensor::interpolate([&t[0], &t[1], &t[2]], coeffs);
        let mut w = Vec::with_capacity(cell.len());
        let mut q = 0;
        cell.for_each(|_, wq| {
            w.push(wq * g(uq[q]));
            q += 1;
        });
        tensor::add_weighted_mass([&t[0], &t[1], &t[2]], &w, blk);
    }
}

/// `(∇φ_i, ∇φ_j)_K` from the exact 1D Legendre mass and stiffness.
fn add_stiffness(el: &Element, p: usize, d: usize, blk: &mut [f64]) {
    let m = p + 1;
    let nb = m.pow(d as u32);
    let jac = el.measure(d) / float::powi(2.0, d as i32);
    let mut mass1 = vec![0.0; m];
    for (a, v) in mass1.iter_mut().enumerate() {
        *v = legendre_norm_sq(a);
    }
    let stride = |k: usize| m.pow(k as u32);
    for k in 0..d {
        let scale = jac * 4.0 / (el.size[k] * el.size[k]);
        let sk = stride(k);
        for i in 0..nb {
            let ak = (i / sk) % m;
            let mut other = 1.0;
            for kk in (0..d).filter(|&kk| kk != k) {
                other *= mass1[(i / stride(kk)) % m];
            }
            let base = i - ak * sk;
            let mut bk = ak % 2;
            while bk < m {
                let j = base + bk * sk;
                blk[i * nb + j] += scale * other * legendre_stiffness(ak, bk);
                bk += 2;
            }
        }
    }
}

/// Values and normal derivatives of one owner's basis on a face grid.
struct Trace {
    el: usize,
    nb: usize,
    /// `values[i * nq + q]`.
    values: Vec<f64>,
    /// `∂_axis φ_i`, physical.
    normal_derivs: Vec<f64>,
}

fn face_trace(space: &HpSpace, el_id: usize, face: &Face, cell: &TensorCell) -> Trace {
    let mesh = space.mesh();
    let d = mesh.d;
    let el = &mesh.elements[el_id];
    let p = space.degree(el_id);
    let m = p + 1;
    let k = face.axis;
    let upper = (face.lower[k] - el.upper(k)).abs() < (face.lower[k] - el.lower[k]).abs();
    let shape = cell.shape();
    let nq: usize = shape.iter().product();
    let mut tabs: [Vec<f64>; 3] = [vec![1.0], vec![1.0], vec![1.0]];
    let mut dtab: Vec<f64> = vec![0.0; m];
    for t in 0..d {
        if t == k {
            tabs[t] = (0..m).map(|a| legendre_at_end(a, upper)).collect();
            dtab = (0..m).map(|a| legendre_deriv_at_end(a, upper) * 2.0 / el.size[k]).collect();
        } else {
            let xi = axis_reference(el, t, &cell.nodes[t]);
            let tb = Table::legendre(p, &xi, false);
            tabs[t] = tb.data;
        }
    }
    let modes = space.modes(el_id);
    let nb = modes.iter().product();
    let mut values = vec![0.0; nb * nq];
    let mut normal_derivs = vec![0.0; nb * nq];
    // Table lookup: axis t, mode a, 1D point q -> tabs[t][a * n_t + q] (normal axis has n_t = 1).
    let npt = |t: usize| if t == k { 1 } else { shape[t] };
    let mut a = [0usize; 3];
    for i in 0..nb {
        a[0] = i % modes[0];
        a[1] = (i / modes[0]) % modes[1];
        a[2] = i / (modes[0] * modes[1]);
        let mut q = 0;
        for q2 in 0..shape[2] {
            for q1 in 0..shape[1] {
                for q0 in 0..shape[0] {
                    let qq = [q0, q1, q2];
                    let mut v = 1.0;
                    let mut dv = 1.0;
                    for t in 0..3 {
                        if t >= d {
                            continue;
                        }
                        let val = tabs[t][a[t] * npt(t) + if t == k { 0 } else { qq[t] }];
                        v *= val;
                        dv *= if t == k { dtab[a[t]] } else { val };
                    }
                    values[i * nq + q] = v;
                    normal_derivs[i * nq + q] = dv;
                    q += 1;
                }
            }
        }
    }
    Trace { el: el_id, nb, values, normal_derivs }
}

fn add_face_terms(space: &HpSpace, face: &Face, alpha0: f64, builder: &mut BlockBuilder) {
    let d = space.dim();
    let pe = space.face_degree(face) as f64;
    let pen = alpha0 * pe * pe / face.h_e;
    let n = space.face_degree(face) + FACE_EXTRA_POINTS;
    let cell = face_rule(face, d, n);
    let mut w = Vec::with_capacity(cell.len());
    cell.for_each(|_, wq| w.push(wq));
    let nq = w.len();
    let (sides, avg): (Vec<(usize, f64)>, f64) = match face.kind {
        FaceKind::Interior => (vec![(face.minus, 1.0), (face.plus.expect("interior face"), -1.0)], 0.5),
        FaceKind::Boundary => (vec![(face.minus, face.normal_sign)], 1.0),
    };
    let traces: Vec<(Trace, f64)> = sides.iter().map(|&(el, s)| (face_trace(space, el, face, &cell), s)).collect();
    for (test, nu_t) in &traces {
        for (trial, nu_s) in &traces {
            let blk = builder.block_mut(test.el, trial.el);
            let ns = trial.nb;
            for i in 0..test.nb {
                let vt = &test.values[i * nq..(i + 1) * nq];
                let dt = &test.normal_derivs[i * nq..(i + 1) * nq];
                for j in 0..ns {
                    let vs = &trial.values[j * nq..(j + 1) * nq];
                    let ds = &trial.normal_derivs[j * nq..(j + 1) * nq];
                    let mut acc = 0.0;
                    for q in 0..nq {
                        acc += w[q]
                            * (-avg * ds[q] * nu_t * vt[q] - avg * dt[q] * nu_s * vs[q]
                                + pen * nu_s * nu_t * vs[q] * vt[q]);
                    }
                    blk[i * ns + j] += acc;
                }
            }
        }
    }
}

/// Discrete energy `½ a(u,u) + 1/(δ+1) ∫ |u|^(δ+1)`, as a debugging aid.
pub fn energy(space: &HpSpace, sip: &SymSparseMatrix, u: &DiscreteField, delta: Option<u32>) -> f64 {
    let mut e = 0.5 * sip.quad_form(u.coeffs());
    if let Some(delta) = delta {
        let d = space.dim();
        let mut s = 0.0;
        for el in &space.mesh().elements {
            let p = space.degree(el.id);
            let cell = element_rule(el, d, p + NONLINEAR_EXTRA_POINTS);
            let coeffs = u.local(el.id);
            for c in &cell.cells {
                let t = cell_tables(el, p, d, c);
                let uq = tensor::interpolate([&t[0], &t[1], &t[2]], coeffs);
                let mut q = 0;
                c.for_each(|_, w| {
                    s += w * float::powi(uq[q].abs(), delta as i32 + 1);
                    q += 1;
                });
            }
        }
        e += s / (delta as f64 + 1.0);
    }
    e
}
