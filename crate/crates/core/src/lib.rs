//! Isotropically graded hp discontinuous Galerkin discretization of nonlinear
//! Schrodinger ground states `(-Δ + V + |u|^(δ-1)) u = λ u` on the unit cube
//! `(-1/2, 1/2)^d`, with a point singularity of `V` at the origin.
//!
//! The crate is `no_std` (it needs `alloc`). The pipeline is:
//!
//! 1. [`mesh::build_graded_mesh`] grades boxes geometrically toward the origin,
//! 2. [`hpspace::HpSpace`] assigns degrees growing linearly away from it,
//! 3. [`assembly`] builds the symmetric interior penalty operator and mass matrices,
//! 4. [`scf::solve_ground_state`] runs the fixed point on the nonlinearity, using
//!    [`eigsolve::smallest_eigenpair`] for every frozen linearization,
//! 5. [`analysis`] measures errors against a finer nested reference and fits
//!    exponential rates.
#![cfg_attr(not(test), no_std)]
// `!(x > 0.0)` is deliberate: NaN has to fail validation. Axis loops index
// several fixed-size arrays at once.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;
#[cfg(feature = "std")]
extern crate std;

pub mod analysis;
pub mod assembly;
pub mod cholesky;
mod dense;
pub mod eigsolve;
mod error;
mod float;
mod tensor;
pub mod hpspace;
pub mod mesh;
pub mod quadrature;
pub mod refelem;
pub mod scf;
pub mod sparse;

pub use error::{Error, Result};

/// A point in up to three dimensions; unused trailing coordinates are zero.
pub type Point = [f64; 3];

pub use analysis::{fit_exponential, Abscissa, ConvergenceRecord, ErrorColumn, FitResult};
pub use assembly::{assemble_mass, assemble_nonlinear_mass, assemble_sip, PenaltyConfig, Potential};
pub use eigsolve::{smallest_eigenpair, EigOptions, EigResult};
pub use hpspace::{DegreeRounding, DiscreteField, HpSpace};
pub use mesh::{build_graded_mesh, Element, Face, FaceKind, GradedMesh};
pub use scf::{solve_ground_state, Nonlinearity, ScfConfig, ScfReport};
pub use sparse::SymSparseMatrix;
