use alloc::vec::Vec;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: &'static str },

    #[error("point ({x}, {y}, {z}) lies outside the domain")]
    PointOutsideDomain { x: f64, y: f64, z: f64 },

    #[error("face between elements {a} and {b} is not 1-irregular")]
    IrregularFace { a: usize, b: usize },

    #[error("element {element} face on axis {axis} is not fully covered by neighbours")]
    UncoveredFace { element: usize, axis: usize },

    #[error("element {0} does not have the singular point as a vertex")]
    NotSingularVertex(usize),

    #[error("non-finite entry in assembled matrix at block ({0}, {1})")]
    NonFinite(usize, usize),

    #[error("matrix is not positive definite (pivot {pivot} in block {block})")]
    NotPositiveDefinite { block: usize, pivot: f64 },

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("meshes are not nested: fine element {0} is not contained in a coarse element")]
    NotNested(usize),

    #[error("eigensolver did not converge: lambda = {lambda}, residual = {residual}")]
    EigNotConverged { lambda: f64, residual: f64, iterate: Vec<f64> },

    #[error("need at least 3 rows above the error floor for a fit, found {0}")]
    TooFewRows(usize),
}
