//! Crate-wide error type.

/// Errors raised by geometry classification, element construction and solves.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// The interface cuts the mesh in a way the construction excludes
    /// (vertex on the interface, an edge crossed twice, more than two
    /// boundary crossings per element, ...). Refining the mesh or
    /// perturbing the interface resolves it.
    #[error("interface assumption violated: {0}")]
    AssumptionViolation(String),

    /// Interface segments do not chain into the expected closed polyline.
    #[error("interface topology error: {0}")]
    Topology(String),

    #[error("unsupported quadrature degree {0}")]
    UnsupportedDegree(usize),

    /// A sampled reciprocal coefficient was non-positive.
    #[error("non-positive coefficient sample: beta_plus={0:e}, beta_minus={1:e}")]
    NonPositiveCoefficient(f64, f64),

    /// The projected tangent weight left [0,1]; the triangle violates the
    /// maximum-angle condition required on interface elements.
    #[error("maximum-angle condition violated: theta={theta:e} outside [0,1] on element {element}")]
    MaxAngleViolation { element: usize, theta: f64 },

    #[error("degenerate triangle: area={0:e}")]
    DegenerateTriangle(f64),

    /// Factorization failure; with the natural boundary term present the
    /// saddle-point system is nonsingular, so this signals broken assembly.
    #[error("singular system: {0}")]
    SingularSystem(String),

    #[error("solver did not converge: {0}")]
    NonConvergence(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
