//! Unfitted mixed finite elements for 2D elliptic interface problems.
//!
//! The library discretizes the flux form of `-div(beta_tilde grad u) = f`
//! on triangulations that do not fit the interface. On elements cut by the
//! interface, the lowest-order Raviart-Thomas shape functions are replaced
//! by an immersed variant satisfying discrete interface conditions, while
//! the degrees of freedom (mean normal fluxes on edges and cell averages)
//! stay those of the standard method. An over-penalization of normal-trace
//! jumps on cut edges restores optimal first-order convergence.
//!
//! Modules follow the pipeline:
//!
//! * [`geometry`] — structured meshes, level sets, cut-cell classification
//! * [`quadrature`] — triangle/segment rules and their cut-aware composites
//! * [`elements`] — local RT0 and immersed bases, interpolation operators
//! * [`assembly`] — global DOF management, saddle-point system assembly
//! * [`solver`] — direct and Schur-complement backends
//! * [`problems`] — built-in benchmark problems with manufactured solutions
//! * [`analysis`] — error norms, convergence tables, structural checks
//! * [`suites`] — seeded property suites used by the CLI and tests

pub mod analysis;
pub mod assembly;
pub mod elements;
pub mod error;
pub mod geometry;
pub mod problems;
pub mod quadrature;
pub mod solver;
pub mod suites;

pub use error::{Error, Result};

/// 2D point/vector type used throughout.
pub type Vec2 = nalgebra::Vector2<f64>;

/// Rotation by -pi/2 (90 degrees clockwise): maps a normal to its tangent.
#[inline]
pub fn rotate_cw(v: Vec2) -> Vec2 {
    Vec2::new(v.y, -v.x)
}

/// Rotation by +pi/2 (90 degrees counterclockwise).
#[inline]
pub fn rotate_ccw(v: Vec2) -> Vec2 {
    Vec2::new(-v.y, v.x)
}
