//! Mesh construction, interface representation and cut-cell geometry.

mod cut;
mod level_set;
mod mesh;

pub use cut::{
    classify_mesh, cut_from_chord, polyline_interface, Classification, CutTopology, EdgeCut,
    ElementClass, InterfacePolyline, Side,
};
pub use level_set::LevelSet;
pub use mesh::{build_uniform_mesh, Edge, Mesh, Rect, Triangle};
