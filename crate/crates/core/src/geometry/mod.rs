//! Domain descriptors, exact metrics and mesh generation.

mod domain;
mod generate;
mod mesh;

pub use domain::{interior_angles, polygon_perimeter, shoelace_area, Domain, DomainMetrics};
pub use generate::{
    ear_clip, generate_mesh, generate_mesh_with, grading_layers, refine_uniform, MeshOptions,
    DEFAULT_NODE_CAP, MAX_LAYERS,
};
pub use mesh::{BoundaryEdge, Mesh, MeshId};

use crate::scalar::Real;

/// Exact metrics of a domain.
pub fn metrics<T: Real>(domain: &Domain<T>) -> crate::Result<DomainMetrics<T>> {
    domain.metrics()
}
