//! Flat-element surface meshes, the medium voxel grid, and segment queries.

mod element;
mod grid;
pub mod io;
mod mesh;
mod patch;
mod segment;

use thiserror::Error;

pub use element::{bilinear_weights, ElementShape, SurfaceElement, INTERSECTION_TOL, PLANARITY_TOL};
pub use grid::{VoxelGrid, VoxelSpan};
pub use mesh::{Enclosure, SurfaceMesh};
pub use patch::{ParamCell, Patch};
pub use segment::{ray_intersect_element, Segment};

pub type Point3 = nalgebra::Point3<f64>;
pub type Vec3 = nalgebra::Vector3<f64>;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("element needs 3 or 4 vertices, got {0}")]
    VertexCount(usize),
    #[error("non-finite vertex coordinate")]
    NonFinite,
    #[error("emissivity {0} outside (0, 1]")]
    Emissivity(f64),
    #[error("degenerate element (area {area:e})")]
    DegenerateElement { area: f64 },
    #[error("quad is not planar (deviation {deviation:e})")]
    NonPlanar { deviation: f64 },
    #[error("element {index}: {source}")]
    Element {
        index: usize,
        #[source]
        source: Box<GeometryError>,
    },
    #[error("mesh is not closed: edge ({a}, {b}) is shared by {count} elements")]
    OpenMesh { a: usize, b: usize, count: usize },
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("segment lies entirely outside the grid")]
    OutsideGrid,
    #[error("mesh file: {0}")]
    Io(#[from] std::io::Error),
    #[error("mesh file: {0}")]
    Json(#[from] serde_json::Error),
}
