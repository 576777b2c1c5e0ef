//! JSON mesh files.
//!
//! ```json
//! {
//!   "nodes": [[0.0, 0.0, 0.0], ...],
//!   "elements": [{"nodes": [0, 1, 2, 3], "epsilon": 1.0, "T": 300.0}, ...],
//!   "grid": {"origin": [0, 0, 0], "spacing": [0.1, 0.1, 0.1], "dims": [10, 10, 10], "T": [...]}
//! }
//! ```
//!
//! Element vertices are ordered so that the right-hand normal points into
//! the medium. Grid temperatures are listed with x varying fastest.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Enclosure, GeometryError, Point3, SurfaceMesh, VoxelGrid};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ElementRecord {
    pub nodes: Vec<usize>,
    pub epsilon: f64,
    #[serde(rename = "T")]
    pub temperature: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridRecord {
    pub origin: [f64; 3],
    pub spacing: [f64; 3],
    pub dims: [usize; 3],
    #[serde(rename = "T")]
    pub temperature: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MeshFile {
    pub nodes: Vec<[f64; 3]>,
    pub elements: Vec<ElementRecord>,
    pub grid: GridRecord,
}

impl MeshFile {
    pub fn from_enclosure(enc: &Enclosure) -> Self {
        let mesh = enc.mesh();
        let grid = enc.grid();
        Self {
            nodes: mesh.nodes().iter().map(|p| [p.x, p.y, p.z]).collect(),
            elements: mesh
                .connectivity()
                .iter()
                .zip(mesh.elements())
                .zip(mesh.temperature())
                .map(|((conn, e), &t)| ElementRecord {
                    nodes: conn.clone(),
                    epsilon: e.emissivity(),
                    temperature: t,
                })
                .collect(),
            grid: GridRecord {
                origin: [grid.origin().x, grid.origin().y, grid.origin().z],
                spacing: grid.spacing(),
                dims: grid.dims(),
                temperature: grid.temperature().to_vec(),
            },
        }
    }

    /// Validates the file contents and builds a closed enclosure.
    pub fn into_enclosure(self) -> Result<Enclosure, GeometryError> {
        let nodes = self.nodes.iter().map(|n| Point3::new(n[0], n[1], n[2])).collect();
        let mut conn = Vec::with_capacity(self.elements.len());
        let mut eps = Vec::with_capacity(self.elements.len());
        let mut temp = Vec::with_capacity(self.elements.len());
        for e in self.elements {
            conn.push(e.nodes);
            eps.push(e.epsilon);
            temp.push(e.temperature);
        }
        let mesh = SurfaceMesh::new(nodes, conn, eps, temp)?;
        mesh.check_closed()?;
        let g = self.grid;
        let grid = VoxelGrid::new(
            Point3::new(g.origin[0], g.origin[1], g.origin[2]),
            g.spacing,
            g.dims,
            g.temperature,
        )?;
        Enclosure::new(mesh, grid)
    }
}

pub fn read_enclosure(path: &Path) -> Result<Enclosure, GeometryError> {
    let text = fs::read_to_string(path)?;
    let file: MeshFile = serde_json::from_str(&text)?;
    file.into_enclosure()
}

pub fn write_enclosure(path: &Path, enc: &Enclosure) -> Result<(), GeometryError> {
    let text = serde_json::to_string(&MeshFile::from_enclosure(enc))?;
    fs::write(path, text)?;
    Ok(())
}
