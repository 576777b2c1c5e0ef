//! Built-in test enclosures: a unit cube and an L-shaped room, both meshed
//! from a regular lattice so that surface elements and medium cells align.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::geometry::{Enclosure, GeometryError, Point3, SurfaceElement, SurfaceMesh, Vec3, VoxelGrid};

/// Emissivity and temperature of one wall face.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WallState {
    pub emissivity: f64,
    pub temperature: f64,
}

/// Meshes the union of occupied lattice cells.
///
/// Every cell face between an occupied and an empty (or out of range) cell
/// becomes one quad whose normal points into the occupied cell. `wall`
/// receives the face centroid and inward normal. The returned grid is the
/// lattice itself, with `medium_t` in occupied cells and 0 K elsewhere.
pub fn lattice_enclosure(
    origin: Point3,
    spacing: [f64; 3],
    dims: [usize; 3],
    occupied: impl Fn([usize; 3]) -> bool,
    wall: impl Fn(&Point3, &Vec3) -> WallState,
    medium_t: f64,
) -> Result<Enclosure, GeometryError> {
    let inside = |ijk: [i64; 3]| {
        (0..3).all(|a| ijk[a] >= 0 && (ijk[a] as usize) < dims[a])
            && occupied([ijk[0] as usize, ijk[1] as usize, ijk[2] as usize])
    };
    let mut nodes = Vec::new();
    let mut node_ids: HashMap<[i64; 3], usize> = HashMap::new();
    let mut connectivity = Vec::new();
    let mut emissivity = Vec::new();
    let mut temperature = Vec::new();
    let mut node = |idx: [i64; 3], nodes: &mut Vec<Point3>| -> usize {
        *node_ids.entry(idx).or_insert_with(|| {
            nodes.push(Point3::new(
                origin.x + idx[0] as f64 * spacing[0],
                origin.y + idx[1] as f64 * spacing[1],
                origin.z + idx[2] as f64 * spacing[2],
            ));
            nodes.len() - 1
        })
    };

    for k in 0..dims[2] as i64 {
        for j in 0..dims[1] as i64 {
            for i in 0..dims[0] as i64 {
                let cell = [i, j, k];
                if !inside(cell) {
                    continue;
                }
                for axis in 0..3 {
                    for side in [0i64, 1] {
                        let mut nb = cell;
                        nb[axis] += if side == 0 { -1 } else { 1 };
                        if inside(nb) {
                            continue;
                        }
                        let (b, c) = ((axis + 1) % 3, (axis + 2) % 3);
                        let corner = |db: i64, dc: i64| {
                            let mut idx = cell;
                            idx[axis] += side;
                            idx[b] += db;
                            idx[c] += dc;
                            idx
                        };
                        // Counter-clockwise in (b, c) gives normal +axis,
                        // which points inward on the low side.
                        let mut quad = [corner(0, 0), corner(1, 0), corner(1, 1), corner(0, 1)];
                        if side == 1 {
                            quad.swap(1, 3);
                        }
                        let ids: Vec<usize> = quad.iter().map(|&q| node(q, &mut nodes)).collect();
                        let verts: Vec<Point3> = ids.iter().map(|&n| nodes[n]).collect();
                        let e = SurfaceElement::new(&verts, 1.0)?;
                        let state = wall(&e.centroid(), &e.normal());
                        connectivity.push(ids);
                        emissivity.push(state.emissivity);
                        temperature.push(state.temperature);
                    }
                }
            }
        }
    }

    let mesh = SurfaceMesh::new(nodes, connectivity, emissivity, temperature)?;
    mesh.check_closed()?;
    let mut cell_t = Vec::with_capacity(dims[0] * dims[1] * dims[2]);
    for k in 0..dims[2] {
        for j in 0..dims[1] {
            for i in 0..dims[0] {
                cell_t.push(if occupied([i, j, k]) { medium_t } else { 0.0 });
            }
        }
    }
    let grid = VoxelGrid::new(origin, spacing, dims, cell_t)?;
    Enclosure::new(mesh, grid)
}

/// Unit cube with `n x n` elements per face and `n^3` cells.
pub fn cube(n: usize, wall: impl Fn(&Point3, &Vec3) -> WallState, medium_t: f64) -> Result<Enclosure, GeometryError> {
    let h = 1.0 / n as f64;
    lattice_enclosure(Point3::origin(), [h; 3], [n; 3], |_| true, wall, medium_t)
}

/// The room `[0,1] x [0,3] x [0,3]` minus the block `y > 1, z > 2`, meshed
/// with `n` elements per meter.
pub fn lshape(n: usize, wall: impl Fn(&Point3, &Vec3) -> WallState, medium_t: f64) -> Result<Enclosure, GeometryError> {
    let h = 1.0 / n as f64;
    lattice_enclosure(
        Point3::origin(),
        [h; 3],
        [n, 3 * n, 3 * n],
        |[_, j, k]| !(j >= n && k >= 2 * n),
        wall,
        medium_t,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BuiltinCase {
    /// Unit cube, black walls, hot floor, purely scattering medium.
    Cube,
    /// L-shaped room, black walls at 500 K, absorbing medium at 1000 K.
    Lshape,
}

impl BuiltinCase {
    /// Generates the enclosure at the given resolution (elements per meter).
    ///
    /// The cube's floor `z = 0` is held at `reference_t` and every other
    /// wall at 0 K.
    pub fn enclosure(self, resolution: usize, reference_t: f64) -> Result<Enclosure, GeometryError> {
        if resolution == 0 {
            return Err(GeometryError::InvalidMesh("resolution must be at least 1".into()));
        }
        match self {
            BuiltinCase::Cube => cube(
                resolution,
                |c, _| WallState {
                    emissivity: 1.0,
                    temperature: if c.z.abs() < 1e-12 { reference_t } else { 0.0 },
                },
                0.0,
            ),
            BuiltinCase::Lshape => lshape(
                resolution,
                |_, _| WallState {
                    emissivity: 1.0,
                    temperature: 500.0,
                },
                1000.0,
            ),
        }
    }

    /// Default reference temperature used for non-dimensional output.
    pub fn reference_temperature(self) -> f64 {
        1000.0
    }
}
