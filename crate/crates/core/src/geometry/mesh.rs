use std::collections::HashMap;

use super::{GeometryError, Point3, SurfaceElement, VoxelGrid};

/// Flat-element boundary mesh with per-element emissivity and temperature.
#[derive(Debug, Clone)]
pub struct SurfaceMesh {
    nodes: Vec<Point3>,
    connectivity: Vec<Vec<usize>>,
    elements: Vec<SurfaceElement>,
    temperature: Vec<f64>,
}

impl SurfaceMesh {
    /// Builds a mesh from node coordinates and element connectivity.
    ///
    /// Closure is not checked here; see [`check_closed`](Self::check_closed).
    pub fn new(
        nodes: Vec<Point3>,
        connectivity: Vec<Vec<usize>>,
        emissivity: Vec<f64>,
        temperature: Vec<f64>,
    ) -> Result<Self, GeometryError> {
        if emissivity.len() != connectivity.len() || temperature.len() != connectivity.len() {
            return Err(GeometryError::InvalidMesh(
                "one emissivity and temperature per element required".into(),
            ));
        }
        let mut elements = Vec::with_capacity(connectivity.len());
        for (k, conn) in connectivity.iter().enumerate() {
            let mut verts = Vec::with_capacity(conn.len());
            for &n in conn {
                verts.push(
                    *nodes.get(n).ok_or_else(|| {
                        GeometryError::InvalidMesh(format!("element {k} references missing node {n}"))
                    })?,
                );
            }
            let e = SurfaceElement::new(&verts, emissivity[k]).map_err(|err| GeometryError::Element {
                index: k,
                source: Box::new(err),
            })?;
            elements.push(e);
        }
        if temperature.iter().any(|t| !(*t >= 0.0 && t.is_finite())) {
            return Err(GeometryError::InvalidMesh(
                "temperatures must be finite and >= 0".into(),
            ));
        }
        Ok(Self {
            nodes,
            connectivity,
            elements,
            temperature,
        })
    }

    /// Builds a mesh from loose elements, merging coincident vertices.
    pub fn from_elements(elements: &[SurfaceElement], temperature: Vec<f64>) -> Result<Self, GeometryError> {
        let mut nodes: Vec<Point3> = Vec::new();
        let mut lookup: HashMap<[i64; 3], usize> = HashMap::new();
        let scale = elements.iter().map(|e| e.diameter()).fold(0.0, f64::max).max(1e-300);
        let mut connectivity = Vec::with_capacity(elements.len());
        for e in elements {
            let conn = e
                .vertices()
                .iter()
                .map(|v| {
                    let key = [
                        (v.x / scale * 1e9).round() as i64,
                        (v.y / scale * 1e9).round() as i64,
                        (v.z / scale * 1e9).round() as i64,
                    ];
                    *lookup.entry(key).or_insert_with(|| {
                        nodes.push(*v);
                        nodes.len() - 1
                    })
                })
                .collect();
            connectivity.push(conn);
        }
        let emissivity = elements.iter().map(|e| e.emissivity()).collect();
        Self::new(nodes, connectivity, emissivity, temperature)
    }

    pub fn nodes(&self) -> &[Point3] {
        &self.nodes
    }

    pub fn connectivity(&self) -> &[Vec<usize>] {
        &self.connectivity
    }

    pub fn elements(&self) -> &[SurfaceElement] {
        &self.elements
    }

    pub fn element(&self, k: usize) -> &SurfaceElement {
        &self.elements[k]
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Element temperatures in K.
    pub fn temperature(&self) -> &[f64] {
        &self.temperature
    }

    pub fn total_area(&self) -> f64 {
        self.elements.iter().map(|e| e.area()).sum()
    }

    pub fn min_emissivity(&self) -> f64 {
        self.elements.iter().map(|e| e.emissivity()).fold(1.0, f64::min)
    }

    /// Largest node-to-node distance.
    pub fn diameter(&self) -> f64 {
        let mut d: f64 = 0.0;
        for (i, a) in self.nodes.iter().enumerate() {
            for b in &self.nodes[i + 1..] {
                d = d.max((a - b).norm_squared());
            }
        }
        d.sqrt()
    }

    pub fn bounding_box(&self) -> (Point3, Point3) {
        let mut lo = Point3::new(f64::INFINITY, f64::INFINITY, f64::INFINITY);
        let mut hi = Point3::new(f64::NEG_INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
        for n in &self.nodes {
            for a in 0..3 {
                lo[a] = lo[a].min(n[a]);
                hi[a] = hi[a].max(n[a]);
            }
        }
        (lo, hi)
    }

    /// Verifies that every edge is shared by exactly two elements.
    pub fn check_closed(&self) -> Result<(), GeometryError> {
        let mut edges: HashMap<(usize, usize), usize> = HashMap::new();
        for conn in &self.connectivity {
            for i in 0..conn.len() {
                let (a, b) = (conn[i], conn[(i + 1) % conn.len()]);
                *edges.entry((a.min(b), a.max(b))).or_default() += 1;
            }
        }
        let mut bad: Vec<_> = edges.into_iter().filter(|(_, count)| *count != 2).collect();
        if let Some(((a, b), count)) = bad.iter().min().copied() {
            bad.clear();
            return Err(GeometryError::OpenMesh { a, b, count });
        }
        Ok(())
    }

    /// Total signed solid angle subtended by the mesh at `x`.
    ///
    /// Equals `+-4 pi` for points inside a closed mesh and `0` outside.
    pub fn solid_angle(&self, x: &Point3) -> f64 {
        let mut total = 0.0;
        for e in &self.elements {
            let v = e.vertices();
            for i in 1..v.len() - 1 {
                total += triangle_solid_angle(x, &v[0], &v[i], &v[i + 1]);
            }
        }
        total
    }

    pub fn contains(&self, x: &Point3) -> bool {
        self.solid_angle(x).abs() > 2.0 * std::f64::consts::PI
    }
}

fn triangle_solid_angle(x: &Point3, a: &Point3, b: &Point3, c: &Point3) -> f64 {
    let (a, b, c) = (a - x, b - x, c - x);
    let (la, lb, lc) = (a.norm(), b.norm(), c.norm());
    let num = a.dot(&b.cross(&c));
    let den = la * lb * lc + a.dot(&b) * lc + a.dot(&c) * lb + b.dot(&c) * la;
    2.0 * num.atan2(den)
}

/// A closed surface mesh together with the voxel grid of its medium.
#[derive(Debug, Clone)]
pub struct Enclosure {
    mesh: SurfaceMesh,
    grid: VoxelGrid,
    interior: Vec<bool>,
    diameter: f64,
}

impl Enclosure {
    /// Pairs a mesh with a grid whose box must contain the mesh.
    ///
    /// Cells whose centers lie inside the mesh form the medium.
    pub fn new(mesh: SurfaceMesh, grid: VoxelGrid) -> Result<Self, GeometryError> {
        let (lo, hi) = mesh.bounding_box();
        let (glo, ghi) = (grid.origin(), grid.upper());
        let tol = 1e-9 * mesh.diameter().max(1e-300);
        for a in 0..3 {
            if lo[a] < glo[a] - tol || hi[a] > ghi[a] + tol {
                return Err(GeometryError::InvalidGrid(
                    "grid box must contain the mesh bounding box".into(),
                ));
            }
        }
        let interior = (0..grid.cell_count())
            .map(|c| mesh.contains(&grid.cell_center(c)))
            .collect::<Vec<_>>();
        if !interior.iter().any(|&b| b) {
            return Err(GeometryError::InvalidGrid("no grid cell lies inside the mesh".into()));
        }
        let diameter = mesh.diameter();
        Ok(Self {
            mesh,
            grid,
            interior,
            diameter,
        })
    }

    pub fn mesh(&self) -> &SurfaceMesh {
        &self.mesh
    }

    pub fn grid(&self) -> &VoxelGrid {
        &self.grid
    }

    /// Per-cell flag: whether the cell belongs to the medium.
    pub fn interior(&self) -> &[bool] {
        &self.interior
    }

    pub fn interior_cells(&self) -> Vec<usize> {
        (0..self.interior.len()).filter(|&c| self.interior[c]).collect()
    }

    /// Diameter of the domain.
    pub fn diameter(&self) -> f64 {
        self.diameter
    }
}
