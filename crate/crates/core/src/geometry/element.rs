use serde::{Deserialize, Serialize};

use super::{GeometryError, Point3, Vec3};

/// Relative planarity tolerance for quadrilaterals, as a fraction of the
/// element diameter.
pub const PLANARITY_TOL: f64 = 1e-9;

/// Relative tolerance (fraction of diameter) used by intersection and
/// facing tests.
pub const INTERSECTION_TOL: f64 = 1e-10;

const DEGENERATE_AREA_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ElementShape {
    Triangle,
    Quad,
}

impl ElementShape {
    pub fn vertex_count(self) -> usize {
        match self {
            ElementShape::Triangle => 3,
            ElementShape::Quad => 4,
        }
    }
}

/// A flat triangular or quadrilateral boundary element.
///
/// The normal follows the right-hand rule on the vertex order. Enclosure
/// meshes order vertices so that it points into the medium.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceElement {
    shape: ElementShape,
    vertices: [Point3; 4],
    normal: Vec3,
    centroid: Point3,
    area: f64,
    diameter: f64,
    circumradius: f64,
    emissivity: f64,
}

impl SurfaceElement {
    /// Builds an element from 3 or 4 counter-clockwise vertices.
    pub fn new(vertices: &[Point3], emissivity: f64) -> Result<Self, GeometryError> {
        let shape = match vertices.len() {
            3 => ElementShape::Triangle,
            4 => ElementShape::Quad,
            n => return Err(GeometryError::VertexCount(n)),
        };
        if vertices.iter().any(|v| !v.coords.iter().all(|c| c.is_finite())) {
            return Err(GeometryError::NonFinite);
        }
        if !(emissivity > 0.0 && emissivity <= 1.0) {
            return Err(GeometryError::Emissivity(emissivity));
        }

        let mut diameter: f64 = 0.0;
        for (i, a) in vertices.iter().enumerate() {
            for b in &vertices[i + 1..] {
                diameter = diameter.max((a - b).norm());
            }
        }

        let area_vec = match shape {
            ElementShape::Triangle => (vertices[1] - vertices[0]).cross(&(vertices[2] - vertices[0])),
            ElementShape::Quad => (vertices[2] - vertices[0]).cross(&(vertices[3] - vertices[1])),
        };
        let area = 0.5 * area_vec.norm();
        if diameter == 0.0 || area <= DEGENERATE_AREA_TOL * diameter * diameter {
            return Err(GeometryError::DegenerateElement { area });
        }
        let normal = area_vec / (2.0 * area);

        let centroid =
            Point3::from(vertices.iter().fold(Vec3::zeros(), |acc, v| acc + v.coords) / vertices.len() as f64);

        if shape == ElementShape::Quad {
            let deviation = vertices
                .iter()
                .map(|v| normal.dot(&(v - centroid)).abs())
                .fold(0.0, f64::max);
            if deviation > PLANARITY_TOL * diameter {
                return Err(GeometryError::NonPlanar { deviation });
            }
            // Each corner must turn the same way for a convex quad.
            for i in 0..4 {
                let a = vertices[i];
                let b = vertices[(i + 1) % 4];
                let c = vertices[(i + 2) % 4];
                if (b - a).cross(&(c - b)).dot(&normal) <= 0.0 {
                    return Err(GeometryError::DegenerateElement { area });
                }
            }
        }

        let mut verts = [vertices[0]; 4];
        verts[..vertices.len()].copy_from_slice(vertices);
        Ok(Self {
            shape,
            vertices: verts,
            normal,
            centroid,
            area,
            diameter,
            circumradius: circumradius(vertices, &centroid),
            emissivity,
        })
    }

    pub fn shape(&self) -> ElementShape {
        self.shape
    }

    pub fn vertices(&self) -> &[Point3] {
        &self.vertices[..self.shape.vertex_count()]
    }

    pub fn normal(&self) -> Vec3 {
        self.normal
    }

    pub fn centroid(&self) -> Point3 {
        self.centroid
    }

    pub fn area(&self) -> f64 {
        self.area
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    pub fn emissivity(&self) -> f64 {
        self.emissivity
    }

    /// Largest centroid-to-vertex distance.
    pub fn circumradius(&self) -> f64 {
        self.circumradius
    }

    /// Absolute tolerance used by intersection tests against this element.
    pub fn tolerance(&self) -> f64 {
        INTERSECTION_TOL * self.diameter
    }

    /// Signed distance of `x` from the element plane, positive on the normal side.
    pub fn plane_distance(&self, x: &Point3) -> f64 {
        self.normal.dot(&(x - self.centroid))
    }

    /// Maps intrinsic coordinates to a point on the element.
    ///
    /// Quads use the bilinear map on `[-1, 1]^2`. Triangles use the affine
    /// map on the unit reference triangle `u, v >= 0, u + v <= 1`.
    pub fn map(&self, a: f64, b: f64) -> Point3 {
        let v = &self.vertices;
        match self.shape {
            ElementShape::Triangle => v[0] + (v[1] - v[0]) * a + (v[2] - v[0]) * b,
            ElementShape::Quad => {
                let n = bilinear_weights(a, b);
                Point3::from(v[0].coords * n[0] + v[1].coords * n[1] + v[2].coords * n[2] + v[3].coords * n[3])
            }
        }
    }

    /// Area scale factor of [`map`](Self::map) at the given intrinsic coordinates.
    pub fn jacobian(&self, a: f64, b: f64) -> f64 {
        let v = &self.vertices;
        match self.shape {
            ElementShape::Triangle => 2.0 * self.area,
            ElementShape::Quad => {
                let dxi = ((v[1] - v[0]) * (1.0 - b) + (v[2] - v[3]) * (1.0 + b)) * 0.25;
                let deta = ((v[3] - v[0]) * (1.0 - a) + (v[2] - v[1]) * (1.0 + a)) * 0.25;
                dxi.cross(&deta).norm()
            }
        }
    }

    /// Whether `x`, assumed to lie in the element plane, is inside the
    /// element or on its boundary within `tol`.
    pub fn contains_in_plane(&self, x: &Point3, tol: f64) -> bool {
        let verts = self.vertices();
        let n = verts.len();
        (0..n).all(|i| {
            let a = verts[i];
            let b = verts[(i + 1) % n];
            let edge = b - a;
            let len = edge.norm();
            edge.cross(&(x - a)).dot(&self.normal) >= -tol * len
        })
    }

    /// Euclidean distance from `x` to the closed element.
    pub fn distance_to(&self, x: &Point3) -> f64 {
        let h = self.plane_distance(x);
        let proj = x - self.normal * h;
        if self.contains_in_plane(&proj, 0.0) {
            return h.abs();
        }
        let verts = self.vertices();
        let n = verts.len();
        (0..n)
            .map(|i| point_segment_distance(x, &verts[i], &verts[(i + 1) % n]))
            .fold(f64::INFINITY, f64::min)
    }

    /// Splits the element into four children that partition it.
    ///
    /// Triangles split at edge midpoints; quads split along the bilinear
    /// isolines `xi = 0` and `eta = 0`.
    pub fn subdivide4(&self) -> [SurfaceElement; 4] {
        let v = &self.vertices;
        let child = |pts: &[Point3]| self.child(pts);
        match self.shape {
            ElementShape::Triangle => {
                let m01 = midpoint(&v[0], &v[1]);
                let m12 = midpoint(&v[1], &v[2]);
                let m20 = midpoint(&v[2], &v[0]);
                [
                    child(&[v[0], m01, m20]),
                    child(&[m01, v[1], m12]),
                    child(&[m20, m12, v[2]]),
                    child(&[m01, m12, m20]),
                ]
            }
            ElementShape::Quad => {
                let m = |a: f64, b: f64| self.map(a, b);
                let c = m(0.0, 0.0);
                let (s, e, n, w) = (m(0.0, -1.0), m(1.0, 0.0), m(0.0, 1.0), m(-1.0, 0.0));
                [
                    child(&[v[0], s, c, w]),
                    child(&[s, v[1], e, c]),
                    child(&[c, e, v[2], n]),
                    child(&[w, c, n, v[3]]),
                ]
            }
        }
    }

    /// Builds a child sharing this element's plane, normal and emissivity.
    pub(crate) fn child(&self, pts: &[Point3]) -> SurfaceElement {
        let shape = if pts.len() == 3 {
            ElementShape::Triangle
        } else {
            ElementShape::Quad
        };
        let mut diameter: f64 = 0.0;
        for (i, a) in pts.iter().enumerate() {
            for b in &pts[i + 1..] {
                diameter = diameter.max((a - b).norm());
            }
        }
        let area = match shape {
            ElementShape::Triangle => 0.5 * (pts[1] - pts[0]).cross(&(pts[2] - pts[0])).norm(),
            ElementShape::Quad => 0.5 * (pts[2] - pts[0]).cross(&(pts[3] - pts[1])).norm(),
        };
        let centroid = Point3::from(pts.iter().fold(Vec3::zeros(), |acc, v| acc + v.coords) / pts.len() as f64);
        let mut verts = [pts[0]; 4];
        verts[..pts.len()].copy_from_slice(pts);
        SurfaceElement {
            shape,
            vertices: verts,
            normal: self.normal,
            centroid,
            area,
            diameter,
            circumradius: circumradius(pts, &centroid),
            emissivity: self.emissivity,
        }
    }
}

/// Bilinear Lagrange weights of the four quad corners at `(xi, eta)`.
pub fn bilinear_weights(xi: f64, eta: f64) -> [f64; 4] {
    [
        0.25 * (1.0 - xi) * (1.0 - eta),
        0.25 * (1.0 + xi) * (1.0 - eta),
        0.25 * (1.0 + xi) * (1.0 + eta),
        0.25 * (1.0 - xi) * (1.0 + eta),
    ]
}

fn circumradius(vertices: &[Point3], centroid: &Point3) -> f64 {
    vertices.iter().map(|v| (v - centroid).norm()).fold(0.0, f64::max)
}

fn midpoint(a: &Point3, b: &Point3) -> Point3 {
    Point3::from((a.coords + b.coords) * 0.5)
}

fn point_segment_distance(x: &Point3, a: &Point3, b: &Point3) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    let t = if len2 > 0.0 {
        ((x - a).dot(&ab) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    (x - (a + ab * t)).norm()
}
