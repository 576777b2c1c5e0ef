use super::{ElementShape, SurfaceElement};

/// Region of a root element's intrinsic coordinate space.
///
/// Quads use `[-1, 1]^2`; triangles use the unit reference triangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ParamCell {
    Rect { xi: [f64; 2], eta: [f64; 2] },
    Tri([[f64; 2]; 3]),
}

impl ParamCell {
    pub fn whole(shape: ElementShape) -> Self {
        match shape {
            ElementShape::Quad => ParamCell::Rect {
                xi: [-1.0, 1.0],
                eta: [-1.0, 1.0],
            },
            ElementShape::Triangle => ParamCell::Tri([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]),
        }
    }

    /// Root coordinates of the point with local coordinates `(a, b)`,
    /// using the same local conventions as [`SurfaceElement::map`].
    pub fn to_root(&self, a: f64, b: f64) -> [f64; 2] {
        match self {
            ParamCell::Rect { xi, eta } => [
                xi[0] + 0.5 * (a + 1.0) * (xi[1] - xi[0]),
                eta[0] + 0.5 * (b + 1.0) * (eta[1] - eta[0]),
            ],
            ParamCell::Tri([p0, p1, p2]) => [
                p0[0] + (p1[0] - p0[0]) * a + (p2[0] - p0[0]) * b,
                p0[1] + (p1[1] - p0[1]) * a + (p2[1] - p0[1]) * b,
            ],
        }
    }

    /// Splits the cell the same way [`SurfaceElement::subdivide4`] splits
    /// the element.
    pub fn subdivide4(&self) -> [ParamCell; 4] {
        match *self {
            ParamCell::Rect { xi, eta } => {
                let xm = 0.5 * (xi[0] + xi[1]);
                let em = 0.5 * (eta[0] + eta[1]);
                let r = |x0, x1, e0, e1| ParamCell::Rect {
                    xi: [x0, x1],
                    eta: [e0, e1],
                };
                [
                    r(xi[0], xm, eta[0], em),
                    r(xm, xi[1], eta[0], em),
                    r(xm, xi[1], em, eta[1]),
                    r(xi[0], xm, em, eta[1]),
                ]
            }
            ParamCell::Tri([v0, v1, v2]) => {
                let mid = |a: [f64; 2], b: [f64; 2]| [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])];
                let (m01, m12, m20) = (mid(v0, v1), mid(v1, v2), mid(v2, v0));
                [
                    ParamCell::Tri([v0, m01, m20]),
                    ParamCell::Tri([m01, v1, m12]),
                    ParamCell::Tri([m20, m12, v2]),
                    ParamCell::Tri([m01, m12, m20]),
                ]
            }
        }
    }
}

/// A sub-element together with its footprint in the root element's
/// intrinsic coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Patch {
    pub element: SurfaceElement,
    pub cell: ParamCell,
    pub depth: usize,
}

impl Patch {
    pub fn whole(e: &SurfaceElement) -> Self {
        Self {
            element: e.clone(),
            cell: ParamCell::whole(e.shape()),
            depth: 0,
        }
    }

    pub fn subdivide4(&self) -> [Patch; 4] {
        let [e0, e1, e2, e3] = self.element.subdivide4();
        let [c0, c1, c2, c3] = self.cell.subdivide4();
        let depth = self.depth + 1;
        [
            Patch {
                element: e0,
                cell: c0,
                depth,
            },
            Patch {
                element: e1,
                cell: c1,
                depth,
            },
            Patch {
                element: e2,
                cell: c2,
                depth,
            },
            Patch {
                element: e3,
                cell: c3,
                depth,
            },
        ]
    }
}
