//! Gauss rules on element patches, distance-adaptive refinement for nearly
//! singular integrands, and the discontinuous bilinear shape functions.

use std::num::NonZeroUsize;
use std::sync::OnceLock;

use gauss_quad::GaussLegendre;

use crate::geometry::{ElementShape, Patch, Point3};

const MAX_RULE: usize = 64;

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
///
/// # Panics
/// If `n` is zero or larger than 64.
pub fn gauss_legendre(n: usize) -> &'static [(f64, f64)] {
    static RULES: OnceLock<Vec<Vec<(f64, f64)>>> = OnceLock::new();
    assert!((1..=MAX_RULE).contains(&n), "Gauss-Legendre order {n} out of range");
    let rules = RULES.get_or_init(|| {
        (1..=MAX_RULE)
            .map(|k| {
                GaussLegendre::new(NonZeroUsize::new(k).unwrap())
                    .as_node_weight_pairs()
                    .to_vec()
            })
            .collect()
    });
    &rules[n - 1]
}

/// A quadrature point on a patch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadPoint {
    pub point: Point3,
    /// Weight including the area Jacobian (sums to the patch area).
    pub weight: f64,
    /// Intrinsic coordinates in the root element.
    pub root: [f64; 2],
}

/// Appends an `n x n` product rule on the patch.
///
/// Quads use tensor Gauss on the bilinear map. Triangles use collapsed
/// (Duffy) Gauss on the affine map.
pub fn patch_rule(patch: &Patch, n: usize, out: &mut Vec<QuadPoint>) {
    let rule = gauss_legendre(n);
    let e = &patch.element;
    match e.shape() {
        ElementShape::Quad => {
            for &(a, wa) in rule {
                for &(b, wb) in rule {
                    out.push(QuadPoint {
                        point: e.map(a, b),
                        weight: wa * wb * e.jacobian(a, b),
                        root: patch.cell.to_root(a, b),
                    });
                }
            }
        }
        ElementShape::Triangle => {
            let jac = 2.0 * e.area();
            for &(x, wx) in rule {
                let u = 0.5 * (x + 1.0);
                for &(y, wy) in rule {
                    let v = 0.5 * (y + 1.0) * (1.0 - u);
                    out.push(QuadPoint {
                        point: e.map(u, v),
                        weight: 0.25 * wx * wy * (1.0 - u) * jac,
                        root: patch.cell.to_root(u, v),
                    });
                }
            }
        }
    }
}

/// Distance-banded Gauss rule for integrands singular near a source point.
///
/// With relative distance `d = dist(source, patch) / diameter(patch)`, the
/// patch gets order `n` for `d > 4`, order `2n` for `1 < d <= 4`, and is
/// split into four for `d <= 1`. Splitting stops after `max_near_depth`
/// levels, where order `4n` is used.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AdaptiveRule {
    pub base_order: usize,
    pub max_near_depth: usize,
}

impl Default for AdaptiveRule {
    fn default() -> Self {
        Self {
            base_order: 2,
            max_near_depth: 6,
        }
    }
}

/// Places quadrature points on a (sub-)element as seen from a source point.
pub trait SurfaceRule {
    fn points(&self, source: &Point3, patch: &Patch, out: &mut Vec<QuadPoint>);
}

/// The same `order x order` rule on every patch regardless of distance.
/// Its error shrinks at a fixed rate under mesh refinement, which makes it
/// the rule of choice for refinement studies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FixedRule {
    pub order: usize,
}

impl SurfaceRule for FixedRule {
    fn points(&self, _source: &Point3, patch: &Patch, out: &mut Vec<QuadPoint>) {
        patch_rule(patch, self.order, out);
    }
}

impl SurfaceRule for AdaptiveRule {
    fn points(&self, source: &Point3, patch: &Patch, out: &mut Vec<QuadPoint>) {
        self.points_at(source, patch, 0, out);
    }
}

impl AdaptiveRule {
    pub fn new(base_order: usize) -> Self {
        Self {
            base_order,
            ..Self::default()
        }
    }

    fn points_at(&self, source: &Point3, patch: &Patch, level: usize, out: &mut Vec<QuadPoint>) {
        let e = &patch.element;
        let d = e.distance_to(source) / e.diameter();
        let n = self.base_order;
        if d > 4.0 {
            patch_rule(patch, n, out);
        } else if d > 1.0 {
            patch_rule(patch, 2 * n, out);
        } else if level >= self.max_near_depth {
            patch_rule(patch, 4 * n, out);
        } else {
            for child in patch.subdivide4() {
                self.points_at(source, &child, level + 1, out);
            }
        }
    }
}

/// Reference rule for nearly singular integrals: uniform subdivision to
/// `depth` levels with an `n x n` rule on every leaf.
pub fn uniform_rule(patch: &Patch, depth: usize, n: usize, out: &mut Vec<QuadPoint>) {
    if depth == 0 {
        patch_rule(patch, n, out);
    } else {
        for child in patch.subdivide4() {
            uniform_rule(&child, depth - 1, n, out);
        }
    }
}

/// Collocation node offset of the discontinuous quad, `1 / sqrt(3)`.
pub const QUAD_NODE: f64 = 0.577_350_269_189_625_8;

/// Intrinsic coordinates of the collocation nodes of an element.
///
/// Quads: the 2x2 Gauss points, counter-clockwise from `(-g, -g)`.
/// Triangles: barycentric `(2/3, 1/6, 1/6)` and permutations, nearest to
/// vertex 0, 1, 2 in turn.
pub fn collocation_nodes(shape: ElementShape) -> &'static [[f64; 2]] {
    const G: f64 = QUAD_NODE;
    const Q: [[f64; 2]; 4] = [[-G, -G], [G, -G], [G, G], [-G, G]];
    const T: [[f64; 2]; 3] = [[1.0 / 6.0, 1.0 / 6.0], [2.0 / 3.0, 1.0 / 6.0], [1.0 / 6.0, 2.0 / 3.0]];
    match shape {
        ElementShape::Quad => &Q,
        ElementShape::Triangle => &T,
    }
}

/// Shape functions interpolating from the collocation nodes; only the
/// first `shape.vertex_count()` entries are meaningful.
///
/// These are linear (triangles) or bilinear (quads) Lagrange polynomials
/// on nodes inside the element, so they go negative near element edges.
pub fn shape_functions(shape: ElementShape, root: [f64; 2]) -> [f64; 4] {
    match shape {
        ElementShape::Quad => {
            let (x, y) = (root[0] / QUAD_NODE, root[1] / QUAD_NODE);
            [
                0.25 * (1.0 - x) * (1.0 - y),
                0.25 * (1.0 + x) * (1.0 - y),
                0.25 * (1.0 + x) * (1.0 + y),
                0.25 * (1.0 - x) * (1.0 + y),
            ]
        }
        ElementShape::Triangle => {
            let l = [1.0 - root[0] - root[1], root[0], root[1]];
            [
                2.0 * l[0] - 1.0 / 3.0,
                2.0 * l[1] - 1.0 / 3.0,
                2.0 * l[2] - 1.0 / 3.0,
                0.0,
            ]
        }
    }
}
