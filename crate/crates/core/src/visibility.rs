//! Shadow detection: active-element listing, blocking-element listing with
//! cylinder and cone windows, and adaptive subdivision of partially
//! shadowed elements.

use crate::geometry::{
    ray_intersect_element, Patch, Point3, Segment, SurfaceElement, SurfaceMesh, Vec3, INTERSECTION_TOL,
};

/// Limits on the adaptive subdivision of partially visible elements.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubdivisionBudget {
    /// Smallest sub-element area, as a fraction of the original element area.
    pub min_area_rel: f64,
    pub max_depth: usize,
}

impl Default for SubdivisionBudget {
    fn default() -> Self {
        Self {
            min_area_rel: 1e-4,
            max_depth: 8,
        }
    }
}

/// Options for the visibility pipeline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VisibilityOptions {
    pub budget: SubdivisionBudget,
    /// Whether the cylinder and cone windows prefilter blockers. Disabling
    /// them changes runtime only.
    pub culls: bool,
}

impl Default for VisibilityOptions {
    fn default() -> Self {
        Self {
            budget: SubdivisionBudget::default(),
            culls: true,
        }
    }
}

/// A point from which visibility is evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Source {
    pub point: Point3,
    /// Surface normal, absent for medium points.
    pub normal: Option<Vec3>,
    /// Element the point lies on, if any.
    pub element: Option<usize>,
}

impl Source {
    pub fn boundary(point: Point3, normal: Vec3, element: usize) -> Self {
        Self {
            point,
            normal: Some(normal),
            element: Some(element),
        }
    }

    pub fn medium(point: Point3) -> Self {
        Self {
            point,
            normal: None,
            element: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ActiveList {
    pub source: Source,
    pub elements: Vec<usize>,
}

/// Result of the blocking-element search for one active element.
#[derive(Debug, Clone, PartialEq)]
pub enum BlockingList {
    /// The active element is hidden by the listed elements as a whole.
    EarlyBlocked,
    /// Potential blockers in ascending index order; empty means unobstructed.
    Candidates(Vec<usize>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    FullyVisible,
    FullyBlocked,
    Partial,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VisibilityReport {
    pub classification: Classification,
    /// Fully visible sub-elements (the whole element when fully visible).
    pub visible: Vec<Patch>,
    /// Visible area over element area.
    pub fraction: f64,
    /// Deepest subdivision level reached.
    pub depth_reached: usize,
}

impl VisibilityReport {
    fn blocked() -> Self {
        Self {
            classification: Classification::FullyBlocked,
            visible: Vec::new(),
            fraction: 0.0,
            depth_reached: 0,
        }
    }

    fn visible(e: &SurfaceElement) -> Self {
        Self {
            classification: Classification::FullyVisible,
            visible: vec![Patch::whole(e)],
            fraction: 1.0,
            depth_reached: 0,
        }
    }
}

/// Mutual facing test between a source and an element, using the element
/// centroid. Both signed distances must exceed `1e-10 * diameter`.
pub fn facing_test(p: &Point3, n_p: Option<&Vec3>, e: &SurfaceElement) -> bool {
    let tol = e.tolerance();
    let c = e.centroid();
    let d2 = e.normal().dot(&(p - c));
    if d2 <= tol {
        return false;
    }
    match n_p {
        Some(n) => n.dot(&(c - p)) > tol,
        None => true,
    }
}

pub fn build_active_list(source: &Source, mesh: &SurfaceMesh) -> ActiveList {
    let elements = mesh
        .elements()
        .iter()
        .enumerate()
        .filter(|&(k, e)| Some(k) != source.element && facing_test(&source.point, source.normal.as_ref(), e))
        .map(|(k, _)| k)
        .collect();
    ActiveList {
        source: *source,
        elements,
    }
}

fn coplanar(a: &SurfaceElement, b: &SurfaceElement) -> bool {
    let tol = INTERSECTION_TOL * a.diameter().max(b.diameter());
    a.normal().cross(&b.normal()).norm() <= INTERSECTION_TOL
        && b.vertices().iter().all(|v| a.plane_distance(v).abs() <= tol)
}

/// Cylinder and cone windows around the axis `p -> c_k`.
///
/// Both contain the pyramid spanned by `p` and `k`; an element whose
/// bounding sphere misses either window cannot overlap the pyramid.
struct Windows {
    axis: Vec3,
    height: f64,
    radius: f64,
    /// Half-angle of the cone, or `None` when it would not be convex.
    half_angle: Option<f64>,
}

impl Windows {
    fn new(p: &Point3, k: &SurfaceElement) -> Self {
        let w = k.centroid() - p;
        let height = w.norm();
        let axis = w / height;
        let half_angle = k
            .vertices()
            .iter()
            .map(|v| axis.dot(&(v - p).normalize()).clamp(-1.0, 1.0).acos())
            .fold(0.0, f64::max);
        Self {
            axis,
            height,
            radius: k.circumradius(),
            half_angle: (half_angle < std::f64::consts::FRAC_PI_2).then_some(half_angle),
        }
    }

    fn admits(&self, p: &Point3, j: &SurfaceElement, tol: f64) -> bool {
        let w = j.centroid() - p;
        let rj = j.circumradius() + tol;
        let t = self.axis.dot(&w);
        if t < (self.height - self.radius).min(0.0) - rj || t > self.height + self.radius + rj {
            return false;
        }
        let dist2 = w.norm_squared();
        let radial = (dist2 - t * t).max(0.0).sqrt();
        if radial > self.radius + rj {
            return false;
        }
        let Some(half_angle) = self.half_angle else {
            return true;
        };
        let dist = dist2.sqrt();
        if dist <= rj {
            return true;
        }
        let angle = (t / dist).clamp(-1.0, 1.0).acos();
        angle <= half_angle + (rj / dist).asin() + 1e-9
    }
}

/// Separating-axis test between the pyramid spanned by `p` and `k` and the
/// polygon `j`. Contact within `tol` counts as separated.
fn pyramid_overlaps(p: &Point3, k: &SurfaceElement, j: &SurfaceElement, tol: f64) -> bool {
    let kv = k.vertices();
    let jv = j.vertices();
    let mut apex_edges = [Vec3::zeros(); 4];
    let mut base_edges = [Vec3::zeros(); 4];
    let mut j_edges = [Vec3::zeros(); 4];
    for i in 0..kv.len() {
        apex_edges[i] = kv[i] - p;
        base_edges[i] = kv[(i + 1) % kv.len()] - kv[i];
    }
    for i in 0..jv.len() {
        j_edges[i] = jv[(i + 1) % jv.len()] - jv[i];
    }
    let (apex_edges, base_edges, j_edges) = (&apex_edges[..kv.len()], &base_edges[..kv.len()], &j_edges[..jv.len()]);

    let separated = |axis: Vec3| -> bool {
        let len = axis.norm();
        if len <= 1e-14 {
            return false;
        }
        let a = axis / len;
        let mut lo_a = a.dot(&p.coords);
        let mut hi_a = lo_a;
        for v in kv {
            let x = a.dot(&v.coords);
            lo_a = lo_a.min(x);
            hi_a = hi_a.max(x);
        }
        let (mut lo_b, mut hi_b) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in jv {
            let x = a.dot(&v.coords);
            lo_b = lo_b.min(x);
            hi_b = hi_b.max(x);
        }
        hi_a <= lo_b + tol || hi_b <= lo_a + tol
    };

    if separated(k.normal()) || separated(j.normal()) {
        return false;
    }
    for i in 0..kv.len() {
        if separated(apex_edges[i].cross(&apex_edges[(i + 1) % kv.len()])) {
            return false;
        }
    }
    for ej in j_edges {
        for ea in apex_edges.iter().chain(base_edges) {
            if separated(ea.cross(ej)) {
                return false;
            }
        }
    }
    true
}

fn pair_tolerance(p: &Point3, k: &SurfaceElement, j: &SurfaceElement) -> f64 {
    INTERSECTION_TOL * k.diameter().max(j.diameter()).max((k.centroid() - p).norm())
}

/// Whether every corner ray and the centroid ray of `patch` hits at least
/// one of `blockers`.
fn union_blocks(p: &Point3, patch: &SurfaceElement, blockers: &[usize], mesh: &SurfaceMesh) -> bool {
    if blockers.is_empty() {
        return false;
    }
    let ray_blocked = |x: &Point3| {
        let seg = Segment::new(*p, *x);
        blockers
            .iter()
            .any(|&j| ray_intersect_element(&seg, mesh.element(j)).is_some())
    };
    ray_blocked(&patch.centroid()) && patch.vertices().iter().all(ray_blocked)
}

/// Potential blockers of active element `k` as seen from `source`.
///
/// Elements through the source point, the source element, and elements
/// coplanar with `k` are skipped. With `culls`, cylinder and cone windows
/// reject elements before the exact pyramid overlap test.
pub fn build_blocking_list(source: &Source, k: usize, mesh: &SurfaceMesh, culls: bool) -> BlockingList {
    let p = &source.point;
    let ek = mesh.element(k);
    let windows = Windows::new(p, ek);
    let mut list = Vec::new();
    for (j, ej) in mesh.elements().iter().enumerate() {
        if j == k || Some(j) == source.element {
            continue;
        }
        if ej.plane_distance(p).abs() <= ej.tolerance() || coplanar(ek, ej) {
            continue;
        }
        let tol = pair_tolerance(p, ek, ej);
        if culls && !windows.admits(p, ej, tol) {
            continue;
        }
        if pyramid_overlaps(p, ek, ej, tol) {
            list.push(j);
        }
    }
    if union_blocks(p, ek, &list, mesh) {
        BlockingList::EarlyBlocked
    } else {
        BlockingList::Candidates(list)
    }
}

/// Classifies element `k` given its blocking list, subdividing partially
/// shadowed regions until the budget is exhausted.
pub fn classify_visibility(
    source: &Source,
    k: usize,
    blockers: &BlockingList,
    mesh: &SurfaceMesh,
    budget: &SubdivisionBudget,
) -> VisibilityReport {
    let ek = mesh.element(k);
    let candidates = match blockers {
        BlockingList::EarlyBlocked => return VisibilityReport::blocked(),
        BlockingList::Candidates(c) if c.is_empty() => return VisibilityReport::visible(ek),
        BlockingList::Candidates(c) => c,
    };
    let min_area = budget.min_area_rel * ek.area();
    let mut visible = Vec::new();
    let mut depth_reached = 0;
    for child in Patch::whole(ek).subdivide4() {
        subdivide(
            source,
            &child,
            candidates,
            mesh,
            min_area,
            budget.max_depth,
            &mut visible,
            &mut depth_reached,
        );
    }
    let area: f64 = visible.iter().map(|v| v.element.area()).sum();
    let classification = if visible.is_empty() {
        Classification::FullyBlocked
    } else if (area - ek.area()).abs() <= 1e-12 * ek.area() {
        Classification::FullyVisible
    } else {
        Classification::Partial
    };
    let fraction = match classification {
        Classification::FullyVisible => 1.0,
        _ => (area / ek.area()).clamp(0.0, 1.0),
    };
    VisibilityReport {
        classification,
        visible,
        fraction,
        depth_reached,
    }
}

#[allow(clippy::too_many_arguments)]
fn subdivide(
    source: &Source,
    patch: &Patch,
    parent: &[usize],
    mesh: &SurfaceMesh,
    min_area: f64,
    max_depth: usize,
    visible: &mut Vec<Patch>,
    depth_reached: &mut usize,
) {
    let p = &source.point;
    *depth_reached = (*depth_reached).max(patch.depth);
    let e = &patch.element;
    let list: Vec<usize> = parent
        .iter()
        .copied()
        .filter(|&j| {
            let ej = mesh.element(j);
            pyramid_overlaps(p, e, ej, pair_tolerance(p, e, ej))
        })
        .collect();
    if list.is_empty() {
        visible.push(patch.clone());
        return;
    }
    if union_blocks(p, e, &list, mesh) {
        return;
    }
    if e.area() < min_area || patch.depth >= max_depth {
        let seg = Segment::new(*p, e.centroid());
        if !list
            .iter()
            .any(|&j| ray_intersect_element(&seg, mesh.element(j)).is_some())
        {
            visible.push(patch.clone());
        }
        return;
    }
    let before = visible.len();
    for child in patch.subdivide4() {
        subdivide(source, &child, &list, mesh, min_area, max_depth, visible, depth_reached);
    }
    // Four fully visible children make a fully visible parent.
    if visible.len() == before + 4 && visible[before..].iter().all(|v| v.depth == patch.depth + 1) {
        visible.truncate(before);
        visible.push(patch.clone());
    }
}

/// Blocking list and classification in one call.
pub fn element_visibility(
    source: &Source,
    k: usize,
    mesh: &SurfaceMesh,
    options: &VisibilityOptions,
) -> VisibilityReport {
    let list = build_blocking_list(source, k, mesh, options.culls);
    classify_visibility(source, k, &list, mesh, &options.budget)
}

/// Shadow function between two points: `true` iff the open segment crosses
/// no mesh element.
pub fn chi_point(p: &Point3, r: &Point3, mesh: &SurfaceMesh) -> bool {
    let seg = Segment::new(*p, *r);
    !mesh.elements().iter().any(|e| ray_intersect_element(&seg, e).is_some())
}
