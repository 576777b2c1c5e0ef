use super::{Point3, SurfaceElement, Vec3};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub start: Point3,
    pub end: Point3,
}

impl Segment {
    pub fn new(start: Point3, end: Point3) -> Self {
        Self { start, end }
    }

    pub fn length(&self) -> f64 {
        (self.end - self.start).norm()
    }

    pub fn direction(&self) -> Vec3 {
        self.end - self.start
    }

    pub fn reversed(&self) -> Self {
        Self::new(self.end, self.start)
    }

    pub fn at(&self, t: f64) -> Point3 {
        self.start + self.direction() * t
    }
}

fn lexicographic_le(a: &Point3, b: &Point3) -> bool {
    (a.x, a.y, a.z) <= (b.x, b.y, b.z)
}

/// Tests whether the open segment crosses the closed element.
///
/// Returns the arclength from `seg.start` to the crossing. Crossings within
/// `1e-10 * diameter` of either endpoint do not count, and segments parallel
/// to the element plane never hit. The result does not depend on the
/// segment's orientation.
pub fn ray_intersect_element(seg: &Segment, e: &SurfaceElement) -> Option<f64> {
    let len = seg.length();
    if len == 0.0 {
        return None;
    }
    // Evaluate in a canonical orientation so that the answer is symmetric.
    let flipped = !lexicographic_le(&seg.start, &seg.end);
    let (a, b) = if flipped {
        (seg.end, seg.start)
    } else {
        (seg.start, seg.end)
    };
    let d = b - a;
    let n = e.normal();
    let den = n.dot(&d);
    if den.abs() <= 1e-12 * len {
        return None;
    }
    let t = n.dot(&(e.centroid() - a)) / den;
    let tol = e.tolerance();
    let s = t * len;
    if s <= tol || s >= len - tol {
        return None;
    }
    let x = a + d * t;
    if !e.contains_in_plane(&x, tol) {
        return None;
    }
    Some(if flipped { len - s } else { s })
}
