use super::{GeometryError, Point3, Segment, Vec3};

/// Fractional distance from a cell face within which a point is treated as
/// lying on the face (and assigned to the higher-index cell).
const FACE_TIE_TOL: f64 = 1e-9;

/// Regular grid of cuboid cells covering the medium.
#[derive(Debug, Clone, PartialEq)]
pub struct VoxelGrid {
    origin: Point3,
    spacing: [f64; 3],
    dims: [usize; 3],
    /// Cell temperatures in K, x-fastest order.
    temperature: Vec<f64>,
}

/// The portion of a segment inside one cell, as arclengths from the segment start.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VoxelSpan {
    pub cell: usize,
    pub s_enter: f64,
    pub s_exit: f64,
}

impl VoxelSpan {
    pub fn length(&self) -> f64 {
        self.s_exit - self.s_enter
    }
}

impl VoxelGrid {
    pub fn new(
        origin: Point3,
        spacing: [f64; 3],
        dims: [usize; 3],
        temperature: Vec<f64>,
    ) -> Result<Self, GeometryError> {
        if spacing.iter().any(|&d| !(d > 0.0 && d.is_finite())) {
            return Err(GeometryError::InvalidGrid("spacing must be positive".into()));
        }
        if dims.contains(&0) {
            return Err(GeometryError::InvalidGrid("dimensions must be positive".into()));
        }
        let cells = dims[0] * dims[1] * dims[2];
        if temperature.len() != cells {
            return Err(GeometryError::InvalidGrid(format!(
                "expected {cells} cell temperatures, got {}",
                temperature.len()
            )));
        }
        if temperature.iter().any(|t| !(*t >= 0.0 && t.is_finite())) {
            return Err(GeometryError::InvalidGrid(
                "temperatures must be finite and >= 0".into(),
            ));
        }
        Ok(Self {
            origin,
            spacing,
            dims,
            temperature,
        })
    }

    /// A grid with uniform temperature.
    pub fn uniform(
        origin: Point3,
        spacing: [f64; 3],
        dims: [usize; 3],
        temperature: f64,
    ) -> Result<Self, GeometryError> {
        Self::new(origin, spacing, dims, vec![temperature; dims[0] * dims[1] * dims[2]])
    }

    pub fn origin(&self) -> Point3 {
        self.origin
    }

    pub fn spacing(&self) -> [f64; 3] {
        self.spacing
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn cell_count(&self) -> usize {
        self.dims[0] * self.dims[1] * self.dims[2]
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing[0] * self.spacing[1] * self.spacing[2]
    }

    pub fn temperature(&self) -> &[f64] {
        &self.temperature
    }

    pub fn set_temperature(&mut self, temperature: Vec<f64>) -> Result<(), GeometryError> {
        *self = Self::new(self.origin, self.spacing, self.dims, temperature)?;
        Ok(())
    }

    pub fn upper(&self) -> Point3 {
        self.origin
            + Vec3::new(
                self.spacing[0] * self.dims[0] as f64,
                self.spacing[1] * self.dims[1] as f64,
                self.spacing[2] * self.dims[2] as f64,
            )
    }

    pub fn cell_index(&self, ijk: [usize; 3]) -> usize {
        ijk[0] + self.dims[0] * (ijk[1] + self.dims[1] * ijk[2])
    }

    pub fn cell_ijk(&self, index: usize) -> [usize; 3] {
        let i = index % self.dims[0];
        let j = (index / self.dims[0]) % self.dims[1];
        let k = index / (self.dims[0] * self.dims[1]);
        [i, j, k]
    }

    pub fn cell_center(&self, index: usize) -> Point3 {
        let ijk = self.cell_ijk(index);
        Point3::new(
            self.origin.x + (ijk[0] as f64 + 0.5) * self.spacing[0],
            self.origin.y + (ijk[1] as f64 + 0.5) * self.spacing[1],
            self.origin.z + (ijk[2] as f64 + 0.5) * self.spacing[2],
        )
    }

    /// Cell index along one axis. Points on a shared face go to the higher cell.
    fn axis_index(&self, axis: usize, coord: f64) -> usize {
        let f = (coord - self.origin[axis]) / self.spacing[axis];
        let r = f.round();
        let idx = if (f - r).abs() <= FACE_TIE_TOL { r } else { f.floor() };
        (idx.max(0.0) as usize).min(self.dims[axis] - 1)
    }

    /// The cell containing `x`, or `None` when `x` is outside the grid box.
    pub fn locate(&self, x: &Point3) -> Option<usize> {
        let upper = self.upper();
        for a in 0..3 {
            let tol = FACE_TIE_TOL * self.spacing[a];
            if x[a] < self.origin[a] - tol || x[a] > upper[a] + tol {
                return None;
            }
        }
        Some(self.cell_index([
            self.axis_index(0, x.x),
            self.axis_index(1, x.y),
            self.axis_index(2, x.z),
        ]))
    }

    /// Parameter interval of the segment inside the grid box.
    fn clip(&self, seg: &Segment) -> Option<(f64, f64)> {
        let d = seg.direction();
        let upper = self.upper();
        let (mut t0, mut t1) = (0.0f64, 1.0f64);
        for a in 0..3 {
            let lo = self.origin[a];
            let hi = upper[a];
            if d[a].abs() < 1e-300 {
                let tol = FACE_TIE_TOL * self.spacing[a];
                if seg.start[a] < lo - tol || seg.start[a] > hi + tol {
                    return None;
                }
            } else {
                let ta = (lo - seg.start[a]) / d[a];
                let tb = (hi - seg.start[a]) / d[a];
                t0 = t0.max(ta.min(tb));
                t1 = t1.min(ta.max(tb));
            }
        }
        (t1 > t0).then_some((t0, t1))
    }

    /// Splits the segment into per-cell spans.
    ///
    /// Spans are sorted, disjoint and cover the part of the segment inside the
    /// grid box. Arclengths are measured from `seg.start`.
    pub fn traverse(&self, seg: &Segment) -> Result<Vec<VoxelSpan>, GeometryError> {
        let mut spans = Vec::new();
        self.traverse_into(seg, &mut spans)?;
        Ok(spans)
    }

    /// Like [`traverse`](Self::traverse), reusing the output buffer.
    pub fn traverse_into(&self, seg: &Segment, spans: &mut Vec<VoxelSpan>) -> Result<(), GeometryError> {
        spans.clear();
        let len = seg.length();
        let (t0, t1) = self.clip(seg).ok_or(GeometryError::OutsideGrid)?;
        let d = seg.direction();

        // Plane crossings along each axis, merged in increasing parameter order.
        let mut next = [f64::INFINITY; 3];
        let mut step = [0.0f64; 3];
        let mut plane = [0i64; 3];
        for a in 0..3 {
            if d[a].abs() < 1e-300 {
                continue;
            }
            let h = self.spacing[a];
            let x0 = seg.start[a] + d[a] * t0 - self.origin[a];
            let k = if d[a] > 0.0 {
                (x0 / h).floor() as i64 + 1
            } else {
                (x0 / h).ceil() as i64 - 1
            };
            plane[a] = k;
            step[a] = if d[a] > 0.0 { 1.0 } else { -1.0 };
            next[a] = (self.origin[a] + k as f64 * h - seg.start[a]) / d[a];
        }

        let mut t_prev = t0;
        loop {
            let (a, t_next) = (0..3)
                .map(|a| (a, next[a]))
                .fold((0, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc });
            let t_end = t_next.min(t1);
            if t_end > t_prev {
                let mid = seg.at(0.5 * (t_prev + t_end));
                let cell = self.cell_index([
                    self.axis_index(0, mid.x),
                    self.axis_index(1, mid.y),
                    self.axis_index(2, mid.z),
                ]);
                let (s0, s1) = (t_prev * len, t_end * len);
                match spans.last_mut() {
                    Some(last) if last.cell == cell => last.s_exit = s1,
                    _ => spans.push(VoxelSpan {
                        cell,
                        s_enter: s0,
                        s_exit: s1,
                    }),
                }
                t_prev = t_end;
            }
            if t_next >= t1 {
                break;
            }
            plane[a] += step[a] as i64;
            next[a] = (self.origin[a] + plane[a] as f64 * self.spacing[a] - seg.start[a]) / d[a];
        }
        Ok(())
    }
}
