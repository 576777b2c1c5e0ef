//! Collocation discretization of the boundary and medium equations into
//! dense coefficient blocks.
//!
//! Surface unknowns are discontinuous: each element carries its own nodes at
//! interior points, so every collocation point sits where the boundary is
//! smooth. Medium unknowns are the incident energies of the grid cells that
//! lie inside the enclosure.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use thiserror::Error;

use crate::geometry::{Enclosure, Point3, Segment, Vec3, VoxelSpan};
use crate::kernels::{attenuated_length, KernelKind, PairGeometry, RadiativeProperties};
use crate::quadrature::{collocation_nodes, shape_functions, AdaptiveRule, QuadPoint, SurfaceRule};
use crate::visibility::{build_active_list, element_visibility, Source, VisibilityOptions};

#[derive(Debug, Error)]
pub enum AssemblyError {
    #[error("non-finite {block} entry in row {row}")]
    NonFinite { block: &'static str, row: usize },
    #[error("line of sight from row {row} leaves the grid")]
    OutsideGrid { row: usize },
}

/// A boundary collocation point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryPoint {
    pub point: Point3,
    pub normal: Vec3,
    pub element: usize,
    /// Intrinsic coordinates on the element.
    pub local: [f64; 2],
}

#[derive(Debug, Clone, PartialEq)]
pub struct CollocationSet {
    pub boundary: Vec<BoundaryPoint>,
    /// Index of the first surface unknown of each element.
    pub element_offset: Vec<usize>,
    /// Grid cells carrying medium unknowns, in ascending order.
    pub cells: Vec<usize>,
    /// Medium unknown index of each grid cell, if it has one.
    pub cell_column: Vec<Option<usize>>,
    pub cell_centers: Vec<Point3>,
}

impl CollocationSet {
    pub fn new(enc: &Enclosure) -> Self {
        let mesh = enc.mesh();
        let mut boundary = Vec::new();
        let mut element_offset = Vec::with_capacity(mesh.len());
        for (k, e) in mesh.elements().iter().enumerate() {
            element_offset.push(boundary.len());
            for node in collocation_nodes(e.shape()) {
                boundary.push(BoundaryPoint {
                    point: e.map(node[0], node[1]),
                    normal: e.normal(),
                    element: k,
                    local: *node,
                });
            }
        }
        let cells = enc.interior_cells();
        let mut cell_column = vec![None; enc.grid().cell_count()];
        for (col, &c) in cells.iter().enumerate() {
            cell_column[c] = Some(col);
        }
        let cell_centers = cells.iter().map(|&c| enc.grid().cell_center(c)).collect();
        Self {
            boundary,
            element_offset,
            cells,
            cell_column,
            cell_centers,
        }
    }

    /// Number of surface unknowns.
    pub fn surface_len(&self) -> usize {
        self.boundary.len()
    }

    /// Number of medium unknowns.
    pub fn medium_len(&self) -> usize {
        self.cells.len()
    }

    /// Surface integration weights: integral of each shape function over its
    /// element.
    pub fn surface_weights(&self, enc: &Enclosure) -> Vec<f64> {
        let mut w = vec![0.0; self.surface_len()];
        let mut pts = Vec::new();
        for (k, e) in enc.mesh().elements().iter().enumerate() {
            pts.clear();
            crate::quadrature::patch_rule(&crate::geometry::Patch::whole(e), 4, &mut pts);
            let m = e.shape().vertex_count();
            for q in &pts {
                let f = shape_functions(e.shape(), q.root);
                for a in 0..m {
                    w[self.element_offset[k] + a] += q.weight * f[a];
                }
            }
        }
        w
    }
}

/// Blocks of the boundary equation: `q = Gmat q + Fmat G + h`.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceSystem {
    pub gmat: DMatrix<f64>,
    pub fmat: DMatrix<f64>,
    pub h: DVector<f64>,
}

/// Blocks of the medium equation: `G = Umat G + Vmat q + t`.
#[derive(Debug, Clone, PartialEq)]
pub struct VolumeSystem {
    pub umat: DMatrix<f64>,
    pub vmat: DMatrix<f64>,
    pub t: DVector<f64>,
    /// Equilibrium incident energy `4 sigma T^4` of each medium cell.
    pub g_equilibrium: DVector<f64>,
}

/// Visibility of one element from one collocation point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VisibilityRecord {
    pub row: usize,
    pub element: usize,
    pub fraction: f64,
    pub depth: usize,
}

/// Assembly settings.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AssemblyOptions {
    pub quadrature: AdaptiveRule,
    pub visibility: VisibilityOptions,
}

struct Row {
    surface: Vec<f64>,
    medium: Vec<f64>,
    rhs: f64,
    visibility: Vec<VisibilityRecord>,
}

/// Integrates the kernels seen from one source over every visible element.
///
/// `on_point` receives each surface quadrature point with the visible
/// element index; `on_span` receives each medium span along the line of
/// sight to that point.
fn sweep(
    enc: &Enclosure,
    source: &Source,
    row: usize,
    options: &AssemblyOptions,
    mut on_point: impl FnMut(usize, &QuadPoint, &PairGeometry, &[VoxelSpan]),
    need_paths: bool,
) -> Result<Vec<VisibilityRecord>, AssemblyError> {
    let mesh = enc.mesh();
    let active = build_active_list(source, mesh);
    let mut records = Vec::with_capacity(active.elements.len());
    let mut pts = Vec::new();
    let mut spans = Vec::new();
    for &k in &active.elements {
        let e = mesh.element(k);
        let report = element_visibility(source, k, mesh, &options.visibility);
        records.push(VisibilityRecord {
            row,
            element: k,
            fraction: report.fraction,
            depth: report.depth_reached,
        });
        for patch in &report.visible {
            pts.clear();
            options.quadrature.points(&source.point, patch, &mut pts);
            for q in &pts {
                let geo = PairGeometry::new(&source.point, source.normal.as_ref(), &q.point, &e.normal());
                spans.clear();
                if need_paths {
                    enc.grid()
                        .traverse_into(&Segment::new(source.point, q.point), &mut spans)
                        .map_err(|_| AssemblyError::OutsideGrid { row })?;
                }
                on_point(k, q, &geo, &spans);
            }
        }
    }
    Ok(records)
}

fn check_finite(values: &[f64], block: &'static str, row: usize) -> Result<(), AssemblyError> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(AssemblyError::NonFinite { block, row })
    }
}

fn cell_intensity(enc: &Enclosure, props: &RadiativeProperties) -> Vec<f64> {
    enc.grid()
        .temperature()
        .iter()
        .zip(enc.interior())
        .map(|(&t, &inside)| if inside { props.blackbody(t).1 } else { 0.0 })
        .collect()
}

fn surface_row(
    enc: &Enclosure,
    props: &RadiativeProperties,
    col: &CollocationSet,
    options: &AssemblyOptions,
    ib: &[f64],
    i: usize,
) -> Result<Row, AssemblyError> {
    let mesh = enc.mesh();
    let bp = &col.boundary[i];
    let eps_i = mesh.element(bp.element).emissivity();
    let beta = props.beta();
    let mut surface = vec![0.0; col.surface_len()];
    let mut medium = vec![0.0; col.medium_len()];
    let mut rhs = 0.0;
    let need_paths = props.sigma_a() > 0.0 || props.sigma_s() > 0.0;
    let source = Source::boundary(bp.point, bp.normal, bp.element);
    let visibility = sweep(
        enc,
        &source,
        i,
        options,
        |k, q, geo, spans| {
            let e = mesh.element(k);
            let eps_k = e.emissivity();
            let (eb_k, _) = props.blackbody(mesh.temperature()[k]);
            let p1 = q.weight * geo.kernel(KernelKind::P1, props);
            let f = shape_functions(e.shape(), q.root);
            let reflect = eps_i * (1.0 - eps_k) / eps_k;
            if reflect != 0.0 {
                let off = col.element_offset[k];
                for a in 0..e.shape().vertex_count() {
                    surface[off + a] += reflect * f[a] * p1;
                }
            }
            rhs += eps_i * eb_k * p1;
            if spans.is_empty() {
                return;
            }
            let p2 = q.weight * geo.kernel(KernelKind::P2, props);
            let p3 = q.weight * geo.kernel(KernelKind::P3, props);
            for s in spans {
                if let Some(c) = col.cell_column[s.cell] {
                    let len = attenuated_length(beta, s.s_enter, s.s_exit);
                    medium[c] += eps_i * p3 * len;
                    rhs += eps_i * p2 * len * ib[s.cell];
                }
            }
        },
        need_paths,
    )?;
    let (eb_i, _) = props.blackbody(mesh.temperature()[bp.element]);
    rhs -= eps_i * eb_i;
    check_finite(&surface, "Gmat", i)?;
    check_finite(&medium, "Fmat", i)?;
    check_finite(&[rhs], "h", i)?;
    Ok(Row {
        surface,
        medium,
        rhs,
        visibility,
    })
}

fn volume_row(
    enc: &Enclosure,
    props: &RadiativeProperties,
    col: &CollocationSet,
    options: &AssemblyOptions,
    ib: &[f64],
    j: usize,
) -> Result<Row, AssemblyError> {
    let mesh = enc.mesh();
    let beta = props.beta();
    let mut surface = vec![0.0; col.surface_len()];
    let mut medium = vec![0.0; col.medium_len()];
    let mut rhs = 0.0;
    let need_paths = props.sigma_a() > 0.0 || props.sigma_s() > 0.0;
    let source = Source::medium(col.cell_centers[j]);
    let visibility = sweep(
        enc,
        &source,
        j,
        options,
        |k, q, geo, spans| {
            let e = mesh.element(k);
            let eps_k = e.emissivity();
            let (eb_k, _) = props.blackbody(mesh.temperature()[k]);
            let p4 = q.weight * geo.kernel(KernelKind::P4, props);
            let reflect = (1.0 - eps_k) / eps_k;
            if reflect != 0.0 {
                let f = shape_functions(e.shape(), q.root);
                let off = col.element_offset[k];
                for a in 0..e.shape().vertex_count() {
                    surface[off + a] += reflect * f[a] * p4;
                }
            }
            rhs += eb_k * p4;
            if spans.is_empty() {
                return;
            }
            let p5 = q.weight * geo.kernel(KernelKind::P5, props);
            let p6 = q.weight * geo.kernel(KernelKind::P6, props);
            for s in spans {
                if let Some(c) = col.cell_column[s.cell] {
                    let len = attenuated_length(beta, s.s_enter, s.s_exit);
                    medium[c] += p6 * len;
                    rhs += p5 * len * ib[s.cell];
                }
            }
        },
        need_paths,
    )?;
    check_finite(&surface, "Vmat", j)?;
    check_finite(&medium, "Umat", j)?;
    check_finite(&[rhs], "t", j)?;
    Ok(Row {
        surface,
        medium,
        rhs,
        visibility,
    })
}

fn collect(
    rows: Vec<Row>,
    surface_cols: usize,
    medium_cols: usize,
) -> (DMatrix<f64>, DMatrix<f64>, DVector<f64>, Vec<VisibilityRecord>) {
    let n = rows.len();
    let mut s = DMatrix::zeros(n, surface_cols);
    let mut m = DMatrix::zeros(n, medium_cols);
    let mut rhs = DVector::zeros(n);
    let mut vis = Vec::new();
    for (i, row) in rows.into_iter().enumerate() {
        for (c, v) in row.surface.into_iter().enumerate() {
            s[(i, c)] = v;
        }
        for (c, v) in row.medium.into_iter().enumerate() {
            m[(i, c)] = v;
        }
        rhs[i] = row.rhs;
        vis.extend(row.visibility);
    }
    (s, m, rhs, vis)
}

/// Assembles the boundary equation blocks, one row per boundary collocation
/// point. Also returns the per-pair visibility records.
pub fn assemble_surface(
    enc: &Enclosure,
    props: &RadiativeProperties,
    col: &CollocationSet,
    options: &AssemblyOptions,
) -> Result<(SurfaceSystem, Vec<VisibilityRecord>), AssemblyError> {
    let ib = cell_intensity(enc, props);
    let rows = (0..col.surface_len())
        .into_par_iter()
        .map(|i| surface_row(enc, props, col, options, &ib, i))
        .collect::<Result<Vec<_>, _>>()?;
    let (gmat, fmat, h, vis) = collect(rows, col.surface_len(), col.medium_len());
    Ok((SurfaceSystem { gmat, fmat, h }, vis))
}

/// Assembles the medium equation blocks, one row per medium cell.
pub fn assemble_volume(
    enc: &Enclosure,
    props: &RadiativeProperties,
    col: &CollocationSet,
    options: &AssemblyOptions,
) -> Result<(VolumeSystem, Vec<VisibilityRecord>), AssemblyError> {
    let ib = cell_intensity(enc, props);
    let rows = (0..col.medium_len())
        .into_par_iter()
        .map(|j| volume_row(enc, props, col, options, &ib, j))
        .collect::<Result<Vec<_>, _>>()?;
    let (vmat, umat, t, vis) = collect(rows, col.surface_len(), col.medium_len());
    let g_equilibrium = DVector::from_iterator(
        col.medium_len(),
        col.cells
            .iter()
            .map(|&c| 4.0 * props.blackbody(enc.grid().temperature()[c]).0),
    );
    Ok((
        VolumeSystem {
            umat,
            vmat,
            t,
            g_equilibrium,
        },
        vis,
    ))
}

/// Largest absolute row sums of the four operator blocks next to their
/// analytic bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RowSumReport {
    pub sums: [f64; 4],
    pub bounds: [f64; 4],
    /// Relative slack allowed for discretization error.
    pub tolerance: f64,
}

impl RowSumReport {
    pub const NAMES: [&'static str; 4] = ["K1", "K2", "K3", "K4"];

    pub fn within(&self, block: usize) -> bool {
        self.sums[block] <= self.bounds[block] * (1.0 + self.tolerance) + 1e-12
    }

    pub fn all_within(&self) -> bool {
        (0..4).all(|b| self.within(b))
    }
}

fn max_abs_row_sum(m: &DMatrix<f64>) -> f64 {
    m.row_iter()
        .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Row-sum check of the assembled blocks against the norm bounds
/// `1 - eps`, `eps sigma_s / (4 beta)`, `(sigma_s / beta)(1 - exp(-beta R))`
/// and `4 (1 - eps) / eps`, using the extreme emissivities of the mesh.
pub fn operator_row_sums(
    surface: &SurfaceSystem,
    volume: &VolumeSystem,
    props: &RadiativeProperties,
    enc: &Enclosure,
) -> RowSumReport {
    let eps: Vec<f64> = enc.mesh().elements().iter().map(|e| e.emissivity()).collect();
    let eps_min = eps.iter().copied().fold(1.0, f64::min);
    let eps_max = eps.iter().copied().fold(0.0, f64::max);
    let (beta, ss) = (props.beta(), props.sigma_s());
    let ratio = if beta > 0.0 { ss / beta } else { 0.0 };
    let bounds = [
        1.0 - eps_min,
        eps_max * ratio / 4.0,
        ratio * (1.0 - (-beta * props.diameter()).exp()),
        4.0 * (1.0 - eps_min) / eps_min,
    ];
    RowSumReport {
        sums: [
            max_abs_row_sum(&surface.gmat),
            max_abs_row_sum(&surface.fmat),
            max_abs_row_sum(&volume.umat),
            max_abs_row_sum(&volume.vmat),
        ],
        bounds,
        tolerance: 0.02,
    }
}
