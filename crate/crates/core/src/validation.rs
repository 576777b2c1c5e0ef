//! Independent checks of a discretization or solution: the closure
//! identities of the kernels, ray-sampled visibility, operator row-sum
//! bounds, and global energy balance.

use std::f64::consts::PI;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::assembly::{CollocationSet, RowSumReport};
use crate::geometry::{ElementShape, Enclosure, Point3, SurfaceMesh};
use crate::kernels::PairGeometry;
use crate::quadrature::{QuadPoint, SurfaceRule};
use crate::solver::SolutionState;
use crate::visibility::{build_active_list, chi_point, element_visibility, Source, VisibilityOptions};

pub const DEFAULT_SEED: u64 = 0x5eed_5ad0;

/// Outcome of one check.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub name: String,
    pub computed: f64,
    pub reference: f64,
    pub abs_deviation: f64,
    pub rel_deviation: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub resolution: String,
}

impl OracleReport {
    /// Passes when `|computed - reference| <= tolerance * |reference|`.
    pub fn relative(name: &str, computed: f64, reference: f64, tolerance: f64, resolution: &str) -> Self {
        let abs = (computed - reference).abs();
        let rel = if reference != 0.0 { abs / reference.abs() } else { abs };
        Self {
            name: name.to_string(),
            computed,
            reference,
            abs_deviation: abs,
            rel_deviation: rel,
            tolerance,
            pass: rel <= tolerance,
            resolution: resolution.to_string(),
        }
    }

    /// Passes when `|computed - reference| <= tolerance`.
    pub fn absolute(name: &str, computed: f64, reference: f64, tolerance: f64, resolution: &str) -> Self {
        let abs = (computed - reference).abs();
        Self {
            name: name.to_string(),
            computed,
            reference,
            abs_deviation: abs,
            rel_deviation: if reference != 0.0 { abs / reference.abs() } else { abs },
            tolerance,
            pass: abs <= tolerance,
            resolution: resolution.to_string(),
        }
    }

    /// Passes when `computed <= bound * (1 + tolerance)`.
    pub fn upper_bound(name: &str, computed: f64, bound: f64, tolerance: f64, resolution: &str) -> Self {
        let excess = (computed - bound).max(0.0);
        let rel = if bound != 0.0 { excess / bound.abs() } else { excess };
        Self {
            name: name.to_string(),
            computed,
            reference: bound,
            abs_deviation: excess,
            rel_deviation: rel,
            tolerance,
            pass: computed <= bound * (1.0 + tolerance) + 1e-12,
            resolution: resolution.to_string(),
        }
    }

    pub const CSV_HEADER: &'static str =
        "name,computed,reference,abs_deviation,rel_deviation,tolerance,pass,resolution";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{:e},{:e},{:e},{:e},{:e},{},{}",
            self.name,
            self.computed,
            self.reference,
            self.abs_deviation,
            self.rel_deviation,
            self.tolerance,
            self.pass,
            self.resolution.replace(',', ";")
        )
    }
}

pub fn reports_csv(reports: &[OracleReport]) -> String {
    let mut s = String::from(OracleReport::CSV_HEADER);
    s.push('\n');
    for r in reports {
        s.push_str(&r.csv_row());
        s.push('\n');
    }
    s
}

pub fn reports_table(reports: &[OracleReport]) -> String {
    let width = reports.iter().map(|r| r.name.len()).max().unwrap_or(4).max(5);
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<width$}  {:>13}  {:>13}  {:>10}  {:>9}  result",
        "check", "computed", "reference", "rel.dev", "tol"
    );
    for r in reports {
        let _ = writeln!(
            s,
            "{:<width$}  {:>13.6e}  {:>13.6e}  {:>10.3e}  {:>9.2e}  {}",
            r.name,
            r.computed,
            r.reference,
            r.rel_deviation,
            r.tolerance,
            if r.pass { "pass" } else { "FAIL" }
        );
    }
    s
}

/// Integrates `integrand(geometry)` over the part of the mesh visible from
/// `source`, using the assembly quadrature.
pub fn surface_integral(
    source: &Source,
    mesh: &SurfaceMesh,
    rule: &impl SurfaceRule,
    visibility: &VisibilityOptions,
    integrand: impl Fn(&PairGeometry) -> f64,
) -> f64 {
    let active = build_active_list(source, mesh);
    let mut pts: Vec<QuadPoint> = Vec::new();
    let mut total = 0.0;
    for &k in &active.elements {
        let e = mesh.element(k);
        let report = element_visibility(source, k, mesh, visibility);
        for patch in &report.visible {
            pts.clear();
            rule.points(&source.point, patch, &mut pts);
            for q in &pts {
                let geo = PairGeometry::new(&source.point, source.normal.as_ref(), &q.point, &e.normal());
                total += q.weight * integrand(&geo);
            }
        }
    }
    total
}

/// Closure of the diffuse exchange kernel from a boundary point of a convex
/// enclosure: the integral of `cos_p cos_r / r^2` is `pi`.
pub fn lemma1_identity(source: &Source, mesh: &SurfaceMesh, rule: &impl SurfaceRule, resolution: &str) -> OracleReport {
    let v = surface_integral(source, mesh, rule, &VisibilityOptions::default(), |g| {
        g.cos_p * g.cos_r / (g.distance * g.distance)
    });
    OracleReport::relative("lemma1_closure", v, PI, 0.01, resolution)
}

/// Solid-angle closure from an interior point: the integral of
/// `exp(-beta r) cos_r / r^2` is `4 pi` for `beta = 0` and at most that
/// otherwise.
pub fn lemma3_identity(
    p: &Point3,
    mesh: &SurfaceMesh,
    beta: f64,
    rule: &impl SurfaceRule,
    resolution: &str,
) -> OracleReport {
    let source = Source::medium(*p);
    let v = surface_integral(&source, mesh, rule, &VisibilityOptions::default(), |g| {
        (-beta * g.distance).exp() * g.cos_r / (g.distance * g.distance)
    });
    if beta == 0.0 {
        OracleReport::relative("lemma3_solid_angle", v, 4.0 * PI, 0.01, resolution)
    } else {
        OracleReport::upper_bound("lemma3_attenuated_bound", v, 4.0 * PI, 0.01, resolution)
    }
}

/// Area fraction of element `k` visible from `source`, estimated by
/// stratified jittered sampling with about `n_rays` segments.
pub fn visibility_oracle(source: &Source, k: usize, mesh: &SurfaceMesh, n_rays: usize, seed: u64) -> f64 {
    let e = mesh.element(k);
    let m = (n_rays as f64).sqrt().ceil().max(1.0) as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (k as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    let (mut seen, mut total) = (0.0, 0.0);
    for a in 0..m {
        for b in 0..m {
            let u = (a as f64 + rng.random::<f64>()) / m as f64;
            let v = (b as f64 + rng.random::<f64>()) / m as f64;
            let (r, w) = match e.shape() {
                ElementShape::Quad => {
                    let (xi, eta) = (2.0 * u - 1.0, 2.0 * v - 1.0);
                    (e.map(xi, eta), e.jacobian(xi, eta))
                }
                ElementShape::Triangle => {
                    let s = u.sqrt();
                    (e.map(s * (1.0 - v), s * v), 1.0)
                }
            };
            total += w;
            if chi_point(&source.point, &r, mesh) {
                seen += w;
            }
        }
    }
    seen / total
}

/// Global balance between wall absorption and medium emission:
/// `integral of q dS = integral of sigma_a (4 sigma T^4 - G) dV`.
pub fn energy_balance(
    solution: &SolutionState,
    enc: &Enclosure,
    col: &CollocationSet,
    sigma_a: f64,
    stefan_boltzmann: f64,
    resolution: &str,
) -> OracleReport {
    let weights = col.surface_weights(enc);
    let wall: f64 = weights.iter().zip(&solution.q).map(|(w, q)| w * q).sum();
    let volume = enc.grid().cell_volume();
    let medium: f64 = col
        .cells
        .iter()
        .zip(&solution.g)
        .map(|(&c, g)| {
            let t = enc.grid().temperature()[c];
            sigma_a * (4.0 * stefan_boltzmann * t.powi(4) - g) * volume
        })
        .sum::<f64>()
        + 0.0;
    let emission: f64 = enc
        .mesh()
        .elements()
        .iter()
        .zip(enc.mesh().temperature())
        .map(|(e, t)| e.emissivity() * stefan_boltzmann * t.powi(4) * e.area())
        .sum();
    // Both terms count as vanishing when below 1% of the total wall
    // emission, or always without absorption since the medium term is then
    // identically zero. The wall emission normalizes the residual instead.
    let scale = wall.abs().max(medium.abs());
    let scale = if sigma_a > 0.0 && scale > 1e-2 * emission {
        scale
    } else {
        emission.max(1e-300)
    };
    let residual = (wall - medium).abs() / scale;
    let mut r = OracleReport::relative("energy_balance", wall, medium, 0.03, resolution);
    r.abs_deviation = (wall - medium).abs();
    r.rel_deviation = residual;
    r.pass = residual <= 0.03;
    r
}

/// One report per operator block of a row-sum check.
pub fn row_sum_reports(report: &RowSumReport, resolution: &str) -> Vec<OracleReport> {
    (0..4)
        .map(|b| {
            OracleReport::upper_bound(
                &format!("row_sum_{}", RowSumReport::NAMES[b]),
                report.sums[b],
                report.bounds[b],
                report.tolerance,
                resolution,
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relative_report() {
        let r = OracleReport::relative("x", 1.005, 1.0, 0.01, "n=1");
        assert!(r.pass);
        assert!((r.rel_deviation - 0.005).abs() < 1e-12);
        let r = OracleReport::relative("x", 1.02, 1.0, 0.01, "n=1");
        assert!(!r.pass);
        assert!(reports_csv(std::slice::from_ref(&r)).lines().count() == 2);
        assert!(reports_table(&[r]).contains("FAIL"));
    }

    #[test]
    fn bound_report() {
        assert!(OracleReport::upper_bound("b", 0.5, 0.5, 0.02, "").pass);
        assert!(OracleReport::upper_bound("b", 0.51, 0.5, 0.02, "").pass);
        assert!(!OracleReport::upper_bound("b", 0.52, 0.5, 0.02, "").pass);
    }
}
