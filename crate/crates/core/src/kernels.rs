//! Kernel functions of the integral equations, transmittance, blackbody
//! emission, and analytic line-of-sight integrals over the voxel grid.

use std::f64::consts::PI;

use thiserror::Error;

use crate::geometry::{GeometryError, Point3, Segment, Vec3, VoxelGrid};

/// Stefan-Boltzmann constant in W m^-2 K^-4.
pub const STEFAN_BOLTZMANN: f64 = 5.670374419e-8;

#[derive(Debug, Error)]
pub enum KernelError {
    #[error("coincident points (distance {distance:e})")]
    CoincidentPoints { distance: f64 },
    #[error("kernel {0:?} needs a source normal")]
    MissingNormal(KernelKind),
    #[error("invalid radiative properties: {0}")]
    InvalidProperties(String),
}

/// Gray medium properties and the domain diameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadiativeProperties {
    sigma_a: f64,
    sigma_s: f64,
    beta: f64,
    stefan_boltzmann: f64,
    diameter: f64,
}

impl RadiativeProperties {
    /// Participating medium; requires `sigma_a + sigma_s > 0`.
    pub fn new(sigma_a: f64, sigma_s: f64, diameter: f64) -> Result<Self, KernelError> {
        let props = Self::unchecked(sigma_a, sigma_s, diameter)?;
        if props.beta <= 0.0 {
            return Err(KernelError::InvalidProperties(
                "extinction coefficient must be positive".into(),
            ));
        }
        Ok(props)
    }

    /// Non-participating medium (`beta = 0`), for validation of the
    /// transparent limit.
    pub fn transparent(diameter: f64) -> Result<Self, KernelError> {
        Self::unchecked(0.0, 0.0, diameter)
    }

    fn unchecked(sigma_a: f64, sigma_s: f64, diameter: f64) -> Result<Self, KernelError> {
        if !(sigma_a >= 0.0 && sigma_a.is_finite() && sigma_s >= 0.0 && sigma_s.is_finite()) {
            return Err(KernelError::InvalidProperties(
                "absorption and scattering coefficients must be finite and >= 0".into(),
            ));
        }
        if !(diameter > 0.0 && diameter.is_finite()) {
            return Err(KernelError::InvalidProperties(
                "domain diameter must be positive".into(),
            ));
        }
        Ok(Self {
            sigma_a,
            sigma_s,
            beta: sigma_a + sigma_s,
            stefan_boltzmann: STEFAN_BOLTZMANN,
            diameter,
        })
    }

    pub fn sigma_a(&self) -> f64 {
        self.sigma_a
    }

    pub fn sigma_s(&self) -> f64 {
        self.sigma_s
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn stefan_boltzmann(&self) -> f64 {
        self.stefan_boltzmann
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    /// Scattering albedo `sigma_s / beta`, or 0 for a transparent medium.
    pub fn albedo(&self) -> f64 {
        if self.beta > 0.0 {
            self.sigma_s / self.beta
        } else {
            0.0
        }
    }

    /// Blackbody emissive power and intensity at temperature `t`.
    pub fn blackbody(&self, t: f64) -> (f64, f64) {
        blackbody_with(self.stefan_boltzmann, t)
    }
}

/// Blackbody emissive power `sigma T^4` and intensity `sigma T^4 / pi`.
pub fn blackbody(t: f64) -> (f64, f64) {
    blackbody_with(STEFAN_BOLTZMANN, t)
}

fn blackbody_with(sigma: f64, t: f64) -> (f64, f64) {
    let e = sigma * t.powi(4);
    (e, e / PI)
}

pub fn transmittance(p: &Point3, r: &Point3, beta: f64) -> f64 {
    (-beta * (p - r).norm()).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KernelKind {
    P1,
    P2,
    P3,
    P4,
    P5,
    P6,
}

impl KernelKind {
    pub const ALL: [KernelKind; 6] = [
        KernelKind::P1,
        KernelKind::P2,
        KernelKind::P3,
        KernelKind::P4,
        KernelKind::P5,
        KernelKind::P6,
    ];

    /// Whether the kernel carries the source-side cosine.
    pub fn needs_source_normal(self) -> bool {
        matches!(self, KernelKind::P1 | KernelKind::P2 | KernelKind::P3)
    }
}

/// Distance and clamped direction cosines between a source point and a
/// surface point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairGeometry {
    pub distance: f64,
    /// Cosine at the source, or 1 when the source has no normal.
    pub cos_p: f64,
    pub cos_r: f64,
}

impl PairGeometry {
    #[inline]
    pub fn new(p: &Point3, n_p: Option<&Vec3>, r: &Point3, n_r: &Vec3) -> Self {
        let d = r - p;
        let distance = d.norm();
        let cos_p = n_p.map_or(1.0, |n| (n.dot(&d) / distance).clamp(0.0, 1.0));
        let cos_r = (-n_r.dot(&d) / distance).clamp(0.0, 1.0);
        Self { distance, cos_p, cos_r }
    }

    /// Kernel value from the precomputed geometry.
    #[inline]
    pub fn kernel(&self, kind: KernelKind, props: &RadiativeProperties) -> f64 {
        let d2 = self.distance * self.distance;
        let cc = self.cos_p * self.cos_r / d2;
        let cr = self.cos_r / d2;
        match kind {
            KernelKind::P1 => (-props.beta * self.distance).exp() * cc / PI,
            KernelKind::P2 => props.sigma_a * cc,
            KernelKind::P3 => props.sigma_s / (4.0 * PI) * cc,
            KernelKind::P4 => (-props.beta * self.distance).exp() * cr / PI,
            KernelKind::P5 => props.sigma_a * cr,
            KernelKind::P6 => props.sigma_s / (4.0 * PI) * cr,
        }
    }
}

/// Geometric kernel between source `p` and surface point `r`, without the
/// visibility factor.
pub fn kernel_value(
    kind: KernelKind,
    p: &Point3,
    n_p: Option<&Vec3>,
    r: &Point3,
    n_r: &Vec3,
    props: &RadiativeProperties,
) -> Result<f64, KernelError> {
    if kind.needs_source_normal() && n_p.is_none() {
        return Err(KernelError::MissingNormal(kind));
    }
    let distance = (r - p).norm();
    if distance < 1e-12 * props.diameter {
        return Err(KernelError::CoincidentPoints { distance });
    }
    Ok(PairGeometry::new(p, n_p, r, n_r).kernel(kind, props))
}

/// `integral of exp(-beta s) ds` over `[s1, s2]`.
#[inline]
pub fn attenuated_length(beta: f64, s1: f64, s2: f64) -> f64 {
    if beta == 0.0 {
        s2 - s1
    } else {
        (-beta * s1).exp() * -(-beta * (s2 - s1)).exp_m1() / beta
    }
}

/// `sum over cells of field[cell] * integral of exp(-beta s) ds` along the
/// segment from `p` to `r`.
pub fn path_source_integral(
    p: &Point3,
    r: &Point3,
    grid: &VoxelGrid,
    field: &[f64],
    beta: f64,
) -> Result<f64, GeometryError> {
    let spans = grid.traverse(&Segment::new(*p, *r))?;
    Ok(spans
        .iter()
        .map(|s| field[s.cell] * attenuated_length(beta, s.s_enter, s.s_exit))
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(x: f64, y: f64, z: f64) -> Point3 {
        Point3::new(x, y, z)
    }

    #[test]
    fn transmittance_values() {
        assert_eq!(transmittance(&p(0., 0., 0.), &p(1., 2., 3.), 0.0), 1.0);
        let half = transmittance(&p(0., 0., 0.), &p(2f64.ln(), 0., 0.), 1.0);
        assert!((half - 0.5).abs() < 1e-15);
        let t = transmittance(&p(0., 0., 0.), &p(0., 3., 0.), 2.0);
        assert!((t - 2.4787521766663585e-3).abs() < 1e-17);
    }

    #[test]
    fn blackbody_values() {
        assert_eq!(blackbody(0.0), (0.0, 0.0));
        let (e, i) = blackbody(1000.0);
        assert!((e - 5.670374419e4).abs() < 1e-9);
        assert!((e / i - PI).abs() < 1e-14);
    }

    #[test]
    fn p1_head_on_unit_distance() {
        let props = RadiativeProperties::transparent(1.0).unwrap();
        let v = kernel_value(
            KernelKind::P1,
            &p(0., 0., 0.),
            Some(&Vec3::z()),
            &p(0., 0., 1.),
            &-Vec3::z(),
            &props,
        )
        .unwrap();
        assert!((v - 1.0 / PI).abs() < 1e-15);
    }

    #[test]
    fn coincident_and_missing_normal_errors() {
        let props = RadiativeProperties::new(1.0, 1.0, 1.0).unwrap();
        let a = p(0.1, 0.2, 0.3);
        assert!(matches!(
            kernel_value(KernelKind::P4, &a, None, &a, &Vec3::z(), &props),
            Err(KernelError::CoincidentPoints { .. })
        ));
        assert!(matches!(
            kernel_value(KernelKind::P1, &a, None, &p(1., 1., 1.), &Vec3::z(), &props),
            Err(KernelError::MissingNormal(KernelKind::P1))
        ));
        assert!(RadiativeProperties::new(0.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn two_cell_path_integral_matches_trapezoid() {
        let grid = VoxelGrid::uniform(p(0., 0., 0.), [1.0, 1.0, 1.0], [2, 1, 1], 0.0).unwrap();
        let (c1, c2, beta) = (3.0, 7.0, 0.8);
        let (a, b) = (p(0.2, 0.5, 0.5), p(1.7, 0.5, 0.5));
        let v = path_source_integral(&a, &b, &grid, &[c1, c2], beta).unwrap();
        let (s, d) = (0.8, 1.5);
        let exact = c1 * (1.0 - (-beta * s).exp()) / beta + c2 * ((-beta * s).exp() - (-beta * d).exp()) / beta;
        assert!((v - exact).abs() < 1e-14 * exact);

        // Independent check by composite trapezoid quadrature of the
        // piecewise-constant integrand.
        let n = 10_000;
        let h = d / n as f64;
        let f = |t: f64| if t < s { c1 } else { c2 } * (-beta * t).exp();
        let mut trap = 0.0;
        for k in 0..n {
            let (t0, t1) = (k as f64 * h, (k + 1) as f64 * h);
            trap += if t0 < s && t1 > s {
                0.5 * (f(t0) + c1 * (-beta * s).exp()) * (s - t0) + 0.5 * (c2 * (-beta * s).exp() + f(t1)) * (t1 - s)
            } else {
                0.5 * (f(t0) + f(t1)) * h
            };
        }
        assert!((v - trap).abs() < 1e-8 * v);
    }

    #[test]
    fn transparent_path_is_length() {
        let grid = VoxelGrid::uniform(p(0., 0., 0.), [1.0; 3], [1, 1, 1], 0.0).unwrap();
        let v = path_source_integral(&p(0., 0., 0.), &p(1., 1., 1.), &grid, &[2.0], 0.0).unwrap();
        assert!((v - 2.0 * 3f64.sqrt()).abs() < 1e-14);
    }

    proptest! {
        #[test]
        fn unit_field_is_partition_independent(
            nx in 1usize..6, ny in 1usize..6, nz in 1usize..6, beta in 0.01..5.0f64,
            ax in 0.0..1.0f64, ay in 0.0..1.0f64, az in 0.0..1.0f64,
            bx in 0.0..1.0f64, by in 0.0..1.0f64, bz in 0.0..1.0f64,
        ) {
            let grid = VoxelGrid::uniform(
                p(0., 0., 0.),
                [1.0 / nx as f64, 1.0 / ny as f64, 1.0 / nz as f64],
                [nx, ny, nz],
                0.0,
            ).unwrap();
            let (a, b) = (p(ax, ay, az), p(bx, by, bz));
            let d = (b - a).norm();
            prop_assume!(d > 1e-6);
            let v = path_source_integral(&a, &b, &grid, &vec![1.0; grid.cell_count()], beta).unwrap();
            let exact = -(-beta * d).exp_m1() / beta;
            prop_assert!((v - exact).abs() <= 1e-12 * exact);
        }

        #[test]
        fn p1_is_symmetric(
            px in 0.0..1.0f64, py in 0.0..1.0f64, rx in 0.0..1.0f64, ry in 0.0..1.0f64,
            beta in 0.0..3.0f64,
        ) {
            let props = RadiativeProperties::new(beta + 1e-3, 0.0, 2.0).unwrap();
            let (a, b) = (p(px, py, 0.0), p(rx, 1.0, ry));
            let (na, nb) = (Vec3::z(), -Vec3::y());
            let f = kernel_value(KernelKind::P1, &a, Some(&na), &b, &nb, &props).unwrap();
            let g = kernel_value(KernelKind::P1, &b, Some(&nb), &a, &na, &props).unwrap();
            prop_assert!((f - g).abs() <= 1e-12 * f.abs().max(1e-300));
        }

        #[test]
        fn p3_over_p6_is_source_cosine(
            px in 0.0..1.0f64, py in 0.0..1.0f64, rx in 0.0..1.0f64, ry in 0.0..1.0f64,
        ) {
            let props = RadiativeProperties::new(0.5, 1.5, 2.0).unwrap();
            let (a, b) = (p(px, py, 0.0), p(rx, 1.0, ry));
            let na = Vec3::z();
            let nb = -Vec3::y();
            let p3 = kernel_value(KernelKind::P3, &a, Some(&na), &b, &nb, &props).unwrap();
            let p6 = kernel_value(KernelKind::P6, &a, None, &b, &nb, &props).unwrap();
            let geo = PairGeometry::new(&a, Some(&na), &b, &nb);
            prop_assume!(p6 > 0.0);
            prop_assert!((p3 / p6 - geo.cos_p).abs() < 1e-12);
        }
    }
}
