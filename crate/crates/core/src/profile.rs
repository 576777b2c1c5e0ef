//! Sampling of the solution along straight lines for plotting.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::assembly::CollocationSet;
use crate::geometry::{Enclosure, Point3};
use crate::solver::SolutionState;

#[derive(Debug, Error, PartialEq)]
pub enum ProfileError {
    #[error("profile '{name}': sample {index} at ({x}, {y}, {z}) is outside the domain")]
    LineOutsideDomain {
        name: String,
        index: usize,
        x: f64,
        y: f64,
        z: f64,
    },
    #[error("profile '{0}' needs at least 2 samples")]
    TooFewSamples(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Quantity {
    /// Net absorbed wall flux; the line must lie on the boundary.
    #[serde(rename = "q")]
    Flux,
    /// Incident energy; the line must lie in the medium.
    #[serde(rename = "G")]
    IncidentEnergy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileSpec {
    pub name: String,
    pub start: [f64; 3],
    pub end: [f64; 3],
    pub samples: usize,
    pub quantity: Quantity,
}

/// One sampled profile.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    pub quantity: Quantity,
    pub arclength: Vec<f64>,
    pub points: Vec<Point3>,
    pub values: Vec<f64>,
}

impl Profile {
    /// CSV with a units header. With a reference emissive power, a
    /// normalized column is appended.
    pub fn to_csv(&self, reference_power: Option<f64>) -> String {
        let label = match self.quantity {
            Quantity::Flux => "q",
            Quantity::IncidentEnergy => "G",
        };
        let mut s = format!("s [m],x [m],y [m],z [m],{label} [W/m^2]");
        if reference_power.is_some() {
            let _ = write!(s, ",{label}/(sigma T_ref^4) [-]");
        }
        s.push('\n');
        for ((t, p), v) in self.arclength.iter().zip(&self.points).zip(&self.values) {
            let _ = write!(s, "{t:e},{:e},{:e},{:e},{v:e}", p.x, p.y, p.z);
            if let Some(e) = reference_power {
                let _ = write!(s, ",{:e}", v / e);
            }
            s.push('\n');
        }
        s
    }
}

/// Mean value over the entities nearest to `x`; entities within a relative
/// `1e-9` of the minimum distance count as tied.
fn nearest_mean<'a>(x: &Point3, entities: impl Iterator<Item = (&'a Point3, f64)> + Clone) -> f64 {
    let best = entities
        .clone()
        .map(|(p, _)| (p - x).norm())
        .fold(f64::INFINITY, f64::min);
    let tol = 1e-9 * best.max(1e-12);
    let (sum, count) = entities
        .filter(|(p, _)| (*p - x).norm() <= best + tol)
        .fold((0.0, 0usize), |(s, c), (_, v)| (s + v, c + 1));
    sum / count as f64
}

/// Samples the solution at evenly spaced points on the line, taking each
/// value from the nearest collocation entity without interpolation.
pub fn emit_profile(
    solution: &SolutionState,
    enc: &Enclosure,
    col: &CollocationSet,
    spec: &ProfileSpec,
) -> Result<Profile, ProfileError> {
    if spec.samples < 2 {
        return Err(ProfileError::TooFewSamples(spec.name.clone()));
    }
    let a = Point3::from(spec.start);
    let b = Point3::from(spec.end);
    let length = (b - a).norm();
    let tol = 1e-9 * enc.diameter();
    let mut profile = Profile {
        quantity: spec.quantity,
        arclength: Vec::with_capacity(spec.samples),
        points: Vec::with_capacity(spec.samples),
        values: Vec::with_capacity(spec.samples),
    };
    for i in 0..spec.samples {
        let t = i as f64 / (spec.samples - 1) as f64;
        let x = a + (b - a) * t;
        let outside = || ProfileError::LineOutsideDomain {
            name: spec.name.clone(),
            index: i,
            x: x.x,
            y: x.y,
            z: x.z,
        };
        let value = match spec.quantity {
            Quantity::Flux => {
                let on_surface = enc.mesh().elements().iter().any(|e| e.distance_to(&x) <= tol);
                if !on_surface {
                    return Err(outside());
                }
                nearest_mean(
                    &x,
                    col.boundary.iter().map(|bp| &bp.point).zip(solution.q.iter().copied()),
                )
            }
            Quantity::IncidentEnergy => {
                let inside = enc.grid().locate(&x).is_some_and(|c| enc.interior()[c]);
                if !inside {
                    return Err(outside());
                }
                nearest_mean(&x, col.cell_centers.iter().zip(solution.g.iter().copied()))
            }
        };
        profile.arclength.push(t * length);
        profile.points.push(x);
        profile.values.push(value);
    }
    Ok(profile)
}
