//! Outer/inner fixed-point iteration for the coupled boundary and medium
//! equations, with the a priori solvability and contraction estimates.

use log::{info, warn};
use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::assembly::{SurfaceSystem, VolumeSystem};
use crate::kernels::RadiativeProperties;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("inner system I - Gmat is singular")]
    SingularInnerSystem,
    #[error("no convergence after {iterations} outer iterations (last change {residual:e})")]
    NotConverged {
        iterations: usize,
        residual: f64,
        state: Box<SolutionState>,
    },
    #[error("block dimensions do not match")]
    DimensionMismatch,
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Relative sup-norm change of G at which iteration stops.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tolerance: 1e-8,
            max_iterations: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolutionState {
    /// Net absorbed surface flux at the boundary collocation points (W/m^2).
    pub q: Vec<f64>,
    /// Incident energy of each medium cell (W/m^2).
    pub g: Vec<f64>,
    /// Relative sup-norm change of G per outer iteration.
    pub history: Vec<f64>,
    /// Ratio of successive absolute changes of G.
    pub ratios: Vec<f64>,
    pub converged: bool,
}

impl SolutionState {
    pub fn iterations(&self) -> usize {
        self.history.len()
    }

    /// Largest ratio of successive changes over the last `n` iterations.
    pub fn contraction_ratio(&self, n: usize) -> Option<f64> {
        let tail = &self.ratios[self.ratios.len().saturating_sub(n)..];
        tail.iter().copied().reduce(f64::max)
    }
}

/// Margin of the unique-solvability condition `sigma_s / (beta + sigma_s) < eps_min`.
/// Positive means satisfied.
pub fn solvability_margin(props: &RadiativeProperties, eps_min: f64) -> f64 {
    let ss = props.sigma_s();
    let denom = props.beta() + ss;
    let ratio = if denom > 0.0 { ss / denom } else { 0.0 };
    eps_min - ratio
}

/// Contraction estimate `(sigma_s / beta)(1 / eps_min - exp(-beta R))` of the
/// outer iteration; convergence is guaranteed below 1.
pub fn contraction_bound(props: &RadiativeProperties, eps_min: f64, diameter: f64) -> f64 {
    if props.sigma_s() == 0.0 {
        return 0.0;
    }
    props.sigma_s() / props.beta() * (1.0 / eps_min - (-props.beta() * diameter).exp())
}

fn sup_norm(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn is_zero(m: &DMatrix<f64>) -> bool {
    m.iter().all(|&v| v == 0.0)
}

/// Runs the two-level iteration: each outer step solves
/// `(I - Gmat) q = Fmat G + h` with a factorization computed once, then
/// updates `G = Umat G + Vmat q + t`.
///
/// Starts from the equilibrium guess `G = 4 sigma T^4`.
pub fn solve_rites(
    surface: &SurfaceSystem,
    volume: &VolumeSystem,
    config: &SolverConfig,
) -> Result<SolutionState, SolverError> {
    let np = surface.gmat.nrows();
    let ni = volume.umat.nrows();
    if surface.gmat.ncols() != np
        || surface.fmat.shape() != (np, ni)
        || surface.h.len() != np
        || volume.umat.ncols() != ni
        || volume.vmat.shape() != (ni, np)
        || volume.t.len() != ni
        || volume.g_equilibrium.len() != ni
    {
        return Err(SolverError::DimensionMismatch);
    }
    if config.tolerance.is_nan() || config.tolerance <= 0.0 || config.max_iterations == 0 {
        return Err(SolverError::InvalidConfig(
            "tolerance must be positive and max iterations at least 1".into(),
        ));
    }

    let inner = DMatrix::identity(np, np) - &surface.gmat;
    let lu = inner.lu();
    if !lu.is_invertible() {
        return Err(SolverError::SingularInnerSystem);
    }
    let solve_q = |g: &DVector<f64>| -> Result<DVector<f64>, SolverError> {
        let rhs = &surface.fmat * g + &surface.h;
        lu.solve(&rhs).ok_or(SolverError::SingularInnerSystem)
    };
    // Without scattering neither equation feeds back into G, so one outer
    // step reaches the fixed point exactly.
    let one_shot = is_zero(&surface.fmat) && is_zero(&volume.umat);

    let mut g = volume.g_equilibrium.clone();
    let mut q = solve_q(&g)?;
    let mut history = Vec::new();
    let mut ratios = Vec::new();
    let mut prev_change: Option<f64> = None;
    for n in 1..=config.max_iterations {
        let g_next = &volume.umat * &g + &volume.vmat * &q + &volume.t;
        let change = sup_norm(&(&g_next - &g));
        let scale = sup_norm(&g_next);
        let mut residual = if scale > 0.0 { change / scale } else { change };
        if one_shot && n == 1 {
            // The next update would reproduce g_next bit for bit.
            residual = 0.0;
        }
        let ratio = prev_change.map(|p| if p > 0.0 { change / p } else { 0.0 });
        match ratio {
            Some(r) => info!("outer iteration {n}: change {residual:.3e}, ratio {r:.4}"),
            None => info!("outer iteration {n}: change {residual:.3e}"),
        }
        if let Some(r) = ratio {
            ratios.push(r);
        }
        prev_change = Some(change);
        history.push(residual);
        g = g_next;
        q = solve_q(&g)?;
        if residual <= config.tolerance {
            return Ok(SolutionState {
                q: q.iter().copied().collect(),
                g: g.iter().copied().collect(),
                history,
                ratios,
                converged: true,
            });
        }
    }
    let residual = *history.last().unwrap_or(&f64::INFINITY);
    warn!("outer iteration did not converge (last change {residual:e})");
    Err(SolverError::NotConverged {
        iterations: history.len(),
        residual,
        state: Box::new(SolutionState {
            q: q.iter().copied().collect(),
            g: g.iter().copied().collect(),
            history,
            ratios,
            converged: false,
        }),
    })
}
