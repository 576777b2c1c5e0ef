//! Case pipeline behind the command line: generate, run and validate.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use log::{info, warn};
use nalgebra::DMatrix;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::assembly::{
    assemble_surface, assemble_volume, operator_row_sums, AssemblyError, AssemblyOptions, CollocationSet,
    SurfaceSystem, VisibilityRecord, VolumeSystem,
};
use crate::cases::BuiltinCase;
use crate::config::{CaseConfig, ConfigError};
use crate::geometry::io::{read_enclosure, write_enclosure};
use crate::geometry::{Enclosure, GeometryError};
use crate::kernels::{KernelError, RadiativeProperties};
use crate::profile::{emit_profile, ProfileError};
use crate::solver::{contraction_bound, solvability_margin, solve_rites, SolutionState, SolverError};
use crate::validation::{
    energy_balance, lemma1_identity, lemma3_identity, reports_csv, reports_table, row_sum_reports, visibility_oracle,
    OracleReport,
};
use crate::visibility::Source;

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Assembly(#[from] AssemblyError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error("writing {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Result of a run or validation.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub solution: SolutionState,
    /// Oracles that decide the exit status.
    pub reports: Vec<OracleReport>,
    pub output_dir: PathBuf,
}

impl RunOutcome {
    pub fn success(&self) -> bool {
        self.solution.converged && self.reports.iter().all(|r| r.pass)
    }
}

fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<(), RunError> {
    fs::write(path, contents).map_err(|source| RunError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn create_dir(path: &Path) -> Result<(), RunError> {
    fs::create_dir_all(path).map_err(|source| RunError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn absolute(path: &Path) -> PathBuf {
    std::path::absolute(path).unwrap_or_else(|_| path.to_path_buf())
}

/// Writes the enclosure and its default configuration for a built-in case.
/// Returns the path of the configuration file.
pub fn generate_case(case: BuiltinCase, resolution: usize, dir: &Path) -> Result<PathBuf, RunError> {
    let enc = case.enclosure(resolution, case.reference_temperature())?;
    create_dir(dir)?;
    write_enclosure(&dir.join("mesh.json"), &enc)?;
    let cfg = CaseConfig::for_case(case, PathBuf::from("mesh.json"), PathBuf::from("results"));
    let path = dir.join("config.json");
    write_file(&path, cfg.to_json())?;
    info!(
        "generated {} elements and {} cells in {}",
        enc.mesh().len(),
        enc.grid().cell_count(),
        dir.display()
    );
    Ok(path)
}

/// Binary dump: row and column counts as little-endian `u64`, then the
/// entries row-major as little-endian `f64`.
pub fn write_matrix(path: &Path, m: &DMatrix<f64>) -> Result<(), RunError> {
    let mut buf = Vec::with_capacity(16 + 8 * m.len());
    buf.extend_from_slice(&(m.nrows() as u64).to_le_bytes());
    buf.extend_from_slice(&(m.ncols() as u64).to_le_bytes());
    for row in m.row_iter() {
        for v in row.iter() {
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }
    write_file(path, buf)
}

fn dump_matrices(dir: &Path, surface: &SurfaceSystem, volume: &VolumeSystem) -> Result<(), RunError> {
    let column = |v: &nalgebra::DVector<f64>| DMatrix::from_column_slice(v.len(), 1, v.as_slice());
    write_matrix(&dir.join("gmat.bin"), &surface.gmat)?;
    write_matrix(&dir.join("fmat.bin"), &surface.fmat)?;
    write_matrix(&dir.join("h.bin"), &column(&surface.h))?;
    write_matrix(&dir.join("umat.bin"), &volume.umat)?;
    write_matrix(&dir.join("vmat.bin"), &volume.vmat)?;
    write_matrix(&dir.join("t.bin"), &column(&volume.t))
}

fn visibility_csv(records: &[VisibilityRecord]) -> String {
    let mut s = String::from("point,element,fraction,depth\n");
    for r in records {
        let _ = writeln!(s, "{},{},{:e},{}", r.row, r.element, r.fraction, r.depth);
    }
    s
}

fn convergence_csv(solution: &SolutionState) -> String {
    let mut s = String::from("iteration,residual,ratio\n");
    for (i, r) in solution.history.iter().enumerate() {
        let ratio = if i == 0 {
            String::new()
        } else {
            format!("{:e}", solution.ratios[i - 1])
        };
        let _ = writeln!(s, "{},{:e},{}", i + 1, r, ratio);
    }
    s
}

/// Checks that only need the geometry: kernel closure at sampled boundary
/// and interior points, and classified visibility against ray sampling on
/// sampled partially visible pairs.
fn geometric_oracles(
    cfg: &CaseConfig,
    enc: &Enclosure,
    col: &CollocationSet,
    records: &[VisibilityRecord],
) -> Vec<OracleReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let rule = cfg.quadrature_rule();
    let resolution = format!("elements={}", enc.mesh().len());
    let mut reports = Vec::new();

    let np = col.surface_len();
    for i in sample(&mut rng, np, np.min(4)).into_vec() {
        let bp = &col.boundary[i];
        let source = Source::boundary(bp.point, bp.normal, bp.element);
        let mut r = lemma1_identity(&source, enc.mesh(), &rule, &resolution);
        r.name = format!("lemma1_closure[point {i}]");
        reports.push(r);
    }
    let ni = col.medium_len();
    for j in sample(&mut rng, ni, ni.min(2)).into_vec() {
        let mut r = lemma3_identity(&col.cell_centers[j], enc.mesh(), 0.0, &rule, &resolution);
        r.name = format!("lemma3_solid_angle[cell {j}]");
        reports.push(r);
    }

    let partial: Vec<&VisibilityRecord> = records
        .iter()
        .filter(|r| r.fraction > 0.0 && r.fraction < 1.0)
        .collect();
    for idx in sample(&mut rng, partial.len(), partial.len().min(4)).into_vec() {
        let rec = partial[idx];
        let bp = &col.boundary[rec.row];
        let source = Source::boundary(bp.point, bp.normal, bp.element);
        let oracle = visibility_oracle(&source, rec.element, enc.mesh(), 10_000, cfg.seed);
        reports.push(OracleReport::absolute(
            &format!("visibility[point {} element {}]", rec.row, rec.element),
            rec.fraction,
            oracle,
            0.02,
            &format!("min_area={:e}", cfg.visibility.min_subdiv_area),
        ));
    }
    reports
}

fn execute(cfg: &CaseConfig, full: bool) -> Result<RunOutcome, RunError> {
    cfg.validate()?;
    let started = Instant::now();
    let enc = read_enclosure(&cfg.mesh)?;
    let props = RadiativeProperties::new(cfg.properties.sigma_a, cfg.properties.sigma_s, enc.diameter())?;
    let eps_min = enc.mesh().min_emissivity();
    let margin = solvability_margin(&props, eps_min);
    let bound = contraction_bound(&props, eps_min, enc.diameter());
    if margin <= 0.0 {
        warn!("solvability condition not met (margin {margin:.4}); the solution may not be unique");
    }
    if bound >= 1.0 {
        warn!("contraction bound {bound:.4} is not below 1; convergence is not guaranteed");
    }

    let col = CollocationSet::new(&enc);
    info!(
        "{} elements, {} collocation points, {} medium cells",
        enc.mesh().len(),
        col.surface_len(),
        col.medium_len()
    );
    let options = AssemblyOptions {
        quadrature: cfg.quadrature_rule(),
        visibility: cfg.visibility_options(),
    };
    let (surface, surface_vis) = assemble_surface(&enc, &props, &col, &options)?;
    let (volume, _) = assemble_volume(&enc, &props, &col, &options)?;
    info!("assembly finished after {:.2} s", started.elapsed().as_secs_f64());

    let solution = match solve_rites(&surface, &volume, &cfg.solver_config()) {
        Ok(s) => s,
        Err(SolverError::NotConverged { state, .. }) => *state,
        Err(e) => return Err(e.into()),
    };

    let resolution = format!("elements={};cells={}", enc.mesh().len(), col.medium_len());
    let mut reports = vec![energy_balance(
        &solution,
        &enc,
        &col,
        props.sigma_a(),
        props.stefan_boltzmann(),
        &resolution,
    )];
    reports.extend(row_sum_reports(
        &operator_row_sums(&surface, &volume, &props, &enc),
        &resolution,
    ));
    if full {
        reports.extend(geometric_oracles(cfg, &enc, &col, &surface_vis));
    }

    let dir = &cfg.output_dir;
    create_dir(dir)?;
    let reference_power = cfg.reference_temperature.map(|t| props.blackbody(t).0);
    for spec in &cfg.profiles {
        let profile = emit_profile(&solution, &enc, &col, spec)?;
        write_file(
            &dir.join(format!("profile_{}.csv", spec.name)),
            profile.to_csv(reference_power),
        )?;
    }
    write_file(&dir.join("convergence.csv"), convergence_csv(&solution))?;
    write_file(&dir.join("oracles.csv"), reports_csv(&reports))?;
    write_file(&dir.join("oracles.txt"), reports_table(&reports))?;
    let mut echo = cfg.clone();
    echo.mesh = absolute(&cfg.mesh);
    echo.output_dir = absolute(&cfg.output_dir);
    write_file(&dir.join("config.json"), echo.to_json())?;
    if cfg.dump_matrices {
        dump_matrices(dir, &surface, &volume)?;
    }
    if cfg.dump_visibility {
        write_file(&dir.join("visibility.csv"), visibility_csv(&surface_vis))?;
    }

    let mut summary = String::new();
    let _ = writeln!(summary, "elements: {}", enc.mesh().len());
    let _ = writeln!(summary, "medium cells: {}", col.medium_len());
    let _ = writeln!(summary, "solvability margin: {margin:.6}");
    let _ = writeln!(summary, "contraction bound: {bound:.6}");
    let _ = writeln!(summary, "converged: {}", solution.converged);
    let _ = writeln!(summary, "outer iterations: {}", solution.iterations());
    if let Some(r) = solution.contraction_ratio(5) {
        let _ = writeln!(summary, "observed contraction ratio: {r:.6}");
    }
    write_file(&dir.join("summary.txt"), summary)?;
    info!("finished after {:.2} s", started.elapsed().as_secs_f64());

    Ok(RunOutcome {
        solution,
        reports,
        output_dir: dir.clone(),
    })
}

/// Assembles and solves the case, checks energy balance and operator row
/// sums, and writes profiles, the convergence log and the oracle table.
pub fn run_case(cfg: &CaseConfig) -> Result<RunOutcome, RunError> {
    execute(cfg, false)
}

/// Like [`run_case`], additionally checking kernel closure at sampled points
/// and classified visibility against ray sampling.
pub fn validate_case(cfg: &CaseConfig) -> Result<RunOutcome, RunError> {
    execute(cfg, true)
}
