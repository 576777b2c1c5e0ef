//! Run configuration, read from and echoed to JSON.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cases::BuiltinCase;
use crate::profile::{ProfileSpec, Quantity};
use crate::quadrature::AdaptiveRule;
use crate::solver::SolverConfig;
use crate::validation::DEFAULT_SEED;
use crate::visibility::{SubdivisionBudget, VisibilityOptions};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("reading {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("parsing {path}: {source}")]
    Parse {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PropertiesConfig {
    pub sigma_a: f64,
    pub sigma_s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSettings {
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        let d = SolverConfig::default();
        Self {
            tolerance: d.tolerance,
            max_iterations: d.max_iterations,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureSettings {
    /// Gauss order used for far elements; nearer bands use 2x and 4x.
    pub order: usize,
    pub max_near_depth: usize,
}

impl Default for QuadratureSettings {
    fn default() -> Self {
        let d = AdaptiveRule::default();
        Self {
            order: d.base_order,
            max_near_depth: d.max_near_depth,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VisibilitySettings {
    /// Minimum sub-element area relative to the element area.
    pub min_subdiv_area: f64,
    pub max_depth: usize,
    pub culls: bool,
}

impl Default for VisibilitySettings {
    fn default() -> Self {
        let d = SubdivisionBudget::default();
        Self {
            min_subdiv_area: d.min_area_rel,
            max_depth: d.max_depth,
            culls: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaseConfig {
    /// Mesh file; relative paths resolve against the config file's directory.
    pub mesh: PathBuf,
    pub properties: PropertiesConfig,
    #[serde(default)]
    pub solver: SolverSettings,
    #[serde(default)]
    pub quadrature: QuadratureSettings,
    #[serde(default)]
    pub visibility: VisibilitySettings,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub profiles: Vec<ProfileSpec>,
    /// Temperature whose emissive power normalizes profile output.
    #[serde(default)]
    pub reference_temperature: Option<f64>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub dump_matrices: bool,
    #[serde(default)]
    pub dump_visibility: bool,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

impl CaseConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut cfg: CaseConfig = serde_json::from_str(&text).map_err(|source| ConfigError::Parse {
            path: path.to_path_buf(),
            source,
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        if cfg.mesh.is_relative() {
            cfg.mesh = base.join(&cfg.mesh);
        }
        if cfg.output_dir.is_relative() {
            cfg.output_dir = base.join(&cfg.output_dir);
        }
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("configuration serializes")
    }

    /// Checks value ranges and that the mesh file exists.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: &str| Err(ConfigError::Invalid(m.to_string()));
        let p = self.properties;
        if !(p.sigma_a >= 0.0 && p.sigma_s >= 0.0 && p.sigma_a + p.sigma_s > 0.0) {
            return bad("sigma_a and sigma_s must be >= 0 with a positive sum");
        }
        if self.solver.tolerance.is_nan() || self.solver.tolerance <= 0.0 || self.solver.max_iterations == 0 {
            return bad("solver tolerance must be positive and max_iterations >= 1");
        }
        if self.quadrature.order == 0 || 4 * self.quadrature.order > 64 {
            return bad("quadrature order must be between 1 and 16");
        }
        if self.visibility.min_subdiv_area.is_nan()
            || self.visibility.min_subdiv_area <= 0.0
            || self.visibility.max_depth == 0
        {
            return bad("min_subdiv_area must be positive and max_depth >= 1");
        }
        if let Some(s) = self.profiles.iter().find(|s| s.samples < 2) {
            return Err(ConfigError::Invalid(format!(
                "profile '{}' needs at least 2 samples",
                s.name
            )));
        }
        if !self.mesh.is_file() {
            return Err(ConfigError::Invalid(format!(
                "mesh file {} not found",
                self.mesh.display()
            )));
        }
        Ok(())
    }

    pub fn solver_config(&self) -> SolverConfig {
        SolverConfig {
            tolerance: self.solver.tolerance,
            max_iterations: self.solver.max_iterations,
        }
    }

    pub fn quadrature_rule(&self) -> AdaptiveRule {
        AdaptiveRule {
            base_order: self.quadrature.order,
            max_near_depth: self.quadrature.max_near_depth,
        }
    }

    pub fn visibility_options(&self) -> VisibilityOptions {
        VisibilityOptions {
            budget: SubdivisionBudget {
                min_area_rel: self.visibility.min_subdiv_area,
                max_depth: self.visibility.max_depth,
            },
            culls: self.visibility.culls,
        }
    }

    /// Default configuration of a built-in case whose mesh lives at `mesh`.
    pub fn for_case(case: BuiltinCase, mesh: PathBuf, output_dir: PathBuf) -> Self {
        let line = |name: &str, start: [f64; 3], end: [f64; 3], quantity| ProfileSpec {
            name: name.to_string(),
            start,
            end,
            samples: 41,
            quantity,
        };
        let (properties, profiles) = match case {
            BuiltinCase::Cube => (
                PropertiesConfig {
                    sigma_a: 0.0,
                    sigma_s: 1.0,
                },
                vec![
                    line("C1C2", [0.0, 0.5, 1.0], [1.0, 0.5, 1.0], Quantity::Flux),
                    line("top_y", [0.5, 0.0, 1.0], [0.5, 1.0, 1.0], Quantity::Flux),
                    line("A1A2", [0.0, 0.0, 0.5], [0.0, 1.0, 0.5], Quantity::Flux),
                    line("B1B2", [0.0, 0.5, 0.5], [1.0, 0.5, 0.5], Quantity::IncidentEnergy),
                ],
            ),
            BuiltinCase::Lshape => (
                PropertiesConfig {
                    sigma_a: 0.5,
                    sigma_s: 0.0,
                },
                vec![
                    line("AA", [0.5, 0.0, 0.0], [0.5, 3.0, 0.0], Quantity::Flux),
                    line("BB", [0.0, 1.5, 0.0], [1.0, 1.5, 0.0], Quantity::Flux),
                ],
            ),
        };
        Self {
            mesh,
            properties,
            solver: SolverSettings::default(),
            quadrature: QuadratureSettings::default(),
            visibility: VisibilitySettings::default(),
            output_dir,
            profiles,
            reference_temperature: Some(case.reference_temperature()),
            seed: DEFAULT_SEED,
            dump_matrices: false,
            dump_visibility: false,
        }
    }
}
