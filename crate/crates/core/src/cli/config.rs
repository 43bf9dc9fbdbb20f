//! Experiment configuration: a versioned JSON schema covering the domain,
//! grid, kernel, resource family, dispersal rates and solver tolerances.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::analysis::{self, SweepConfig};
use crate::error::{Error, Result};
use crate::grid::{Domain, Grid};
use crate::kernel::{Backend, BoundaryCondition, DiscreteOperator, KernelSpec};
use crate::resources::{ResourceFamily, MIN_SUPPORT_CELLS};
use crate::spectral::EigenOptions;
use crate::steady::SolveOptions;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub domain: Domain,
    #[serde(default)]
    pub grid: GridConfig,
    pub kernel: KernelConfig,
    #[serde(default = "default_bc")]
    pub boundary_condition: BoundaryCondition,
    #[serde(default)]
    pub backend: BackendConfig,
    pub resource: ResourceFamily,
    #[serde(default)]
    pub d: Option<f64>,
    #[serde(default)]
    pub d_grid: Option<DGridConfig>,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub eigen: EigenConfig,
    #[serde(default)]
    pub epsilon_grid: EpsilonGridConfig,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

fn default_bc() -> BoundaryCondition {
    BoundaryCondition::Neumann
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    /// Fixed cells per axis; omit to choose automatically from the kernel
    /// and resource-support guards.
    #[serde(default)]
    pub cells_per_axis: Option<usize>,
    #[serde(default = "default_min_support_cells")]
    pub min_support_cells: usize,
}

fn default_min_support_cells() -> usize {
    MIN_SUPPORT_CELLS
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            cells_per_axis: None,
            min_support_cells: MIN_SUPPORT_CELLS,
        }
    }
}

/// Kernel selection; tabulated kernels come from a two-column CSV
/// (radius, value).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KernelConfig {
    Uniform { radius: f64 },
    Tent { radius: f64 },
    TruncatedGaussian { sigma: f64, cutoff: f64 },
    Ring { delta: f64, slope: f64 },
    Tabulated { path: PathBuf },
}

impl KernelConfig {
    pub fn resolve(&self, config_dir: &Path) -> Result<KernelSpec> {
        Ok(match self {
            KernelConfig::Uniform { radius } => KernelSpec::Uniform { radius: *radius },
            KernelConfig::Tent { radius } => KernelSpec::Tent { radius: *radius },
            KernelConfig::TruncatedGaussian { sigma, cutoff } => {
                KernelSpec::TruncatedGaussian {
                    sigma: *sigma,
                    cutoff: *cutoff,
                }
            }
            KernelConfig::Ring { delta, slope } => KernelSpec::Ring {
                delta: *delta,
                slope: *slope,
            },
            KernelConfig::Tabulated { path } => {
                let full = if path.is_absolute() {
                    path.clone()
                } else {
                    config_dir.join(path)
                };
                KernelSpec::from_csv(&full)?
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum BackendConfig {
    #[default]
    Auto,
    Dense,
    MatrixFree,
    Fft,
}

impl BackendConfig {
    pub fn resolve(&self, grid: &Grid, kernel: &KernelSpec) -> Backend {
        match self {
            BackendConfig::Auto => Backend::auto(grid, kernel),
            BackendConfig::Dense => Backend::Dense,
            BackendConfig::MatrixFree => Backend::MatrixFree,
            BackendConfig::Fft => Backend::Fft,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DGridConfig {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
    #[serde(default = "default_scale")]
    pub scale: GridScale,
}

fn default_scale() -> GridScale {
    GridScale::Geometric
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridScale {
    Geometric,
    Linear,
}

impl DGridConfig {
    pub fn values(&self) -> Result<Vec<f64>> {
        analysis::d_grid(
            self.lo,
            self.hi,
            self.points,
            self.scale == GridScale::Geometric,
        )
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let d = SolveOptions::default();
        SolverConfig {
            tol: d.tol,
            max_iter: d.max_iter,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EigenConfig {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for EigenConfig {
    fn default() -> Self {
        let d = EigenOptions::default();
        EigenConfig {
            tol: d.tol,
            max_iter: d.max_iter,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EpsilonGridConfig {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl Default for EpsilonGridConfig {
    fn default() -> Self {
        EpsilonGridConfig {
            lo: 1e-3,
            hi: 4.0,
            points: 24,
        }
    }
}

impl EpsilonGridConfig {
    pub fn values(&self) -> Result<Vec<f64>> {
        if !(self.lo > 0.0 && self.hi > self.lo && self.points >= 2) {
            return Err(Error::Config(format!("bad epsilon grid: {self:?}")));
        }
        let ratio = (self.hi / self.lo).powf(1.0 / (self.points - 1) as f64);
        Ok((0..self.points)
            .map(|i| self.lo * ratio.powi(i as i32))
            .collect())
    }
}

/// Validated, resolved experiment inputs.
pub struct ResolvedConfig {
    pub config: ExperimentConfig,
    pub kernel: KernelSpec,
    pub epsilon_grid: Vec<f64>,
}

impl ExperimentConfig {
    pub fn from_path(path: &Path) -> Result<ResolvedConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("reading {}: {e}", path.display())))?;
        let config: ExperimentConfig = serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("parsing {}: {e}", path.display())))?;
        let dir = path.parent().unwrap_or(Path::new(".")).to_path_buf();
        config.resolve(&dir)
    }

    pub fn resolve(mut self, config_dir: &Path) -> Result<ResolvedConfig> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "schema_version {} unsupported (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        self.domain.validate()?;
        if let ResourceFamily::Csv { path } = &mut self.resource {
            if !path.is_absolute() {
                *path = config_dir.join(&*path);
            }
        }
        let kernel = self.kernel.resolve(config_dir)?;
        kernel.validate(self.domain.dim())?;
        if let Some(d) = self.d {
            if !(d > 0.0 && d.is_finite()) {
                return Err(Error::Config(format!("d = {d} must be positive")));
            }
        }
        if let Some(g) = &self.d_grid {
            g.values()?;
        }
        if !(self.solver.tol > 0.0 && self.eigen.tol > 0.0) {
            return Err(Error::Config("tolerances must be positive".into()));
        }
        let epsilon_grid = self.epsilon_grid.values()?;
        Ok(ResolvedConfig {
            config: self,
            kernel,
            epsilon_grid,
        })
    }
}

impl ResolvedConfig {
    /// d for single-solve commands.
    pub fn require_d(&self) -> Result<f64> {
        self.config
            .d
            .ok_or_else(|| Error::Config("this command needs \"d\" in the config".into()))
    }

    pub fn require_d_grid(&self) -> Result<Vec<f64>> {
        self.config
            .d_grid
            .as_ref()
            .ok_or_else(|| Error::Config("this command needs \"d_grid\" in the config".into()))?
            .values()
    }

    /// Build the grid (auto resolution honors the kernel and support
    /// guards) and the discrete operator.
    pub fn build_operator(&self, d_for_support: Option<f64>) -> Result<(Arc<Grid>, DiscreteOperator)> {
        let n = match self.config.grid.cells_per_axis {
            Some(n) => n,
            None => analysis::auto_cells_per_axis(
                &self.config.domain,
                &self.kernel,
                d_for_support.and_then(|d| self.config.resource.support_measure_at(d)),
                self.config.grid.min_support_cells,
            )?,
        };
        let grid = Arc::new(Grid::build(&self.config.domain, n)?);
        let backend = self.config.backend.resolve(&grid, &self.kernel);
        let op = DiscreteOperator::build(
            grid.clone(),
            self.kernel.clone(),
            self.config.boundary_condition,
            backend,
        )?;
        Ok((grid, op))
    }

    pub fn solve_options(&self) -> SolveOptions {
        SolveOptions {
            tol: self.config.solver.tol,
            max_iter: self.config.solver.max_iter,
            eigen: self.eigen_options(),
        }
    }

    pub fn eigen_options(&self) -> EigenOptions {
        EigenOptions {
            tol: self.config.eigen.tol,
            max_iter: self.config.eigen.max_iter,
        }
    }

    pub fn sweep_config(&self) -> SweepConfig {
        SweepConfig {
            cells_per_axis: self.config.grid.cells_per_axis,
            min_support_cells: self.config.grid.min_support_cells,
            backend: match self.config.backend {
                BackendConfig::Auto => None,
                BackendConfig::Dense => Some(Backend::Dense),
                BackendConfig::MatrixFree => Some(Backend::MatrixFree),
                BackendConfig::Fft => Some(Backend::Fft),
            },
            bc: self.config.boundary_condition,
            tol: self.config.solver.tol,
            max_iter: self.config.solver.max_iter,
            fit_window_start: None,
        }
    }
}
