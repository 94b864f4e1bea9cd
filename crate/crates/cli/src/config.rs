//! JSON run configuration.

use std::f64::consts::PI;
use std::path::Path;

use kinlab::collision::{KernelParams, SphereQuadrature, VelocityGrid};
use kinlab::lp::FourierGrid;
use kinlab::solver::SolverConfig;
use kinlab::verify::VerifyConfig;
use kinlab::{Error, Result};
use serde::{Deserialize, Serialize};

/// Version string every config must carry.
pub const CONFIG_VERSION: &str = "kinlab-config/1";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub dim: usize,
    pub x_points: usize,
    /// Torus side length.
    pub length: f64,
    pub v_points: usize,
    pub half_width: f64,
    pub sphere_nodes: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            dim: 1,
            x_points: 64,
            length: 2.0 * PI,
            v_points: VelocityGrid::DEFAULT_POINTS,
            half_width: VelocityGrid::DEFAULT_HALF_WIDTH,
            sphere_nodes: SphereQuadrature::DEFAULT_NODES,
        }
    }
}

impl GridConfig {
    pub fn spatial(&self) -> Result<FourierGrid> {
        FourierGrid::with_length(self.dim, self.x_points, self.length)
    }

    pub fn velocity(&self) -> Result<VelocityGrid> {
        VelocityGrid::new(self.half_width, self.v_points)
    }

    pub fn sphere(&self) -> Result<SphereQuadrature> {
        SphereQuadrature::fibonacci(self.sphere_nodes)
    }
}

/// Time integration scheme of `simulate`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum RunMode {
    #[default]
    Direct,
    Picard,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    /// Write every stored snapshot as a field file.
    pub snapshots: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { snapshots: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub version: String,
    #[serde(default)]
    pub grids: GridConfig,
    #[serde(default)]
    pub kernel: KernelParams,
    #[serde(default)]
    pub mode: RunMode,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub verify: VerifyConfig,
    /// Output directory, relative to the working directory.
    #[serde(default = "default_out")]
    pub out_dir: String,
    #[serde(default)]
    pub output: OutputConfig,
}

fn default_out() -> String {
    "out".into()
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            version: CONFIG_VERSION.into(),
            grids: GridConfig::default(),
            kernel: KernelParams::default(),
            mode: RunMode::default(),
            solver: SolverConfig::default(),
            verify: VerifyConfig::default(),
            out_dir: default_out(),
            output: OutputConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::InvalidParameter(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidParameter(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != CONFIG_VERSION {
            return Err(Error::InvalidParameter(format!(
                "config version {:?}, this binary reads {CONFIG_VERSION:?}",
                self.version
            )));
        }
        self.grids.spatial()?;
        self.grids.velocity()?;
        self.grids.sphere()?;
        self.kernel.validate()?;
        self.solver.validate()?;
        self.verify.validate()
    }

    /// Canonical JSON (field order fixed by the types), the hashed form.
    pub fn canonical(&self) -> String {
        serde_json::to_string(self).expect("config serialises")
    }
}
