//! Run configuration: one structured file per run, schema-validated with
//! unknown keys rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use nlwave_core::{Error, Kernel, ModelParams, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub params: ParamsCfg,
    pub kernel1: KernelCfg,
    pub kernel2: KernelCfg,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub speed: Option<SpeedCfg>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub roots: Option<RootsCfg>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<BoundsCfg>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wave: Option<WaveCfg>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulate: Option<SimulateCfg>,
    #[serde(default, rename = "validate-kernel", skip_serializing_if = "Option::is_none")]
    pub validate_kernel: Option<ValidateKernelCfg>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsCfg {
    pub a: f64,
    pub b: f64,
    pub d: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum KernelCfg {
    Uniform { radius: f64 },
    Triangular { radius: f64 },
    TruncatedGaussian { sigma: f64, radius: f64 },
    Laplace { rate: f64 },
    Gaussian { sigma: f64 },
    Tabulated { path: PathBuf },
}

/// A speed given either as a number (supercritical) or the string
/// `"critical"` for `s = s*`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SpeedSpec {
    Value(f64),
    Keyword(String),
}

impl SpeedSpec {
    /// `None` means the critical speed.
    pub fn resolve(&self) -> Result<Option<f64>> {
        match self {
            SpeedSpec::Value(s) => {
                if s.is_finite() && *s > 0.0 {
                    Ok(Some(*s))
                } else {
                    Err(Error::Invalid(format!("field s must be positive and finite, got {s}")))
                }
            }
            SpeedSpec::Keyword(w) if w == "critical" => Ok(None),
            SpeedSpec::Keyword(w) => {
                Err(Error::Invalid(format!("field s must be a number or \"critical\", got {w:?}")))
            }
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpeedCfg {}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RootsCfg {
    pub s: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsCfg {
    pub s: SpeedSpec,
    #[serde(default = "default_grid_span")]
    pub grid_span: f64,
    #[serde(default = "default_grid_n")]
    pub grid_n: usize,
    #[serde(default = "default_kink_radius")]
    pub kink_radius: f64,
}

fn default_grid_span() -> f64 {
    50.0
}
fn default_grid_n() -> usize {
    20_000
}
fn default_kink_radius() -> f64 {
    1e-3
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaveCfg {
    pub s: SpeedSpec,
    #[serde(rename = "L")]
    pub half_width: f64,
    pub n: usize,
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    /// Reuse a bundle document written by the `bounds` command instead of
    /// constructing one in-process.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bundle: Option<PathBuf>,
}

fn default_max_iter() -> usize {
    60_000
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateCfg {
    pub initial: InitialCfg,
    #[serde(rename = "X")]
    pub x_max: f64,
    pub h: f64,
    #[serde(rename = "T")]
    pub t_end: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level: Option<f64>,
    #[serde(default = "default_snapshot_every")]
    pub snapshot_every: f64,
}

fn default_snapshot_every() -> f64 {
    10.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitialCfg {
    /// Prey at carrying capacity, predator 0.5 on [0, 1].
    Invasion,
    /// A profile written by the `wave` command, embedded at `offset`.
    Wave {
        profile: PathBuf,
        sidecar: PathBuf,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        offset: Option<f64>,
    },
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidateKernelCfg {}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Invalid(format!("cannot read config {}: {e}", path.display())))?;
        let cfg: RunConfig = serde_json::from_str(&text)
            .map_err(|e| Error::Invalid(format!("config {}: {e}", path.display())))?;
        Ok(cfg)
    }

    pub fn model_params(&self) -> Result<ModelParams> {
        ModelParams::new(self.params.a, self.params.b, self.params.d)
    }

    pub fn kernel(&self, which: u8, config_dir: &Path) -> Result<Kernel> {
        let cfg = if which == 1 { &self.kernel1 } else { &self.kernel2 };
        match cfg {
            KernelCfg::Uniform { radius } => Kernel::uniform(*radius),
            KernelCfg::Triangular { radius } => Kernel::triangular(*radius),
            KernelCfg::TruncatedGaussian { sigma, radius } => {
                Kernel::truncated_gaussian(*sigma, *radius)
            }
            KernelCfg::Laplace { rate } => Kernel::laplace(*rate),
            KernelCfg::Gaussian { sigma } => Kernel::gaussian(*sigma),
            KernelCfg::Tabulated { path } => {
                let resolved = if path.is_absolute() { path.clone() } else { config_dir.join(path) };
                let text = std::fs::read_to_string(&resolved).map_err(|e| {
                    Error::Invalid(format!("cannot read kernel table {}: {e}", resolved.display()))
                })?;
                Kernel::tabulated_from_str(&text)
            }
        }
    }
}
