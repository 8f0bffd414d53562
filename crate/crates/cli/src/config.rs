//! Effective run configuration: built-in defaults, overridden by a JSON
//! config file, overridden by command-line flags.

use std::path::{Path, PathBuf};

use bonemap4d::camera::DepthMode;
use bonemap4d::sampler::toy::ToyKind;
use bonemap4d::sampler::WindowConfig;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub render: RenderConfig,
    pub align: AlignConfig,
    pub inspect: InspectConfig,
    pub sample_demo: SampleConfig,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::Core(bonemap4d::Error::Io {
                path: path.into(),
                source: e,
            })
        })?;
        serde_json::from_str(&text).map_err(|e| {
            CliError::Core(bonemap4d::Error::Parse(format!("{}: {e}", path.display())))
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RenderConfig {
    pub poses: Option<PathBuf>,
    pub topology: Option<PathBuf>,
    pub cameras: Option<PathBuf>,
    pub out: Option<PathBuf>,
    /// Square output size; camera intrinsics are rescaled to it.
    pub size: Option<usize>,
    pub depth_mode: DepthMode,
    pub previews: bool,
    /// Shift every map so the frame's pelvis lands on the image center.
    pub align: bool,
}

impl Default for RenderConfig {
    fn default() -> Self {
        Self {
            poses: None,
            topology: None,
            cameras: None,
            out: None,
            size: None,
            depth_mode: DepthMode::Euclidean,
            previews: true,
            align: false,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AlignConfig {
    pub poses: Option<PathBuf>,
    pub cameras: Option<PathBuf>,
    pub out: Option<PathBuf>,
    /// Defaults to the image center.
    pub target: Option<(f64, f64)>,
    pub reference_pelvis: Option<(f64, f64)>,
    pub reference_view: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InspectConfig {
    pub poses: Option<PathBuf>,
    pub topology: Option<PathBuf>,
    pub cameras: Option<PathBuf>,
    pub frame: usize,
    pub frames: usize,
    pub dim: usize,
    pub max_period: f64,
    pub out: Option<PathBuf>,
}

impl Default for InspectConfig {
    fn default() -> Self {
        Self {
            poses: None,
            topology: None,
            cameras: None,
            frame: 0,
            frames: 0,
            dim: 64,
            max_period: 10_000.0,
            out: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SampleConfig {
    pub frames: usize,
    pub views: usize,
    pub windows: WindowConfig,
    pub steps: usize,
    pub denoiser: ToyKind,
    pub seed: u64,
    pub branch_mix: f64,
    /// Per-cell latent shape (channels, height, width).
    pub latent_shape: (usize, usize, usize),
    pub out: Option<PathBuf>,
    pub metrics: Option<PathBuf>,
}

impl Default for SampleConfig {
    fn default() -> Self {
        Self {
            frames: 24,
            views: 8,
            windows: WindowConfig::default(),
            steps: 50,
            denoiser: ToyKind::Contract,
            seed: 7,
            branch_mix: 0.5,
            latent_shape: (4, 8, 8),
            out: None,
            metrics: None,
        }
    }
}

/// Returns the path or a usage error naming the missing flag.
pub fn required<'a>(value: &'a Option<PathBuf>, flag: &str) -> Result<&'a Path, CliError> {
    value
        .as_deref()
        .ok_or_else(|| CliError::Usage(format!("missing required --{flag} (flag or config file)")))
}
