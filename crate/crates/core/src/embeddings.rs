//! Sinusoidal encodings of relative camera rotations and frame indices.
//!
//! For a scalar `x` and width `dim`, entry `2k` is `sin(x / P^(2k/dim))` and
//! entry `2k + 1` is `cos(x / P^(2k/dim))`, with `P = max_period`. Cameras
//! are encoded entry by entry over the row-major 3×3 relative rotation and
//! the nine blocks concatenated.

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use crate::camera::{is_rotation, relative_rotations, CameraRig};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingConfig {
    pub dim: usize,
    pub max_period: f64,
}

impl Default for EmbeddingConfig {
    fn default() -> Self {
        Self {
            dim: 64,
            max_period: 10_000.0,
        }
    }
}

impl EmbeddingConfig {
    pub fn new(dim: usize, max_period: f64) -> Result<Self> {
        let cfg = Self { dim, max_period };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 || !self.dim.is_multiple_of(2) {
            return Err(Error::Config(format!(
                "embedding dim must be even and positive, got {}",
                self.dim
            )));
        }
        if !(self.max_period.is_finite() && self.max_period > 0.0) {
            return Err(Error::Config(format!(
                "max_period must be positive, got {}",
                self.max_period
            )));
        }
        Ok(())
    }

    /// Angular frequency of pair `k`.
    pub fn frequency(&self, k: usize) -> f64 {
        self.max_period.powf(-((2 * k) as f64) / self.dim as f64)
    }
}

pub fn sinusoidal(x: f64, cfg: &EmbeddingConfig) -> Vec<f64> {
    let mut out = Vec::with_capacity(cfg.dim);
    push_sinusoidal(&mut out, x, cfg);
    out
}

fn push_sinusoidal(out: &mut Vec<f64>, x: f64, cfg: &EmbeddingConfig) {
    for k in 0..cfg.dim / 2 {
        let (s, c) = (x * cfg.frequency(k)).sin_cos();
        out.push(s);
        out.push(c);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct CameraEmbedding(pub Vec<f64>);

impl CameraEmbedding {
    pub fn values(&self) -> &[f64] {
        &self.0
    }
}

const ORTHO_TOL: f64 = 1e-6;

pub fn embed_camera(relative: &Matrix3<f64>, cfg: &EmbeddingConfig) -> Result<CameraEmbedding> {
    cfg.validate()?;
    if !is_rotation(relative, ORTHO_TOL) {
        return Err(Error::DegenerateInput(
            "relative camera rotation is not orthonormal".into(),
        ));
    }
    let mut out = Vec::with_capacity(9 * cfg.dim);
    for row in 0..3 {
        for col in 0..3 {
            push_sinusoidal(&mut out, relative[(row, col)], cfg);
        }
    }
    Ok(CameraEmbedding(out))
}

pub fn embed_frame_index(t: u64, cfg: &EmbeddingConfig) -> Vec<f64> {
    sinusoidal(t as f64, cfg)
}

/// Embeddings of every rig relative to the first.
pub fn embed_cameras(rigs: &[CameraRig], cfg: &EmbeddingConfig) -> Result<Vec<CameraEmbedding>> {
    relative_rotations(rigs)?
        .iter()
        .map(|r| embed_camera(r, cfg))
        .collect()
}

/// Post-processing applied to concatenated embeddings before they reach the
/// denoiser. A trained network would use a learned linear layer here.
pub trait EmbeddingProjection: Send + Sync {
    fn project(&self, embedding: &[f64]) -> Vec<f64>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityProjection;

impl EmbeddingProjection for IdentityProjection {
    fn project(&self, embedding: &[f64]) -> Vec<f64> {
        embedding.to_vec()
    }
}
