use ndarray::Array5;

use crate::camera::CameraRig;
use crate::embeddings::{embed_cameras, embed_frame_index, EmbeddingConfig, EmbeddingProjection};
use crate::error::Result;
use crate::renderer::BoneMap;

use super::plan::Branch;

/// Where a sub-grid handed to a denoiser came from.
#[derive(Debug, Clone, Copy)]
pub struct SegmentContext<'a> {
    pub branch: Branch,
    /// Segment index within its branch.
    pub index: usize,
    /// Grid frame index of each sub-grid frame.
    pub frames: &'a [usize],
    /// Grid view index of each sub-grid view.
    pub views: &'a [usize],
    pub timestep: usize,
}

/// Everything a denoiser may condition on, indexed by grid position.
#[derive(Debug, Clone, Default)]
pub struct Conditioning {
    /// `bone_maps[frame][view]`, when rendered.
    pub bone_maps: Option<Vec<Vec<BoneMap>>>,
    /// One embedding per view, relative to view 0.
    pub camera_embeddings: Vec<Vec<f64>>,
    /// One embedding per frame.
    pub frame_embeddings: Vec<Vec<f64>>,
    /// Opaque descriptor of the reference image.
    pub reference: Option<Vec<f64>>,
}

impl Conditioning {
    /// Camera and frame embeddings for a rig and sequence length, passed
    /// through `projection`.
    pub fn from_embeddings(
        rigs: &[CameraRig],
        frames: usize,
        cfg: &EmbeddingConfig,
        projection: &dyn EmbeddingProjection,
    ) -> Result<Self> {
        cfg.validate()?;
        let camera_embeddings = embed_cameras(rigs, cfg)?
            .iter()
            .map(|e| projection.project(e.values()))
            .collect();
        let frame_embeddings = (0..frames as u64)
            .map(|t| projection.project(&embed_frame_index(t, cfg)))
            .collect();
        Ok(Self {
            camera_embeddings,
            frame_embeddings,
            ..Self::default()
        })
    }

    pub fn bone_map(&self, frame: usize, view: usize) -> Option<&BoneMap> {
        self.bone_maps.as_ref()?.get(frame)?.get(view)
    }

    pub fn camera_embedding(&self, view: usize) -> Option<&[f64]> {
        self.camera_embeddings.get(view).map(Vec::as_slice)
    }

    pub fn frame_embedding(&self, frame: usize) -> Option<&[f64]> {
        self.frame_embeddings.get(frame).map(Vec::as_slice)
    }
}

/// Seam to the trained network. `latents` is indexed
/// `[frame, view, channel, y, x]` over the segment's cells; the result must
/// have the same shape.
pub trait Denoiser: Sync {
    fn denoise(
        &self,
        latents: Array5<f64>,
        ctx: &SegmentContext<'_>,
        cond: &Conditioning,
    ) -> Result<Array5<f64>>;

    /// Whether segments may be denoised in parallel. Implementations that
    /// are not safe to call concurrently return false.
    fn concurrent(&self) -> bool {
        true
    }
}
