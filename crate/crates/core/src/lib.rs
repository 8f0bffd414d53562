//! Bone-map conditioning and windowed latent sampling for multi-view human
//! video generation.
//!
//! The pipeline turns per-frame 3D joints into one ellipsoid per bone,
//! ray-casts those ellipsoids into depth and normal maps for each camera,
//! aligns views on the projected pelvis, encodes camera rotations and frame
//! indices, and drives a pluggable denoiser over overlapping temporal and
//! view windows of a frames × views latent grid.

pub mod alignment;
pub mod camera;
pub mod ellipsoid;
pub mod embeddings;
pub mod error;
pub mod export;
pub mod renderer;
pub mod sampler;
pub mod skeleton;

pub use alignment::{
    apply_alignment, compute_temporal_alignment, compute_view_alignment, AlignmentTransform,
};
pub use camera::{CameraRig, DepthMode, Intrinsics, Projection};
pub use ellipsoid::{align_rotation, build_ellipsoid, build_skeleton_ellipsoids, BoneEllipsoid};
pub use embeddings::{embed_camera, embed_frame_index, CameraEmbedding, EmbeddingConfig};
pub use error::{Error, ErrorClass, Result};
pub use renderer::{render_bone_map, render_sequence, BoneMap, RenderOptions};
pub use sampler::{
    denoise_step, plan_windows, ramp_weights, sample, Conditioning, Denoiser, LatentGrid,
    WindowConfig, WindowPlan,
};
pub use skeleton::{default_topology, BoneTopology, JointSet, PoseSequence};
