//! Latent grid over frames × views, plus its on-disk container.
//!
//! Container layout, all little-endian:
//!
//! | bytes | field |
//! |---|---|
//! | 8 | magic `BM4DLAT1` |
//! | 4 | `u32` rank, always 5 |
//! | 40 | five `u64` dims: frames, views, channels, height, width |
//! | 8 | `u64` timestep |
//! | 4·N | `f32` values, row-major over the five dims |

use std::path::Path;

use ndarray::{s, Array5, ArrayView3, Axis};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::export::write_atomic;

pub const LATENT_MAGIC: &[u8; 8] = b"BM4DLAT1";

/// Per-cell latent shape `(channels, height, width)`.
pub type CellShape = (usize, usize, usize);

#[derive(Debug, Clone, PartialEq)]
pub struct LatentGrid {
    data: Array5<f64>,
    timestep: usize,
}

impl LatentGrid {
    /// `data` is indexed `[frame, view, channel, y, x]`.
    pub fn new(data: Array5<f64>, timestep: usize) -> Result<Self> {
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::Value("latent grid holds a non-finite value".into()));
        }
        Ok(Self { data, timestep })
    }

    pub fn zeros(frames: usize, views: usize, cell: CellShape, timestep: usize) -> Self {
        Self {
            data: Array5::zeros((frames, views, cell.0, cell.1, cell.2)),
            timestep,
        }
    }

    /// Standard normal noise from a seeded ChaCha8 stream, filled in
    /// row-major order.
    pub fn gaussian(
        frames: usize,
        views: usize,
        cell: CellShape,
        timestep: usize,
        seed: u64,
    ) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let shape = (frames, views, cell.0, cell.1, cell.2);
        let data = Array5::from_shape_simple_fn(shape, || StandardNormal.sample(&mut rng));
        Self { data, timestep }
    }

    pub fn data(&self) -> &Array5<f64> {
        &self.data
    }

    pub fn into_data(self) -> Array5<f64> {
        self.data
    }

    pub fn timestep(&self) -> usize {
        self.timestep
    }

    pub fn frames(&self) -> usize {
        self.data.shape()[0]
    }

    pub fn views(&self) -> usize {
        self.data.shape()[1]
    }

    pub fn cell_shape(&self) -> CellShape {
        let s = self.data.shape();
        (s[2], s[3], s[4])
    }

    pub fn cell(&self, frame: usize, view: usize) -> ArrayView3<'_, f64> {
        self.data.slice(s![frame, view, .., .., ..])
    }

    /// Copies the cells at `frames × views` into a new sub-grid, in the
    /// given index order.
    pub fn gather(&self, frames: &[usize], views: &[usize]) -> Array5<f64> {
        self.data.select(Axis(0), frames).select(Axis(1), views)
    }
}

fn max_abs_diff(a: ArrayView3<'_, f64>, b: ArrayView3<'_, f64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Largest element-wise jump between temporally or view-adjacent cells,
/// including the last-to-first view pair when views wrap.
pub fn max_seam_discontinuity(grid: &LatentGrid, cyclic_views: bool) -> f64 {
    let (t_n, v_n) = (grid.frames(), grid.views());
    let mut worst: f64 = 0.0;
    for t in 0..t_n {
        for v in 0..v_n {
            if t + 1 < t_n {
                worst = worst.max(max_abs_diff(grid.cell(t, v), grid.cell(t + 1, v)));
            }
            if v + 1 < v_n {
                worst = worst.max(max_abs_diff(grid.cell(t, v), grid.cell(t, v + 1)));
            } else if cyclic_views && v_n > 1 {
                worst = worst.max(max_abs_diff(grid.cell(t, v), grid.cell(t, 0)));
            }
        }
    }
    worst
}

pub fn encode_latent(grid: &LatentGrid) -> Vec<u8> {
    let mut out = Vec::with_capacity(60 + grid.data.len() * 4);
    out.extend_from_slice(LATENT_MAGIC);
    out.extend_from_slice(&5u32.to_le_bytes());
    for &d in grid.data.shape() {
        out.extend_from_slice(&(d as u64).to_le_bytes());
    }
    out.extend_from_slice(&(grid.timestep as u64).to_le_bytes());
    for &v in grid.data.iter() {
        out.extend_from_slice(&(v as f32).to_le_bytes());
    }
    out
}

pub fn decode_latent(bytes: &[u8]) -> Result<LatentGrid> {
    let bad = |m: &str| Error::Parse(format!("latent container: {m}"));
    if bytes.len() < 60 || &bytes[..8] != LATENT_MAGIC {
        return Err(bad("missing header"));
    }
    let u64_at = |o: usize| u64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
    let rank = u32::from_le_bytes(bytes[8..12].try_into().unwrap());
    if rank != 5 {
        return Err(bad(&format!("rank {rank}, expected 5")));
    }
    let dims: Vec<usize> = (0..5).map(|i| u64_at(12 + 8 * i) as usize).collect();
    let timestep = u64_at(52) as usize;
    let count = dims
        .iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .ok_or_else(|| bad("dims overflow"))?;
    let body = &bytes[60..];
    if body.len() != count * 4 {
        return Err(bad(&format!(
            "{} data bytes, expected {}",
            body.len(),
            count * 4
        )));
    }
    let values: Vec<f64> = body
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
        .collect();
    let data = Array5::from_shape_vec((dims[0], dims[1], dims[2], dims[3], dims[4]), values)
        .map_err(|e| bad(&e.to_string()))?;
    LatentGrid::new(data, timestep)
}

pub fn write_latent(path: impl AsRef<Path>, grid: &LatentGrid) -> Result<()> {
    write_atomic(path, &encode_latent(grid))
}

pub fn read_latent(path: impl AsRef<Path>) -> Result<LatentGrid> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_latent(&bytes)
}
