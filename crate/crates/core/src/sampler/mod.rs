//! Windowed spatio-temporal sampling over a frames × views latent grid.
//!
//! Each step denoises the current grid twice from the same snapshot: once
//! split into temporal segments and once into view segments. Each branch
//! fuses its segment outputs with the plan's ramp weights, and the two
//! fused grids are blended by `branch_mix`. Segment outputs are collected in
//! segment order and summed sequentially, so results do not depend on how
//! many threads ran the denoiser.

mod denoiser;
mod grid;
mod plan;
pub mod toy;

pub use denoiser::{Conditioning, Denoiser, SegmentContext};
pub use grid::{
    decode_latent, encode_latent, max_seam_discontinuity, read_latent, write_latent, CellShape,
    LatentGrid, LATENT_MAGIC,
};
pub use plan::{
    plan_windows, ramp_weights, ramp_weights_with, tile_axis, AxisWindow, Branch, BranchPlan,
    RampShape, Segment, WindowConfig, WindowPlan,
};

use ndarray::{s, Array5};
use rayon::prelude::*;

use crate::error::{Error, Result};

fn run_branch(
    grid: &LatentGrid,
    plan: &WindowPlan,
    branch: Branch,
    den: &dyn Denoiser,
    cond: &Conditioning,
) -> Result<Array5<f64>> {
    let segments: Vec<Segment<'_>> = plan.branch(branch).segments().collect();
    let denoise_one = |seg: &Segment<'_>| -> Result<Array5<f64>> {
        let sub = grid.gather(&seg.frames.indices, &seg.views.indices);
        let shape = sub.shape().to_vec();
        let ctx = SegmentContext {
            branch,
            index: seg.index,
            frames: &seg.frames.indices,
            views: &seg.views.indices,
            timestep: grid.timestep(),
        };
        let out = den.denoise(sub, &ctx, cond)?;
        if out.shape() != shape.as_slice() {
            return Err(Error::Shape(format!(
                "denoiser returned {:?} for a {:?} segment",
                out.shape(),
                shape
            )));
        }
        Ok(out)
    };
    let outputs: Vec<Array5<f64>> = if den.concurrent() {
        segments
            .par_iter()
            .map(denoise_one)
            .collect::<Result<_>>()?
    } else {
        segments.iter().map(denoise_one).collect::<Result<_>>()?
    };

    let mut acc = Array5::<f64>::zeros(grid.data().raw_dim());
    for (seg, out) in segments.iter().zip(&outputs) {
        for (i, &f) in seg.frames.indices.iter().enumerate() {
            for (j, &v) in seg.views.indices.iter().enumerate() {
                acc.slice_mut(s![f, v, .., .., ..])
                    .scaled_add(seg.weight(i, j), &out.slice(s![i, j, .., .., ..]));
            }
        }
    }
    Ok(acc)
}

/// One sampling step: both branches from the same input, blended
/// `branch_mix · temporal + (1 − branch_mix) · view`.
pub fn denoise_step(
    grid: &LatentGrid,
    plan: &WindowPlan,
    den: &dyn Denoiser,
    cond: &Conditioning,
    branch_mix: f64,
) -> Result<LatentGrid> {
    if grid.timestep() == 0 {
        return Err(Error::Config("grid is already at timestep 0".into()));
    }
    if !(0.0..=1.0).contains(&branch_mix) {
        return Err(Error::Config(format!(
            "branch_mix {branch_mix} outside [0, 1]"
        )));
    }
    if (grid.frames(), grid.views()) != (plan.frames, plan.views) {
        return Err(Error::Shape(format!(
            "plan is for {}x{} cells, grid has {}x{}",
            plan.frames,
            plan.views,
            grid.frames(),
            grid.views()
        )));
    }
    let temporal = run_branch(grid, plan, Branch::Temporal, den, cond)?;
    let view = run_branch(grid, plan, Branch::View, den, cond)?;
    let mut data = temporal * branch_mix;
    data.scaled_add(1.0 - branch_mix, &view);
    LatentGrid::new(data, grid.timestep() - 1)
        .map_err(|_| Error::DegenerateInput("denoiser produced a non-finite latent".into()))
}

/// Runs `steps` denoising steps from `initial`, which must be at timestep
/// `steps`.
pub fn sample(
    initial: &LatentGrid,
    steps: usize,
    plan: &WindowPlan,
    den: &dyn Denoiser,
    cond: &Conditioning,
    branch_mix: f64,
) -> Result<LatentGrid> {
    sample_observed(initial, steps, plan, den, cond, branch_mix, |_| {})
}

/// [`sample`] that hands every intermediate grid to `observer`.
pub fn sample_observed(
    initial: &LatentGrid,
    steps: usize,
    plan: &WindowPlan,
    den: &dyn Denoiser,
    cond: &Conditioning,
    branch_mix: f64,
    mut observer: impl FnMut(&LatentGrid),
) -> Result<LatentGrid> {
    if steps == 0 {
        return Err(Error::Config("steps must be at least 1".into()));
    }
    if initial.timestep() != steps {
        return Err(Error::Config(format!(
            "initial grid is at timestep {}, expected {steps}",
            initial.timestep()
        )));
    }
    let mut grid = initial.clone();
    for _ in 0..steps {
        grid = denoise_step(&grid, plan, den, cond, branch_mix)?;
        observer(&grid);
    }
    Ok(grid)
}
