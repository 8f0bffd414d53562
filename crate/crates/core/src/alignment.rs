//! Human-centric alignment by integer pixel shifts.
//!
//! Each view is shifted so the projected pelvis lands on a shared target
//! pixel; the reference image is shifted so its pelvis matches the first
//! pose frame. Shifts are whole pixels, so shifted depth and normal values
//! are copied untouched.

use serde::Serialize;

use crate::camera::CameraRig;
use crate::error::{Error, Result};
use crate::renderer::BoneMap;
use crate::skeleton::JointSet;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AlignmentTransform {
    pub dx: i64,
    pub dy: i64,
    /// Pixel the pelvis is moved to.
    pub target: (f64, f64),
}

impl AlignmentTransform {
    pub fn identity() -> Self {
        Self {
            dx: 0,
            dy: 0,
            target: (0.0, 0.0),
        }
    }

    pub fn apply_to_point(&self, (u, v): (f64, f64)) -> (f64, f64) {
        (u + self.dx as f64, v + self.dy as f64)
    }
}

/// Image center in the pixel-center convention used by the camera module.
pub fn image_center(width: usize, height: usize) -> (f64, f64) {
    ((width / 2) as f64, (height / 2) as f64)
}

fn shift_to(
    from: (f64, f64),
    to: (f64, f64),
    width: usize,
    height: usize,
) -> Result<AlignmentTransform> {
    let dx = (to.0 - from.0).round();
    let dy = (to.1 - from.1).round();
    if !(dx.abs() < width as f64 && dy.abs() < height as f64) {
        return Err(Error::OutOfFrame {
            dx: dx as i64,
            dy: dy as i64,
            width,
            height,
        });
    }
    Ok(AlignmentTransform {
        dx: dx as i64,
        dy: dy as i64,
        target: to,
    })
}

/// Shift that brings the pelvis projection of `pose` onto `target`.
pub fn compute_view_alignment(
    pose: &JointSet,
    rig: &CameraRig,
    target: (f64, f64),
) -> Result<AlignmentTransform> {
    let p = rig.project(&pose.pelvis())?;
    shift_to(p.uv(), target, rig.width(), rig.height())
}

/// Shift that moves the reference image's pelvis onto the first pose
/// frame's projected pelvis.
pub fn compute_temporal_alignment(
    reference_pelvis_uv: (f64, f64),
    first_frame_pose: &JointSet,
    rig: &CameraRig,
) -> Result<AlignmentTransform> {
    let p = rig.project(&first_frame_pose.pelvis())?;
    shift_to(reference_pelvis_uv, p.uv(), rig.width(), rig.height())
}

/// Translates a row-major `width × height` grid by `(dx, dy)`; vacated
/// cells take `fill`.
pub fn shift_grid<T: Copy>(
    data: &[T],
    width: usize,
    height: usize,
    dx: i64,
    dy: i64,
    fill: T,
) -> Vec<T> {
    assert_eq!(data.len(), width * height);
    let mut out = vec![fill; data.len()];
    let (w, h) = (width as i64, height as i64);
    if dx.abs() >= w || dy.abs() >= h {
        return out;
    }
    let x_src = (0.max(-dx), w.min(w - dx));
    for y in 0..h {
        let sy = y - dy;
        if sy < 0 || sy >= h {
            continue;
        }
        let (s0, s1) = x_src;
        let src = &data[(sy * w + s0) as usize..(sy * w + s1) as usize];
        let d0 = (y * w + s0 + dx) as usize;
        out[d0..d0 + src.len()].copy_from_slice(src);
    }
    out
}

pub fn apply_alignment(map: &BoneMap, xf: &AlignmentTransform) -> BoneMap {
    let (w, h) = (map.width(), map.height());
    let depth = shift_grid(map.depth(), w, h, xf.dx, xf.dy, 0.0);
    let normal = shift_grid(map.normal(), w, h, xf.dx, xf.dy, [0.0; 3]);
    let coverage = shift_grid(map.coverage(), w, h, xf.dx, xf.dy, false);
    let mut out = BoneMap::background(w, h);
    for (i, covered) in coverage.into_iter().enumerate() {
        if covered {
            out.set(i, depth[i], normal[i]);
        }
    }
    out
}
