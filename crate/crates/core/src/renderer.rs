//! Depth + normal bone maps by analytic ray casting against bone ellipsoids.
//!
//! Every pixel casts one pinhole ray through its center, keeps the nearest
//! hit over all ellipsoids and stores the camera-space depth and the
//! camera-space outward normal. Pixels with no hit are background: depth 0,
//! zero normal, coverage false.

use nalgebra::{Matrix3, Vector3};
use rayon::prelude::*;

use crate::camera::{CameraRig, DepthMode};
use crate::ellipsoid::{build_skeleton_ellipsoids, BoneEllipsoid};
use crate::error::{Error, Result};
use crate::skeleton::{BoneTopology, PoseSequence};

/// Nearest accepted ray parameter.
pub const MIN_HIT_DISTANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct BoneMap {
    width: usize,
    height: usize,
    depth: Vec<f32>,
    normal: Vec<[f32; 3]>,
    coverage: Vec<bool>,
}

impl BoneMap {
    pub fn background(width: usize, height: usize) -> Self {
        let n = width * height;
        Self {
            width,
            height,
            depth: vec![0.0; n],
            normal: vec![[0.0; 3]; n],
            coverage: vec![false; n],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Row-major depth in meters, 0 for background.
    pub fn depth(&self) -> &[f32] {
        &self.depth
    }

    /// Row-major camera-space normals, zero for background.
    pub fn normal(&self) -> &[[f32; 3]] {
        &self.normal
    }

    pub fn coverage(&self) -> &[bool] {
        &self.coverage
    }

    pub fn index(&self, x: usize, y: usize) -> usize {
        y * self.width + x
    }

    pub fn depth_at(&self, x: usize, y: usize) -> f32 {
        self.depth[self.index(x, y)]
    }

    pub fn normal_at(&self, x: usize, y: usize) -> [f32; 3] {
        self.normal[self.index(x, y)]
    }

    pub fn covered(&self, x: usize, y: usize) -> bool {
        self.coverage[self.index(x, y)]
    }

    pub fn covered_count(&self) -> usize {
        self.coverage.iter().filter(|c| **c).count()
    }

    pub fn max_depth(&self) -> f32 {
        self.depth.iter().copied().fold(0.0, f32::max)
    }

    pub(crate) fn set(&mut self, i: usize, depth: f32, normal: [f32; 3]) {
        self.depth[i] = depth;
        self.normal[i] = normal;
        self.coverage[i] = true;
    }

    /// Checks the background/foreground encoding; returns the first
    /// offending pixel index.
    pub fn validate(&self) -> std::result::Result<(), usize> {
        for i in 0..self.depth.len() {
            let n = self.normal[i];
            let ok = if self.coverage[i] {
                let len = (n.iter().map(|c| (*c as f64).powi(2)).sum::<f64>()).sqrt();
                self.depth[i] > 0.0 && (len - 1.0).abs() <= 1e-5
            } else {
                self.depth[i] == 0.0 && n == [0.0; 3]
            };
            if !ok {
                return Err(i);
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hit {
    /// Distance along the (unit) ray.
    pub t: f64,
    /// Outward unit surface normal in world space.
    pub normal: Vector3<f64>,
}

/// Per-ellipsoid transforms into the unit-sphere frame.
#[derive(Debug, Clone)]
struct SphereFrame {
    center: Vector3<f64>,
    /// `diag(1/r) · Rᵀ`: world offset to unit-sphere coordinates.
    to_unit: Matrix3<f64>,
    /// `R · diag(1/r)`: unit-sphere point to world-space gradient direction.
    to_normal: Matrix3<f64>,
}

impl SphereFrame {
    fn new(e: &BoneEllipsoid) -> Self {
        let inv_r = Matrix3::from_diagonal(&e.radii.map(|r| 1.0 / r));
        Self {
            center: e.center,
            to_unit: inv_r * e.rotation.transpose(),
            to_normal: e.rotation * inv_r,
        }
    }

    /// `origin_unit` is the ray origin already mapped into the unit frame.
    fn hit(&self, origin_unit: &Vector3<f64>, dir: &Vector3<f64>) -> Option<Hit> {
        let d = self.to_unit * dir;
        let o = origin_unit;
        let a = d.norm_squared();
        let half_b = o.dot(&d);
        let c = o.norm_squared() - 1.0;
        let disc = half_b * half_b - a * c;
        if disc < 0.0 {
            return None;
        }
        let sq = disc.sqrt();
        let q = -(half_b + sq.copysign(half_b));
        let (t0, t1) = if q == 0.0 {
            (0.0, 0.0)
        } else {
            let (r0, r1) = (q / a, c / q);
            (r0.min(r1), r0.max(r1))
        };
        let t = if t0 > MIN_HIT_DISTANCE {
            t0
        } else if t1 > MIN_HIT_DISTANCE {
            t1
        } else {
            return None;
        };
        let p_unit = o + d * t;
        Some(Hit {
            t,
            normal: (self.to_normal * p_unit).normalize(),
        })
    }
}

/// Nearest intersection of the ray `origin + t·dir`, `t > 1e-6`, with `e`.
pub fn ray_ellipsoid_hit(
    origin: &Vector3<f64>,
    dir: &Vector3<f64>,
    e: &BoneEllipsoid,
) -> Option<Hit> {
    let frame = SphereFrame::new(e);
    let o = frame.to_unit * (origin - frame.center);
    frame.hit(&o, dir)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RenderOptions {
    pub depth_mode: DepthMode,
}

/// A single ray-cast sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PixelSample {
    pub depth: f64,
    pub normal_cam: Vector3<f64>,
    pub bone_id: usize,
}

/// Inclusive pixel bounds of an ellipsoid's projection.
#[derive(Debug, Clone, Copy)]
struct PixelBounds {
    x0: usize,
    x1: usize,
    y0: usize,
    y1: usize,
}

/// Prepared renderer for one ellipsoid set under one camera.
pub struct BoneMapRenderer<'a> {
    rig: &'a CameraRig,
    ellipsoids: &'a [BoneEllipsoid],
    frames: Vec<SphereFrame>,
    origins: Vec<Vector3<f64>>,
    bounds: Vec<Option<PixelBounds>>,
    options: RenderOptions,
}

impl<'a> BoneMapRenderer<'a> {
    pub fn new(
        ellipsoids: &'a [BoneEllipsoid],
        rig: &'a CameraRig,
        options: RenderOptions,
    ) -> Self {
        let eye = rig.center();
        let frames: Vec<_> = ellipsoids.iter().map(SphereFrame::new).collect();
        let origins = frames
            .iter()
            .map(|f| f.to_unit * (eye - f.center))
            .collect();
        let bounds = ellipsoids.iter().map(|e| pixel_bounds(e, rig)).collect();
        Self {
            rig,
            ellipsoids,
            frames,
            origins,
            bounds,
            options,
        }
    }

    fn nearest<I: Iterator<Item = usize>>(
        &self,
        u: f64,
        v: f64,
        candidates: I,
    ) -> Option<PixelSample> {
        let dir_cam = self.rig.camera_ray(u, v);
        let dir = self.rig.rotation_wc().transpose() * dir_cam;
        let mut best: Option<(usize, Hit)> = None;
        for i in candidates {
            if let Some(h) = self.frames[i].hit(&self.origins[i], &dir) {
                if best.as_ref().is_none_or(|(_, b)| h.t < b.t) {
                    best = Some((i, h));
                }
            }
        }
        best.map(|(i, h)| PixelSample {
            depth: match self.options.depth_mode {
                DepthMode::Euclidean => h.t,
                DepthMode::Z => h.t * dir_cam.z,
            },
            normal_cam: self.rig.rotation_wc() * h.normal,
            bone_id: self.ellipsoids[i].bone_id,
        })
    }

    /// Casts the ray through image point `(u, v)` against every ellipsoid.
    pub fn sample(&self, u: f64, v: f64) -> Option<PixelSample> {
        self.nearest(u, v, 0..self.frames.len())
    }

    pub fn render(&self) -> BoneMap {
        let (w, h) = (self.rig.width(), self.rig.height());
        let mut map = BoneMap::background(w, h);
        let rows = map
            .depth
            .par_chunks_mut(w)
            .zip(map.normal.par_chunks_mut(w))
            .zip(map.coverage.par_chunks_mut(w));
        rows.enumerate()
            .for_each(|(y, ((depth, normal), coverage))| {
                let live: Vec<(usize, PixelBounds)> = self
                    .bounds
                    .iter()
                    .enumerate()
                    .filter_map(|(i, b)| b.filter(|b| b.y0 <= y && y <= b.y1).map(|b| (i, b)))
                    .collect();
                if live.is_empty() {
                    return;
                }
                let x_min = live.iter().map(|(_, b)| b.x0).min().unwrap_or(0);
                let x_max = live.iter().map(|(_, b)| b.x1).max().unwrap_or(0);
                for x in x_min..=x_max {
                    let hits = live
                        .iter()
                        .filter(|(_, b)| b.x0 <= x && x <= b.x1)
                        .map(|(i, _)| *i);
                    if let Some(s) = self.nearest(x as f64, y as f64, hits) {
                        depth[x] = s.depth as f32;
                        normal[x] = to_f32(&s.normal_cam.normalize());
                        coverage[x] = true;
                    }
                }
            });
        map
    }
}

fn to_f32(v: &Vector3<f64>) -> [f32; 3] {
    [v.x as f32, v.y as f32, v.z as f32]
}

/// Conservative pixel bounds from the camera-space cube around the
/// ellipsoid's bounding sphere. `None` when the projection misses the image.
fn pixel_bounds(e: &BoneEllipsoid, rig: &CameraRig) -> Option<PixelBounds> {
    let (w, h) = (rig.width(), rig.height());
    let full = PixelBounds {
        x0: 0,
        x1: w - 1,
        y0: 0,
        y1: h - 1,
    };
    let c = rig.world_to_camera(&e.center);
    let r = e.max_radius();
    if c.z - r <= MIN_HIT_DISTANCE {
        // Cube reaches behind the camera plane; fall back to the whole image.
        return Some(full);
    }
    let k = rig.intrinsics();
    let (mut u0, mut u1, mut v0, mut v1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for sx in [-r, r] {
        for sy in [-r, r] {
            for sz in [-r, r] {
                let z = c.z + sz;
                let u = k.cx + k.fx * (c.x + sx) / z;
                let v = k.cy + k.fy * (c.y + sy) / z;
                u0 = u0.min(u);
                u1 = u1.max(u);
                v0 = v0.min(v);
                v1 = v1.max(v);
            }
        }
    }
    let clamp_lo = |a: f64, n: usize| (a.floor() - 1.0).clamp(0.0, n as f64 - 1.0) as usize;
    let clamp_hi = |a: f64, n: usize| (a.ceil() + 1.0).clamp(0.0, n as f64 - 1.0) as usize;
    if u1 < -1.0 || v1 < -1.0 || u0 > w as f64 || v0 > h as f64 {
        return None;
    }
    Some(PixelBounds {
        x0: clamp_lo(u0, w),
        x1: clamp_hi(u1, w),
        y0: clamp_lo(v0, h),
        y1: clamp_hi(v1, h),
    })
}

pub fn render_bone_map(
    ellipsoids: &[BoneEllipsoid],
    rig: &CameraRig,
    options: RenderOptions,
) -> Result<BoneMap> {
    if ellipsoids.is_empty() {
        return Err(Error::EmptyInput("ellipsoid list"));
    }
    Ok(BoneMapRenderer::new(ellipsoids, rig, options).render())
}

/// Renders every (frame, view) cell and hands each map to `sink` as soon as
/// it is ready. Cells are independent and may be produced in any order.
pub fn render_sequence_each<F>(
    poses: &PoseSequence,
    topo: &BoneTopology,
    rigs: &[CameraRig],
    options: RenderOptions,
    sink: F,
) -> Result<()>
where
    F: Fn(usize, usize, BoneMap) -> Result<()> + Sync,
{
    if rigs.is_empty() {
        return Err(Error::EmptyInput("camera list"));
    }
    let ellipsoids = poses
        .frames()
        .iter()
        .map(|pose| build_skeleton_ellipsoids(pose, topo))
        .collect::<Result<Vec<_>>>()?;
    let views = rigs.len();
    (0..ellipsoids.len() * views)
        .into_par_iter()
        .try_for_each(|cell| {
            let (t, v) = (cell / views, cell % views);
            let map = render_bone_map(&ellipsoids[t], &rigs[v], options)?;
            sink(t, v, map)
        })
}

/// `grid[t][v]` is the bone map of frame `t` seen from view `v`.
pub fn render_sequence(
    poses: &PoseSequence,
    topo: &BoneTopology,
    rigs: &[CameraRig],
    options: RenderOptions,
) -> Result<Vec<Vec<BoneMap>>> {
    let cells = std::sync::Mutex::new(Vec::with_capacity(poses.len() * rigs.len()));
    render_sequence_each(poses, topo, rigs, options, |t, v, map| {
        cells
            .lock()
            .expect("render sink poisoned")
            .push((t, v, map));
        Ok(())
    })?;
    let mut cells = cells.into_inner().expect("render sink poisoned");
    cells.sort_by_key(|(t, v, _)| (*t, *v));
    let mut grid: Vec<Vec<BoneMap>> = (0..poses.len()).map(|_| Vec::new()).collect();
    for (t, _, map) in cells {
        grid[t].push(map);
    }
    Ok(grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::camera::Intrinsics;
    use approx::assert_abs_diff_eq;

    fn sphere(center: Vector3<f64>, r: f64) -> BoneEllipsoid {
        BoneEllipsoid {
            bone_id: 0,
            center,
            rotation: Matrix3::identity(),
            radii: Vector3::repeat(r),
        }
    }

    fn axis_rig(size: usize) -> CameraRig {
        let c = (size / 2) as f64;
        CameraRig::new(
            Intrinsics {
                fx: 100.0,
                fy: 100.0,
                cx: c,
                cy: c,
            },
            Matrix3::identity(),
            Vector3::zeros(),
            size,
            size,
        )
        .unwrap()
    }

    #[test]
    fn sphere_frontal_hit_and_miss() {
        let s = sphere(Vector3::zeros(), 1.0);
        let h = ray_ellipsoid_hit(&Vector3::new(0.0, 0.0, -5.0), &Vector3::z(), &s).unwrap();
        assert_abs_diff_eq!(h.t, 4.0, epsilon = 1e-12);
        assert_abs_diff_eq!(h.normal, -Vector3::z(), epsilon = 1e-12);
        assert!(ray_ellipsoid_hit(&Vector3::new(0.0, 2.0, -5.0), &Vector3::z(), &s).is_none());
    }

    #[test]
    fn elongated_ellipsoid_hit() {
        let e = BoneEllipsoid {
            radii: Vector3::new(0.5, 0.5, 2.0),
            ..sphere(Vector3::zeros(), 1.0)
        };
        // Front surface at z = -2, so t = 3.
        let h = ray_ellipsoid_hit(&Vector3::new(0.0, 0.0, -5.0), &Vector3::z(), &e).unwrap();
        assert_abs_diff_eq!(h.t, 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(h.normal, -Vector3::z(), epsilon = 1e-12);
    }

    #[test]
    fn origin_inside_reports_exit() {
        let s = sphere(Vector3::zeros(), 1.0);
        let h = ray_ellipsoid_hit(&Vector3::zeros(), &Vector3::x(), &s).unwrap();
        assert_abs_diff_eq!(h.t, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(h.normal, Vector3::x(), epsilon = 1e-12);
    }

    #[test]
    fn behind_origin_is_miss() {
        let s = sphere(Vector3::new(0.0, 0.0, -3.0), 1.0);
        assert!(ray_ellipsoid_hit(&Vector3::zeros(), &Vector3::z(), &s).is_none());
    }

    #[test]
    fn on_axis_sphere_center_pixel() {
        let rig = axis_rig(64);
        let map = render_bone_map(
            &[sphere(Vector3::new(0.0, 0.0, 2.0), 0.5)],
            &rig,
            RenderOptions::default(),
        )
        .unwrap();
        assert_eq!(map.depth_at(32, 32), 1.5);
        assert_eq!(map.normal_at(32, 32), [0.0, 0.0, -1.0]);
        assert!(map.validate().is_ok());
        assert!(!map.covered(0, 0));
    }

    #[test]
    fn nearer_sphere_occludes() {
        let rig = axis_rig(64);
        let near = sphere(Vector3::new(0.0, 0.0, 2.0), 0.5);
        let far = BoneEllipsoid {
            bone_id: 1,
            ..sphere(Vector3::new(0.0, 0.0, 3.0), 0.9)
        };
        for order in [vec![near.clone(), far.clone()], vec![far, near]] {
            let map = render_bone_map(&order, &rig, RenderOptions::default()).unwrap();
            assert_eq!(map.depth_at(32, 32), 1.5);
        }
    }

    #[test]
    fn z_depth_mode() {
        let rig = axis_rig(64);
        let e = [sphere(Vector3::new(0.3, 0.0, 2.0), 0.5)];
        let euclid = BoneMapRenderer::new(&e, &rig, RenderOptions::default());
        let z = BoneMapRenderer::new(
            &e,
            &rig,
            RenderOptions {
                depth_mode: DepthMode::Z,
            },
        );
        let (u, v) = (32.0 + 100.0 * 0.15, 32.0);
        let a = euclid.sample(u, v).unwrap();
        let b = z.sample(u, v).unwrap();
        let dir = rig.camera_ray(u, v);
        assert_abs_diff_eq!(b.depth, a.depth * dir.z, epsilon = 1e-12);
    }

    #[test]
    fn culled_render_matches_unculled_samples() {
        let k = Intrinsics {
            fx: 80.0,
            fy: 80.0,
            cx: 24.0,
            cy: 24.0,
        };
        let rig = CameraRig::look_at(
            Vector3::new(0.4, 0.3, -2.0),
            Vector3::zeros(),
            -Vector3::y(),
            k,
            48,
            48,
        )
        .unwrap();
        let es: Vec<_> = (0..6)
            .map(|i| {
                let a = i as f64;
                crate::ellipsoid::build_ellipsoid(
                    &Vector3::new(a.sin() * 0.5, a.cos() * 0.4, 0.1 * a),
                    &Vector3::new((a + 1.3).sin() * 0.5, 0.2, (a * 0.7).cos() * 0.3),
                    0.08,
                )
                .map(|e| BoneEllipsoid { bone_id: i, ..e })
                .unwrap()
            })
            .collect();
        let r = BoneMapRenderer::new(&es, &rig, RenderOptions::default());
        let map = r.render();
        assert!(map.covered_count() > 50);
        for y in 0..48 {
            for x in 0..48 {
                match r.sample(x as f64, y as f64) {
                    Some(s) => {
                        assert!(map.covered(x, y));
                        assert_eq!(map.depth_at(x, y), s.depth as f32);
                    }
                    None => assert!(!map.covered(x, y)),
                }
            }
        }
    }

    #[test]
    fn empty_ellipsoid_list_rejected() {
        let rig = axis_rig(8);
        assert!(matches!(
            render_bone_map(&[], &rig, RenderOptions::default()),
            Err(Error::EmptyInput(_))
        ));
    }
}
