//! Brute-force supersampled reference renderer.
//!
//! Intersects each sub-pixel ray with every ellipsoid written as the world
//! quadric `(x - c)ᵀ A (x - c) = 1`, `A = R diag(1/r²) Rᵀ`, with no screen
//! space culling. Used to check the product renderer, never by it.

use nalgebra::{Matrix3, Vector3};
use rayon::prelude::*;

use bonemap4d::camera::{CameraRig, DepthMode};
use bonemap4d::ellipsoid::BoneEllipsoid;

/// Hit of a single oracle ray.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleHit {
    pub depth: f64,
    pub normal_cam: Vector3<f64>,
    pub bone_id: usize,
}

/// Aggregated sub-samples of one pixel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OraclePixel {
    /// Number of sub-samples that hit anything.
    pub hits: u32,
    /// True when every sub-sample hit the same bone.
    pub single_bone: bool,
    /// Mean depth over hitting sub-samples (0 when none hit).
    pub depth: f64,
    /// Normalized mean camera-space normal over hitting sub-samples.
    pub normal_cam: Vector3<f64>,
}

#[derive(Debug, Clone)]
pub struct OracleMap {
    pub width: usize,
    pub height: usize,
    pub factor: usize,
    pub pixels: Vec<OraclePixel>,
}

impl OracleMap {
    pub fn at(&self, x: usize, y: usize) -> &OraclePixel {
        &self.pixels[y * self.width + x]
    }

    /// Pixels fully inside a single bone's silhouette.
    pub fn interior(&self, x: usize, y: usize) -> bool {
        let p = self.at(x, y);
        p.single_bone && p.hits as usize == self.factor * self.factor
    }
}

struct Quadric {
    center: Vector3<f64>,
    form: Matrix3<f64>,
    bound: f64,
    bone_id: usize,
}

impl Quadric {
    fn new(e: &BoneEllipsoid) -> Self {
        let inv_sq = Matrix3::from_diagonal(&e.radii.map(|r| 1.0 / (r * r)));
        Self {
            center: e.center,
            form: e.rotation * inv_sq * e.rotation.transpose(),
            bound: e.radii.max(),
            bone_id: e.bone_id,
        }
    }

    fn intersect(&self, origin: &Vector3<f64>, dir: &Vector3<f64>) -> Option<(f64, Vector3<f64>)> {
        let oc = origin - self.center;
        // Skip rays passing farther than the bounding radius from the center.
        let along = oc.dot(dir);
        if (oc - dir * along).norm_squared() > self.bound * self.bound {
            return None;
        }
        let ad = self.form * dir;
        let a = dir.dot(&ad);
        let b = 2.0 * oc.dot(&ad);
        let c = oc.dot(&(self.form * oc)) - 1.0;
        let disc = b * b - 4.0 * a * c;
        if disc < 0.0 {
            return None;
        }
        let root = disc.sqrt();
        let near = (-b - root) / (2.0 * a);
        let far = (-b + root) / (2.0 * a);
        let t = [near, far].into_iter().find(|t| *t > 1e-6)?;
        let p = origin + dir * t;
        Some((t, (self.form * (p - self.center)).normalize()))
    }
}

/// Nearest hit of a single ray through image point `(u, v)`.
pub fn cast(
    ellipsoids: &[BoneEllipsoid],
    rig: &CameraRig,
    u: f64,
    v: f64,
    mode: DepthMode,
) -> Option<OracleHit> {
    let quadrics: Vec<_> = ellipsoids.iter().map(Quadric::new).collect();
    cast_prepared(&quadrics, rig, u, v, mode)
}

fn cast_prepared(
    quadrics: &[Quadric],
    rig: &CameraRig,
    u: f64,
    v: f64,
    mode: DepthMode,
) -> Option<OracleHit> {
    let k = rig.intrinsics();
    let ray_cam = Vector3::new((u - k.cx) / k.fx, (v - k.cy) / k.fy, 1.0);
    let dir_cam = ray_cam / ray_cam.norm();
    let r_cw = rig.rotation_wc().transpose();
    let origin = -(r_cw * rig.translation_wc());
    let dir = r_cw * dir_cam;
    let mut best: Option<(f64, Vector3<f64>, usize)> = None;
    for q in quadrics {
        if let Some((t, n)) = q.intersect(&origin, &dir) {
            if best.is_none_or(|(bt, _, _)| t < bt) {
                best = Some((t, n, q.bone_id));
            }
        }
    }
    best.map(|(t, n, bone_id)| OracleHit {
        depth: match mode {
            DepthMode::Euclidean => t,
            DepthMode::Z => t * dir_cam.z,
        },
        normal_cam: rig.rotation_wc() * n,
        bone_id,
    })
}

/// Renders with `factor × factor` sub-samples per pixel on a regular grid
/// centered on the pixel center.
pub fn render_supersampled(
    ellipsoids: &[BoneEllipsoid],
    rig: &CameraRig,
    factor: usize,
    mode: DepthMode,
) -> OracleMap {
    assert!(factor > 0, "supersampling factor must be positive");
    let quadrics: Vec<_> = ellipsoids.iter().map(Quadric::new).collect();
    let (w, h) = (rig.width(), rig.height());
    let offsets: Vec<f64> = (0..factor)
        .map(|i| (i as f64 + 0.5) / factor as f64 - 0.5)
        .collect();
    let pixels = (0..w * h)
        .into_par_iter()
        .map(|i| {
            let (x, y) = ((i % w) as f64, (i / w) as f64);
            let mut hits = 0u32;
            let mut depth = 0.0;
            let mut normal = Vector3::zeros();
            let mut bones = None;
            let mut single_bone = true;
            for dy in &offsets {
                for dx in &offsets {
                    if let Some(hit) = cast_prepared(&quadrics, rig, x + dx, y + dy, mode) {
                        hits += 1;
                        depth += hit.depth;
                        normal += hit.normal_cam;
                        match bones {
                            None => bones = Some(hit.bone_id),
                            Some(b) if b != hit.bone_id => single_bone = false,
                            _ => {}
                        }
                    }
                }
            }
            if hits == 0 {
                return OraclePixel {
                    hits,
                    single_bone: false,
                    depth: 0.0,
                    normal_cam: Vector3::zeros(),
                };
            }
            OraclePixel {
                hits,
                single_bone,
                depth: depth / hits as f64,
                normal_cam: normal.normalize(),
            }
        })
        .collect();
    OracleMap {
        width: w,
        height: h,
        factor,
        pixels,
    }
}
