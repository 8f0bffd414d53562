//! Pinhole cameras.
//!
//! Right-handed camera frame: +z looks into the scene, +u (image x) points
//! right and +v (image y) points down. Pixel `(x, y)` samples the image-plane
//! coordinate `(x, y)` exactly, so a principal point of `(288, 288)` on a
//! 576×576 image falls on pixel `(288, 288)`.

use std::fs;
use std::path::Path;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const ORTHO_TOL: f64 = 1e-9;
const UNIT_TOL: f64 = 1e-6;
const MIN_DEPTH: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DepthMode {
    /// Distance from the camera center, `‖p_cam‖`.
    #[default]
    Euclidean,
    /// Camera-space z coordinate.
    Z,
}

impl std::str::FromStr for DepthMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euclidean" => Ok(DepthMode::Euclidean),
            "z" => Ok(DepthMode::Z),
            other => Err(Error::Config(format!(
                "unknown depth mode {other:?}, expected euclidean or z"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Intrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projection {
    pub u: f64,
    pub v: f64,
    pub depth: f64,
}

impl Projection {
    pub fn uv(&self) -> (f64, f64) {
        (self.u, self.v)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CameraRig {
    intrinsics: Intrinsics,
    rotation_wc: Matrix3<f64>,
    translation_wc: Vector3<f64>,
    width: usize,
    height: usize,
}

pub(crate) fn is_rotation(r: &Matrix3<f64>, tol: f64) -> bool {
    r.iter().all(|x| x.is_finite())
        && (r.transpose() * r - Matrix3::identity()).amax() <= tol
        && (r.determinant() - 1.0).abs() <= tol
}

impl CameraRig {
    pub fn new(
        intrinsics: Intrinsics,
        rotation_wc: Matrix3<f64>,
        translation_wc: Vector3<f64>,
        width: usize,
        height: usize,
    ) -> Result<Self> {
        let Intrinsics { fx, fy, cx, cy } = intrinsics;
        if width == 0 || height == 0 {
            return Err(Error::Value(format!("image size {width}x{height}")));
        }
        if !(fx.is_finite() && fy.is_finite() && fx > 0.0 && fy > 0.0) {
            return Err(Error::Value(format!(
                "focal lengths ({fx}, {fy}) must be positive"
            )));
        }
        if !(cx >= 0.0 && cx < width as f64 && cy >= 0.0 && cy < height as f64) {
            return Err(Error::Value(format!(
                "principal point ({cx}, {cy}) outside the {width}x{height} image"
            )));
        }
        if !is_rotation(&rotation_wc, ORTHO_TOL) {
            return Err(Error::Value(
                "camera rotation is not a proper rotation".into(),
            ));
        }
        if !translation_wc.iter().all(|t| t.is_finite()) {
            return Err(Error::Value("camera translation is not finite".into()));
        }
        Ok(Self {
            intrinsics,
            rotation_wc,
            translation_wc,
            width,
            height,
        })
    }

    /// Camera at `eye` looking at `target`, image-down aligned with `down`
    /// as far as possible.
    pub fn look_at(
        eye: Vector3<f64>,
        target: Vector3<f64>,
        down: Vector3<f64>,
        intrinsics: Intrinsics,
        width: usize,
        height: usize,
    ) -> Result<Self> {
        let z = target - eye;
        if z.norm() < MIN_DEPTH {
            return Err(Error::DegenerateInput("eye and target coincide".into()));
        }
        let z = z.normalize();
        let y = down - down.dot(&z) * z;
        if y.norm() < 1e-9 {
            return Err(Error::DegenerateInput(
                "view direction parallel to down".into(),
            ));
        }
        let y = y.normalize();
        let x = y.cross(&z);
        let r = Matrix3::from_rows(&[x.transpose(), y.transpose(), z.transpose()]);
        Self::new(intrinsics, r, -(r * eye), width, height)
    }

    pub fn intrinsics(&self) -> &Intrinsics {
        &self.intrinsics
    }

    pub fn rotation_wc(&self) -> &Matrix3<f64> {
        &self.rotation_wc
    }

    pub fn translation_wc(&self) -> &Vector3<f64> {
        &self.translation_wc
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Camera center in world coordinates.
    pub fn center(&self) -> Vector3<f64> {
        -(self.rotation_wc.transpose() * self.translation_wc)
    }

    /// Same pose with intrinsics rescaled to a `width × height` image.
    pub fn resized(&self, width: usize, height: usize) -> Result<Self> {
        let sx = width as f64 / self.width as f64;
        let sy = height as f64 / self.height as f64;
        let k = &self.intrinsics;
        Self::new(
            Intrinsics {
                fx: k.fx * sx,
                fy: k.fy * sy,
                cx: k.cx * sx,
                cy: k.cy * sy,
            },
            self.rotation_wc,
            self.translation_wc,
            width,
            height,
        )
    }

    pub fn world_to_camera(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.rotation_wc * p + self.translation_wc
    }

    /// Pinhole projection with Euclidean depth.
    pub fn project(&self, p_world: &Vector3<f64>) -> Result<Projection> {
        self.project_with(p_world, DepthMode::Euclidean)
    }

    pub fn project_with(&self, p_world: &Vector3<f64>, mode: DepthMode) -> Result<Projection> {
        let pc = self.world_to_camera(p_world);
        if pc.z.is_nan() || pc.z <= MIN_DEPTH {
            return Err(Error::BehindCamera { z: pc.z });
        }
        let k = &self.intrinsics;
        Ok(Projection {
            u: k.cx + k.fx * pc.x / pc.z,
            v: k.cy + k.fy * pc.y / pc.z,
            depth: match mode {
                DepthMode::Euclidean => pc.norm(),
                DepthMode::Z => pc.z,
            },
        })
    }

    pub fn world_to_camera_normal(&self, n_world: &Vector3<f64>) -> Result<Vector3<f64>> {
        let n = n_world.norm();
        if !n.is_finite() || (n - 1.0).abs() >= UNIT_TOL {
            return Err(Error::DegenerateInput(format!("normal has norm {n}")));
        }
        Ok(self.rotation_wc * n_world)
    }

    /// Unit camera-space direction through image point `(u, v)`.
    pub fn camera_ray(&self, u: f64, v: f64) -> Vector3<f64> {
        let k = &self.intrinsics;
        Vector3::new((u - k.cx) / k.fx, (v - k.cy) / k.fy, 1.0).normalize()
    }

    /// World-space ray `(origin, unit direction)` through image point `(u, v)`.
    pub fn world_ray(&self, u: f64, v: f64) -> (Vector3<f64>, Vector3<f64>) {
        let d = self.rotation_wc.transpose() * self.camera_ray(u, v);
        (self.center(), d)
    }

    fn to_view(&self) -> CameraView {
        let r = &self.rotation_wc;
        CameraView {
            fx: self.intrinsics.fx,
            fy: self.intrinsics.fy,
            cx: self.intrinsics.cx,
            cy: self.intrinsics.cy,
            rotation: std::array::from_fn(|i| r[(i / 3, i % 3)]),
            translation: self.translation_wc.into(),
            width: self.width,
            height: self.height,
        }
    }
}

/// `output[k] = R_k · R_0ᵀ`, so the first view is the identity.
pub fn relative_rotations(rigs: &[CameraRig]) -> Result<Vec<Matrix3<f64>>> {
    let first = rigs.first().ok_or(Error::EmptyInput("camera list"))?;
    let base = first.rotation_wc.transpose();
    Ok(rigs
        .iter()
        .enumerate()
        .map(|(k, rig)| {
            if k == 0 {
                Matrix3::identity()
            } else {
                rig.rotation_wc * base
            }
        })
        .collect())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct CameraView {
    fx: f64,
    fy: f64,
    cx: f64,
    cy: f64,
    #[serde(rename = "R")]
    rotation: [f64; 9],
    #[serde(rename = "t")]
    translation: [f64; 3],
    width: usize,
    height: usize,
}

#[derive(Debug, Serialize, Deserialize)]
struct CameraFile {
    views: Vec<CameraView>,
}

pub fn cameras_from_json_str(text: &str) -> Result<Vec<CameraRig>> {
    let file: CameraFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    if file.views.is_empty() {
        return Err(Error::Schema("camera file has no views".into()));
    }
    file.views
        .into_iter()
        .enumerate()
        .map(|(i, v)| {
            CameraRig::new(
                Intrinsics {
                    fx: v.fx,
                    fy: v.fy,
                    cx: v.cx,
                    cy: v.cy,
                },
                Matrix3::from_row_slice(&v.rotation),
                Vector3::from(v.translation),
                v.width,
                v.height,
            )
            .map_err(|e| Error::Value(format!("view {i}: {e}")))
        })
        .collect()
}

pub fn cameras_to_json_string(rigs: &[CameraRig]) -> String {
    let file = CameraFile {
        views: rigs.iter().map(CameraRig::to_view).collect(),
    };
    serde_json::to_string(&file).expect("camera serialization is infallible")
}

pub fn load_cameras(path: impl AsRef<Path>) -> Result<Vec<CameraRig>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    cameras_from_json_str(&text)
}

/// `n` cameras evenly spaced on a horizontal circle, all looking at
/// `target`, world up = +y.
pub fn circular_rig(
    n: usize,
    radius: f64,
    eye_height: f64,
    target: Vector3<f64>,
    intrinsics: Intrinsics,
    size: usize,
) -> Result<Vec<CameraRig>> {
    (0..n)
        .map(|k| {
            let theta = std::f64::consts::TAU * k as f64 / n as f64;
            let eye = Vector3::new(
                target.x + radius * theta.sin(),
                eye_height,
                target.z + radius * theta.cos(),
            );
            CameraRig::look_at(eye, target, -Vector3::y(), intrinsics, size, size)
        })
        .collect()
}
