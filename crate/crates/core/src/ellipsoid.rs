//! Volumetric bone proxies: one ellipsoid per bone, major axis along the bone.

use nalgebra::{Matrix3, Vector3};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::skeleton::{BoneTopology, JointSet};

const UNIT_TOL: f64 = 1e-6;
const MIN_BONE_LENGTH: f64 = 1e-6;
/// Below this value of `1 + u·v` the vectors are treated as antiparallel.
const ANTIPARALLEL_EPS: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct BoneEllipsoid {
    pub bone_id: usize,
    pub center: Vector3<f64>,
    /// Local-to-world rotation; column 2 is the bone direction.
    pub rotation: Matrix3<f64>,
    /// Semi-axes `(r_x, r_y, r_z)` in the local frame, `r_x == r_y`.
    pub radii: Vector3<f64>,
}

impl BoneEllipsoid {
    pub fn axis(&self) -> Vector3<f64> {
        self.rotation.column(2).into_owned()
    }

    pub fn max_radius(&self) -> f64 {
        self.radii.max()
    }
}

/// JSON form used by `inspect ellipsoids`.
#[derive(Debug, Serialize)]
pub struct EllipsoidRecord {
    pub bone_id: usize,
    pub parent: usize,
    pub child: usize,
    pub center: [f64; 3],
    /// Row-major.
    pub rotation: [f64; 9],
    pub radii: [f64; 3],
}

impl EllipsoidRecord {
    pub fn new(e: &BoneEllipsoid, topo: &BoneTopology) -> Self {
        let (parent, child) = topo.edges()[e.bone_id];
        let r = &e.rotation;
        Self {
            bone_id: e.bone_id,
            parent,
            child,
            center: e.center.into(),
            rotation: [
                r[(0, 0)],
                r[(0, 1)],
                r[(0, 2)],
                r[(1, 0)],
                r[(1, 1)],
                r[(1, 2)],
                r[(2, 0)],
                r[(2, 1)],
                r[(2, 2)],
            ],
            radii: e.radii.into(),
        }
    }
}

fn check_unit(v: &Vector3<f64>, what: &str) -> Result<()> {
    let n = v.norm();
    if !n.is_finite() || (n - 1.0).abs() >= UNIT_TOL {
        return Err(Error::DegenerateInput(format!(
            "{what} has norm {n}, expected 1"
        )));
    }
    Ok(())
}

fn half_turn(axis: &Vector3<f64>) -> Matrix3<f64> {
    2.0 * axis * axis.transpose() - Matrix3::identity()
}

/// Rodrigues rotation taking unit `u` to unit `v` about `u × v`.
fn rodrigues(v: &Vector3<f64>, u: &Vector3<f64>) -> Matrix3<f64> {
    let k = u.cross(v);
    let c = u.dot(v);
    let kx = k.cross_matrix();
    // (1 - cos) / sin² = 1 / (1 + cos)
    Matrix3::identity() + kx + kx * kx / (1.0 + c)
}

/// Rotation matrix `R` with `R·u = v`.
///
/// Uses the Rodrigues shortest arc. When `u` and `v` are antiparallel the
/// arc is undefined; the result is then a half turn about the world x-axis
/// (projected perpendicular to `u`), or about the y-axis when
/// `|v·e_x| > 0.99`.
pub fn align_rotation(v: &Vector3<f64>, u: &Vector3<f64>) -> Result<Matrix3<f64>> {
    check_unit(v, "target vector")?;
    check_unit(u, "source vector")?;
    let (v, u) = (v.normalize(), u.normalize());
    if 1.0 + u.dot(&v) >= ANTIPARALLEL_EPS {
        return Ok(rodrigues(&v, &u));
    }
    let pick = if v.x.abs() > 0.99 {
        Vector3::y()
    } else {
        Vector3::x()
    };
    let axis = (pick - pick.dot(&u) * u).normalize();
    let flip = half_turn(&axis);
    // flip·u = -u exactly up to rounding; close the remaining tiny arc.
    let flipped = flip * u;
    Ok(rodrigues(&v, &flipped) * flip)
}

pub fn build_ellipsoid(
    j_m: &Vector3<f64>,
    j_n: &Vector3<f64>,
    thickness: f64,
) -> Result<BoneEllipsoid> {
    if !(thickness.is_finite() && thickness > 0.0) {
        return Err(Error::DegenerateInput(format!(
            "bone thickness {thickness}"
        )));
    }
    let d = j_n - j_m;
    let length = d.norm();
    if length.is_nan() || length <= MIN_BONE_LENGTH {
        return Err(Error::DegenerateBone { edge: None });
    }
    let rotation = align_rotation(&(d / length), &Vector3::z())?;
    Ok(BoneEllipsoid {
        bone_id: 0,
        center: (j_m + j_n) * 0.5,
        rotation,
        radii: Vector3::new(thickness, thickness, 0.5 * length),
    })
}

/// One ellipsoid per topology edge, in edge order.
pub fn build_skeleton_ellipsoids(
    pose: &JointSet,
    topo: &BoneTopology,
) -> Result<Vec<BoneEllipsoid>> {
    topo.edges()
        .iter()
        .zip(topo.thickness())
        .enumerate()
        .map(|(i, (&(m, n), &th))| {
            build_ellipsoid(&pose.position(m), &pose.position(n), th)
                .map(|e| BoneEllipsoid { bone_id: i, ..e })
                .map_err(|err| match err {
                    Error::DegenerateBone { .. } => Error::DegenerateBone { edge: Some(i) },
                    other => other,
                })
        })
        .collect()
}
