//! Joint set, bone tree and pose-sequence files.
//!
//! The body model is the SMPL kinematic tree truncated to its first 23
//! joints. Positions are world-space meters. The tree, with default bone
//! radii:
//!
//! | edge | parent → child              | radius (m) |
//! |------|-----------------------------|------------|
//! | 0    | pelvis → left_hip           | 0.090      |
//! | 1    | pelvis → right_hip          | 0.090      |
//! | 2    | pelvis → spine1             | 0.090      |
//! | 3    | left_hip → left_knee        | 0.070      |
//! | 4    | right_hip → right_knee      | 0.070      |
//! | 5    | spine1 → spine2             | 0.090      |
//! | 6    | left_knee → left_ankle      | 0.050      |
//! | 7    | right_knee → right_ankle    | 0.050      |
//! | 8    | spine2 → spine3             | 0.090      |
//! | 9    | left_ankle → left_foot      | 0.025      |
//! | 10   | right_ankle → right_foot    | 0.025      |
//! | 11   | spine3 → neck               | 0.050      |
//! | 12   | spine3 → left_collar        | 0.090      |
//! | 13   | spine3 → right_collar       | 0.090      |
//! | 14   | neck → head                 | 0.090      |
//! | 15   | left_collar → left_shoulder | 0.090      |
//! | 16   | right_collar → right_shoulder | 0.090    |
//! | 17   | left_shoulder → left_elbow  | 0.045      |
//! | 18   | right_shoulder → right_elbow | 0.045     |
//! | 19   | left_elbow → left_wrist     | 0.035      |
//! | 20   | right_elbow → right_wrist   | 0.035      |
//! | 21   | left_wrist → left_hand      | 0.025      |
//!
//! Truncating at 23 joints drops `right_hand`, so the right wrist is a leaf.

use std::fs;
use std::path::Path;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const JOINT_COUNT: usize = 23;
pub const BONE_COUNT: usize = JOINT_COUNT - 1;

pub const JOINT_NAMES: [&str; JOINT_COUNT] = [
    "pelvis",
    "left_hip",
    "right_hip",
    "spine1",
    "left_knee",
    "right_knee",
    "spine2",
    "left_ankle",
    "right_ankle",
    "spine3",
    "left_foot",
    "right_foot",
    "neck",
    "left_collar",
    "right_collar",
    "head",
    "left_shoulder",
    "right_shoulder",
    "left_elbow",
    "right_elbow",
    "left_wrist",
    "right_wrist",
    "left_hand",
];

pub const PELVIS: usize = 0;

/// Parent of each joint; `None` for the root.
pub const PARENTS: [Option<usize>; JOINT_COUNT] = [
    None,
    Some(0),
    Some(0),
    Some(0),
    Some(1),
    Some(2),
    Some(3),
    Some(4),
    Some(5),
    Some(6),
    Some(7),
    Some(8),
    Some(9),
    Some(9),
    Some(9),
    Some(12),
    Some(13),
    Some(14),
    Some(16),
    Some(17),
    Some(18),
    Some(19),
    Some(20),
];

const TORSO: f64 = 0.09;
const UPPER_LEG: f64 = 0.07;
const LOWER_LEG: f64 = 0.05;
const UPPER_ARM: f64 = 0.045;
const FOREARM: f64 = 0.035;
const NECK: f64 = 0.05;
const HEAD: f64 = 0.09;
const EXTREMITY: f64 = 0.025;

pub fn joint_index(name: &str) -> Option<usize> {
    JOINT_NAMES.iter().position(|n| *n == name)
}

/// One frame of one subject: the 23 canonical joints in world space.
#[derive(Debug, Clone, PartialEq)]
pub struct JointSet {
    positions: [Vector3<f64>; JOINT_COUNT],
}

impl JointSet {
    pub fn new(positions: &[Vector3<f64>]) -> Result<Self> {
        if positions.len() != JOINT_COUNT {
            return Err(Error::Schema(format!(
                "expected {JOINT_COUNT} joints, got {}",
                positions.len()
            )));
        }
        if let Some((i, _)) = positions
            .iter()
            .enumerate()
            .find(|(_, p)| !p.iter().all(|c| c.is_finite()))
        {
            return Err(Error::Value(format!(
                "joint {} ({}) has a non-finite coordinate",
                i, JOINT_NAMES[i]
            )));
        }
        let mut out = [Vector3::zeros(); JOINT_COUNT];
        out.copy_from_slice(positions);
        Ok(Self { positions: out })
    }

    pub fn positions(&self) -> &[Vector3<f64>; JOINT_COUNT] {
        &self.positions
    }

    pub fn position(&self, joint: usize) -> Vector3<f64> {
        self.positions[joint]
    }

    pub fn pelvis(&self) -> Vector3<f64> {
        self.positions[PELVIS]
    }

    pub fn names(&self) -> &'static [&'static str; JOINT_COUNT] {
        &JOINT_NAMES
    }

    /// Applies `f` to every joint position.
    pub fn map(&self, f: impl Fn(Vector3<f64>) -> Vector3<f64>) -> Result<Self> {
        let moved: Vec<_> = self.positions.iter().map(|p| f(*p)).collect();
        Self::new(&moved)
    }
}

/// Ordered frames of a single subject's motion.
#[derive(Debug, Clone, PartialEq)]
pub struct PoseSequence {
    frames: Vec<JointSet>,
}

impl PoseSequence {
    pub fn new(frames: Vec<JointSet>) -> Result<Self> {
        if frames.is_empty() {
            return Err(Error::Schema("pose sequence has no frames".into()));
        }
        Ok(Self { frames })
    }

    pub fn frames(&self) -> &[JointSet] {
        &self.frames
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let file: PoseFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        if file.units != "m" {
            return Err(Error::Schema(format!(
                "unsupported units {:?}; only \"m\" is accepted",
                file.units
            )));
        }
        if file.joint_names.len() != JOINT_COUNT {
            return Err(Error::Schema(format!(
                "expected {JOINT_COUNT} joint names, got {}",
                file.joint_names.len()
            )));
        }
        for (i, (got, want)) in file.joint_names.iter().zip(JOINT_NAMES).enumerate() {
            if got != want {
                return Err(Error::Schema(format!(
                    "joint {i} is named {got:?}, expected {want:?}"
                )));
            }
        }
        let frames = file
            .frames
            .iter()
            .enumerate()
            .map(|(t, joints)| {
                let pts: Vec<_> = joints.iter().map(|p| Vector3::from(*p)).collect();
                JointSet::new(&pts).map_err(|e| match e {
                    Error::Schema(m) => Error::Schema(format!("frame {t}: {m}")),
                    Error::Value(m) => Error::Value(format!("frame {t}: {m}")),
                    other => other,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(frames)
    }

    pub fn to_json_string(&self) -> String {
        let file = PoseFile {
            units: "m".into(),
            joint_names: JOINT_NAMES.iter().map(|s| s.to_string()).collect(),
            frames: self
                .frames
                .iter()
                .map(|f| f.positions.iter().map(|p| [p.x, p.y, p.z]).collect())
                .collect(),
        };
        serde_json::to_string(&file).expect("pose file serialization is infallible")
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct PoseFile {
    units: String,
    joint_names: Vec<String>,
    frames: Vec<Vec<[f64; 3]>>,
}

pub fn load_pose_sequence(path: impl AsRef<Path>) -> Result<PoseSequence> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    PoseSequence::from_json_str(&text)
}

/// Bone tree over the joint set plus the radius of each bone.
#[derive(Debug, Clone, PartialEq)]
pub struct BoneTopology {
    edges: Vec<(usize, usize)>,
    thickness: Vec<f64>,
}

impl BoneTopology {
    /// Validates that `edges` form a tree rooted at the pelvis covering
    /// all joints, and that every thickness is positive.
    pub fn new(edges: Vec<(usize, usize)>, thickness: Vec<f64>) -> Result<Self> {
        if edges.len() != BONE_COUNT {
            return Err(Error::Schema(format!(
                "expected {BONE_COUNT} edges, got {}",
                edges.len()
            )));
        }
        if thickness.len() != edges.len() {
            return Err(Error::Schema(format!(
                "{} thickness values for {} edges",
                thickness.len(),
                edges.len()
            )));
        }
        if let Some((i, t)) = thickness
            .iter()
            .enumerate()
            .find(|(_, t)| !(t.is_finite() && **t > 0.0))
        {
            return Err(Error::Value(format!("edge {i} has thickness {t}")));
        }
        let mut seen_child = [false; JOINT_COUNT];
        let mut forest = UnionFind::new(JOINT_COUNT);
        for (i, &(m, n)) in edges.iter().enumerate() {
            if m >= JOINT_COUNT || n >= JOINT_COUNT {
                return Err(Error::Schema(format!(
                    "edge {i} ({m}, {n}) is out of range"
                )));
            }
            if m == n {
                return Err(Error::Schema(format!(
                    "edge {i} is a self-edge on joint {m}"
                )));
            }
            if n == PELVIS {
                return Err(Error::Schema(format!("edge {i} has the pelvis as child")));
            }
            if seen_child[n] {
                return Err(Error::Schema(format!("joint {n} has more than one parent")));
            }
            seen_child[n] = true;
            if !forest.union(m, n) {
                return Err(Error::Schema(format!("edge {i} closes a cycle")));
            }
        }
        Ok(Self { edges, thickness })
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn thickness(&self) -> &[f64] {
        &self.thickness
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let file: TopologyFile =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Self::new(
            file.edges.into_iter().map(|[m, n]| (m, n)).collect(),
            file.thickness,
        )
    }

    pub fn to_json_string(&self) -> String {
        let file = TopologyFile {
            edges: self.edges.iter().map(|&(m, n)| [m, n]).collect(),
            thickness: self.thickness.clone(),
        };
        serde_json::to_string(&file).expect("topology serialization is infallible")
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct TopologyFile {
    edges: Vec<[usize; 2]>,
    thickness: Vec<f64>,
}

pub fn load_topology(path: impl AsRef<Path>) -> Result<BoneTopology> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    BoneTopology::from_json_str(&text)
}

fn default_thickness(parent: usize, child: usize) -> f64 {
    let name = |i: usize| JOINT_NAMES[i];
    match (name(parent), name(child)) {
        (_, "left_hand") | (_, "left_foot") | (_, "right_foot") => EXTREMITY,
        (_, "left_knee") | (_, "right_knee") => UPPER_LEG,
        (_, "left_ankle") | (_, "right_ankle") => LOWER_LEG,
        (_, "left_elbow") | (_, "right_elbow") => UPPER_ARM,
        (_, "left_wrist") | (_, "right_wrist") => FOREARM,
        (_, "neck") => NECK,
        (_, "head") => HEAD,
        _ => TORSO,
    }
}

/// The canonical 22-edge tree, edges ordered by child joint index.
pub fn default_topology() -> BoneTopology {
    let edges: Vec<(usize, usize)> = PARENTS
        .iter()
        .enumerate()
        .filter_map(|(child, parent)| parent.map(|p| (p, child)))
        .collect();
    let thickness = edges
        .iter()
        .map(|&(m, n)| default_thickness(m, n))
        .collect();
    BoneTopology::new(edges, thickness).expect("canonical topology is a valid tree")
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns false when `a` and `b` were already connected.
    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra] = rb;
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn origin_pose_json(frames: usize) -> String {
        let frame = vec![[0.0, 0.0, 0.0]; JOINT_COUNT];
        serde_json::json!({
            "units": "m",
            "joint_names": JOINT_NAMES,
            "frames": vec![frame; frames],
        })
        .to_string()
    }

    #[test]
    fn single_degenerate_frame_is_valid() {
        let seq = PoseSequence::from_json_str(&origin_pose_json(1)).unwrap();
        assert_eq!(seq.len(), 1);
        assert_eq!(seq.frames()[0].pelvis(), Vector3::zeros());
    }

    #[test]
    fn empty_sequence_is_schema_error() {
        let err = PoseSequence::from_json_str(&origin_pose_json(0)).unwrap_err();
        assert!(matches!(err, Error::Schema(_)), "{err}");
    }

    #[test]
    fn wrong_joint_count_and_names_rejected() {
        let text = serde_json::json!({
            "units": "m",
            "joint_names": &JOINT_NAMES[..22],
            "frames": [vec![[0.0; 3]; 22]],
        })
        .to_string();
        assert!(matches!(
            PoseSequence::from_json_str(&text),
            Err(Error::Schema(_))
        ));

        let mut names: Vec<String> = JOINT_NAMES.iter().map(|s| s.to_string()).collect();
        names.swap(1, 2);
        let text = serde_json::json!({
            "units": "m",
            "joint_names": names,
            "frames": [vec![[0.0; 3]; JOINT_COUNT]],
        })
        .to_string();
        assert!(matches!(
            PoseSequence::from_json_str(&text),
            Err(Error::Schema(_))
        ));
    }

    #[test]
    fn other_units_rejected() {
        let text = origin_pose_json(1).replace("\"m\"", "\"cm\"");
        assert!(matches!(
            PoseSequence::from_json_str(&text),
            Err(Error::Schema(_))
        ));
    }

    #[test]
    fn malformed_json_is_parse_error() {
        assert!(matches!(
            PoseSequence::from_json_str("{\"units\": \"m\", "),
            Err(Error::Parse(_))
        ));
    }

    #[test]
    fn non_finite_coordinate_is_value_error() {
        let mut pts = vec![Vector3::zeros(); JOINT_COUNT];
        pts[5].y = f64::NAN;
        assert!(matches!(JointSet::new(&pts), Err(Error::Value(_))));
    }

    #[test]
    fn default_topology_shape() {
        let topo = default_topology();
        assert_eq!(topo.len(), BONE_COUNT);
        let wrist = joint_index("left_wrist").unwrap();
        let hand = joint_index("left_hand").unwrap();
        let i = topo
            .edges()
            .iter()
            .position(|&e| e == (wrist, hand))
            .unwrap();
        assert_eq!(topo.thickness()[i], 0.025);

        let mut child_count = [0usize; JOINT_COUNT];
        for &(_, n) in topo.edges() {
            child_count[n] += 1;
        }
        assert_eq!(child_count[PELVIS], 0);
        assert!(child_count[1..].iter().all(|&c| c == 1));
    }

    #[test]
    fn default_topology_is_connected_and_acyclic() {
        let topo = default_topology();
        let mut uf = UnionFind::new(JOINT_COUNT);
        for &(m, n) in topo.edges() {
            assert!(uf.union(m, n), "cycle through ({m}, {n})");
        }
        let root = uf.find(0);
        assert!((0..JOINT_COUNT).all(|j| uf.find(j) == root));
    }

    #[test]
    fn topology_rejects_bad_trees() {
        let topo = default_topology();
        let mut edges = topo.edges().to_vec();
        let th = topo.thickness().to_vec();

        edges[3] = (4, 4);
        assert!(BoneTopology::new(edges.clone(), th.clone()).is_err());

        let mut edges = topo.edges().to_vec();
        edges[21] = (21, 20); // second parent for left_wrist
        assert!(BoneTopology::new(edges, th.clone()).is_err());

        let mut bad_th = th.clone();
        bad_th[0] = 0.0;
        assert!(matches!(
            BoneTopology::new(topo.edges().to_vec(), bad_th),
            Err(Error::Value(_))
        ));

        assert!(BoneTopology::new(topo.edges()[..21].to_vec(), th[..21].to_vec()).is_err());
    }

    #[test]
    fn topology_json_round_trip() {
        let topo = default_topology();
        let back = BoneTopology::from_json_str(&topo.to_json_string()).unwrap();
        assert_eq!(topo, back);
    }

    proptest! {
        #[test]
        fn pose_json_round_trip_is_bit_exact(
            coords in prop::collection::vec(
                prop::collection::vec(-1.0e3f64..1.0e3, JOINT_COUNT * 3),
                1..4,
            )
        ) {
            let frames = coords
                .iter()
                .map(|c| {
                    let pts: Vec<_> = c.chunks(3).map(|p| Vector3::new(p[0], p[1], p[2])).collect();
                    JointSet::new(&pts).unwrap()
                })
                .collect();
            let seq = PoseSequence::new(frames).unwrap();
            let back = PoseSequence::from_json_str(&seq.to_json_string()).unwrap();
            for (a, b) in seq.frames().iter().zip(back.frames()) {
                for (p, q) in a.positions().iter().zip(b.positions()) {
                    for k in 0..3 {
                        prop_assert_eq!(p[k].to_bits(), q[k].to_bits());
                    }
                }
            }
        }
    }
}
