#!/usr/bin/env python3
"""Generate the committed pose and camera fixtures.

Poses come from a small forward-kinematics model over the 23-joint body
tree (SMPL joint order, y-up, meters). Cameras are pinhole rigs on a circle
around the subject, right-handed, looking down +z with v pointing down.

Re-running this script must reproduce the files in fixtures/ bit-for-bit.
"""

import json
import math
import os

import numpy as np

NAMES = [
    "pelvis", "left_hip", "right_hip", "spine1", "left_knee", "right_knee",
    "spine2", "left_ankle", "right_ankle", "spine3", "left_foot", "right_foot",
    "neck", "left_collar", "right_collar", "head", "left_shoulder",
    "right_shoulder", "left_elbow", "right_elbow", "left_wrist", "right_wrist",
    "left_hand",
]
PARENTS = [-1, 0, 0, 0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 9, 9, 12, 13, 14, 16, 17, 18, 19, 20]

# Rest offsets from parent, T-pose.
OFFSETS = np.array([
    [0.0, 0.0, 0.0],
    [0.07, -0.09, 0.0],
    [-0.07, -0.09, 0.0],
    [0.0, 0.11, -0.01],
    [0.04, -0.38, 0.0],
    [-0.04, -0.38, 0.0],
    [0.0, 0.13, 0.01],
    [-0.01, -0.40, -0.04],
    [0.01, -0.40, -0.04],
    [0.0, 0.055, 0.0],
    [0.02, -0.06, 0.12],
    [-0.02, -0.06, 0.12],
    [0.0, 0.21, -0.03],
    [0.08, 0.12, -0.01],
    [-0.08, 0.12, -0.01],
    [0.0, 0.09, 0.05],
    [0.12, 0.03, -0.01],
    [-0.12, 0.03, -0.01],
    [0.26, 0.0, 0.0],
    [-0.26, 0.0, 0.0],
    [0.25, 0.0, 0.0],
    [-0.25, 0.0, 0.0],
    [0.08, 0.0, 0.0],
])
ROOT = np.array([0.0, 0.93, 0.0])


def rx(a):
    c, s = math.cos(a), math.sin(a)
    return np.array([[1, 0, 0], [0, c, -s], [0, s, c]], dtype=float)


def rz(a):
    c, s = math.cos(a), math.sin(a)
    return np.array([[c, -s, 0], [s, c, 0], [0, 0, 1]], dtype=float)


def forward_kinematics(root, local):
    pos = np.zeros((23, 3))
    rot = [None] * 23
    for j in range(23):
        p = PARENTS[j]
        if p < 0:
            rot[j] = local[j]
            pos[j] = root
        else:
            rot[j] = rot[p] @ local[j]
            pos[j] = pos[p] + rot[p] @ OFFSETS[j]
    return pos


def walk_frame(t, n):
    phase = 2.0 * math.pi * t / n
    local = [np.eye(3) for _ in range(23)]
    swing = 0.45 * math.sin(phase)
    local[1] = rx(-swing)
    local[2] = rx(swing)
    local[4] = rx(0.35 * (1.0 - math.cos(phase)) * 0.5 + 0.05)
    local[5] = rx(0.35 * (1.0 + math.cos(phase)) * 0.5 + 0.05)
    local[16] = rz(-1.25) @ rx(0.3 * math.sin(phase))
    local[17] = rz(1.25) @ rx(-0.3 * math.sin(phase))
    local[18] = rx(-0.25)
    local[19] = rx(-0.25)
    root = ROOT + np.array([0.0, 0.02 * math.cos(2.0 * phase), 0.025 * t])
    return forward_kinematics(root, local)


def pose_file(frames):
    return {
        "units": "m",
        "joint_names": NAMES,
        "frames": [[[float(round(c, 9)) for c in j] for j in f] for f in frames],
    }


def look_at(eye, target, down=np.array([0.0, -1.0, 0.0])):
    z = target - eye
    z = z / np.linalg.norm(z)
    y = down - np.dot(down, z) * z
    y = y / np.linalg.norm(y)
    x = np.cross(y, z)
    r = np.stack([x, y, z])
    t = -r @ eye
    return r, t


def circle_rig(n, radius, eye_height, target, fx=600.0, size=576):
    views = []
    for k in range(n):
        theta = 2.0 * math.pi * k / n
        eye = np.array([
            target[0] + radius * math.sin(theta),
            eye_height,
            target[2] + radius * math.cos(theta),
        ])
        r, t = look_at(eye, np.array(target))
        views.append({
            "fx": fx, "fy": fx, "cx": size / 2.0, "cy": size / 2.0,
            "R": [float(v) for v in r.reshape(-1)],
            "t": [float(v) for v in t],
            "width": size, "height": size,
        })
    return {"views": views}


def main():
    out = os.path.join(os.path.dirname(os.path.abspath(__file__)), "..", "fixtures")
    os.makedirs(out, exist_ok=True)

    def dump(name, obj):
        with open(os.path.join(out, name), "w") as f:
            json.dump(obj, f, indent=1)
            f.write("\n")

    tpose = forward_kinematics(ROOT, [np.eye(3) for _ in range(23)])
    dump("tpose.json", pose_file([tpose]))
    dump("walk.json", pose_file([walk_frame(t, 24) for t in range(24)]))
    dump("cameras_8view.json", circle_rig(8, 3.0, 1.2, [0.05, 0.85, 0.3]))
    dump("cameras_6view.json", circle_rig(6, 3.0, 1.2, [0.05, 0.85, 0.3]))


if __name__ == "__main__":
    main()
