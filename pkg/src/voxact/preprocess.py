"""Geometric normalization and temporal slicing of skeleton sequences.

The 25-joint NTU skeleton is indexed 1-based.  Joint 1 (SpineBase, the middle
of the hip) is the centering origin; joints 13/17 are the left/right hips and
joint 2 the spine mid, which together fix the view-normalizing rotation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import SequenceTooShort
from .skeleton import NUM_JOINTS, SkeletonSequence

HIP_CENTER = 1   # SpineBase
SPINE_MID = 2
HIP_LEFT = 13
HIP_RIGHT = 17

# Parent-child bone edges of the NTU 25-joint skeleton (1-based), one tree:
# spine, head, both arms with hand tips and thumbs, both legs.
BONE_EDGES: tuple[tuple[int, int], ...] = (
    (1, 2), (2, 21), (21, 3), (3, 4),
    (21, 5), (5, 6), (6, 7), (7, 8), (8, 22), (8, 23),
    (21, 9), (9, 10), (10, 11), (11, 12), (12, 24), (12, 25),
    (1, 13), (13, 14), (14, 15), (15, 16),
    (1, 17), (17, 18), (18, 19), (19, 20),
)

DEGENERATE_HIP_DISTANCE = 1e-6  # meters


@dataclass(frozen=True)
class RigidTransform:
    """Proper rigid motion: rotate, then translate."""

    rotation: np.ndarray   # (3, 3), orthonormal, det +1
    translation: np.ndarray  # (3,)

    def __post_init__(self):
        r = np.asarray(self.rotation, dtype=np.float64)
        t = np.asarray(self.translation, dtype=np.float64)
        if r.shape != (3, 3) or t.shape != (3,):
            raise ValueError("rotation must be (3,3), translation (3,)")
        if not np.allclose(r @ r.T, np.eye(3), atol=1e-9):
            raise ValueError("rotation is not orthonormal")
        if not np.isclose(np.linalg.det(r), 1.0, atol=1e-9):
            raise ValueError("rotation determinant must be +1")
        object.__setattr__(self, "rotation", r)
        object.__setattr__(self, "translation", t)

    @classmethod
    def identity(cls) -> "RigidTransform":
        return cls(rotation=np.eye(3), translation=np.zeros(3))

    def apply(self, points: np.ndarray) -> np.ndarray:
        """Transform an (..., 3) array of points."""
        return np.asarray(points, dtype=np.float64) @ self.rotation.T + self.translation

    def inverse(self) -> "RigidTransform":
        rot_inv = self.rotation.T
        return RigidTransform(rotation=rot_inv, translation=-rot_inv @ self.translation)


@dataclass(frozen=True)
class PointCloudSequence:
    """Per-frame point sets produced by bone interpolation."""

    frames: tuple[np.ndarray, ...]  # each (P, 3) float64

    @property
    def num_frames(self) -> int:
        return len(self.frames)

    def all_points(self) -> np.ndarray:
        return np.concatenate(self.frames, axis=0)


def center_on_hip(seq: SkeletonSequence) -> SkeletonSequence:
    """Translate every frame so the hip-center joint sits at the origin."""
    coords = seq.joint_array()
    offsets = coords[:, HIP_CENTER - 1:HIP_CENTER, :]
    return seq.with_frames(coords - offsets)


class ViewNormalized(NamedTuple):
    seq: SkeletonSequence
    transform: RigidTransform
    degenerate: bool


def compute_view_transform(seq: SkeletonSequence) -> tuple[RigidTransform, bool]:
    """Rotation fixed by frame 1: hip axis to +x, spine into the x-y plane.

    The left-hip to right-hip vector becomes the +x axis, and the spine-base
    to spine-mid vector (orthogonalized against the hip axis) becomes +y.
    Returns identity plus a degenerate flag when the hips coincide or the
    spine is parallel to the hip axis.
    """
    first = seq.frames[0].joints
    hip_axis = first[HIP_RIGHT - 1] - first[HIP_LEFT - 1]
    spine = first[SPINE_MID - 1] - first[HIP_CENTER - 1]
    hip_len = np.linalg.norm(hip_axis)
    if hip_len < DEGENERATE_HIP_DISTANCE:
        return RigidTransform.identity(), True
    e1 = hip_axis / hip_len
    spine_orth = spine - np.dot(spine, e1) * e1
    orth_len = np.linalg.norm(spine_orth)
    if orth_len < DEGENERATE_HIP_DISTANCE:
        return RigidTransform.identity(), True
    e2 = spine_orth / orth_len
    e3 = np.cross(e1, e2)
    rotation = np.stack([e1, e2, e3])  # rows: world axes after rotation
    return RigidTransform(rotation=rotation, translation=np.zeros(3)), False


def view_normalize(seq: SkeletonSequence) -> ViewNormalized:
    """Apply one sequence-level rotation, computed from the first frame.

    Expects a hip-centered sequence (the rotation pivots on the origin).
    """
    transform, degenerate = compute_view_transform(seq)
    if degenerate:
        return ViewNormalized(seq=seq, transform=transform, degenerate=True)
    coords = transform.apply(seq.joint_array())
    return ViewNormalized(seq=seq.with_frames(coords), transform=transform, degenerate=False)


def interpolate_bones(seq: SkeletonSequence, k: int = 10) -> PointCloudSequence:
    """Densify each frame with k evenly spaced points along every bone.

    Output order per frame: the 25 joints, then for each bone edge (in
    BONE_EDGES order) the points at t = 1/(k+1) .. k/(k+1).  Frame point
    count is 25 + 24*k.
    """
    if k < 0:
        raise ValueError("k must be >= 0")
    parents = np.array([a - 1 for a, _ in BONE_EDGES])
    children = np.array([b - 1 for _, b in BONE_EDGES])
    ts = (np.arange(1, k + 1) / (k + 1.0)).reshape(1, k, 1)
    frames = []
    for frame in seq.frames:
        pts = frame.joints
        if k == 0:
            frames.append(pts.copy())
            continue
        a = pts[parents][:, None, :]           # (24, 1, 3)
        b = pts[children][:, None, :]
        between = a * (1.0 - ts) + b * ts       # (24, k, 3)
        frames.append(np.concatenate([pts, between.reshape(-1, 3)], axis=0))
    return PointCloudSequence(frames=tuple(frames))


def temporal_subsequence(seq: SkeletonSequence, level: int) -> SkeletonSequence:
    """Slice the sequence for one multi-temporal level.

    Level 0 is the whole sequence; level 1 runs from the start to frame
    floor(F/2); level 2 from floor(F/4) to floor(3F/4); level 3 from
    floor(F/2) to the end.  Frame positions are 1-based inclusive, floors
    clamped to at least 1.  Output indices are re-sequenced 1..F'.
    """
    if level not in (0, 1, 2, 3):
        raise ValueError(f"level must be 0..3, got {level}")
    f = seq.num_frames
    if level == 0:
        return seq.with_frames([fr.joints for fr in seq.frames])
    if f < 4:
        raise SequenceTooShort(f"levels 1..3 need at least 4 frames, got {f}")
    if level == 1:
        lo, hi = 1, max(1, f // 2)
    elif level == 2:
        lo, hi = max(1, f // 4), max(1, (3 * f) // 4)
    else:
        lo, hi = max(1, f // 2), f
    return seq.with_frames([fr.joints for fr in seq.frames[lo - 1:hi]])
