"""Synthetic 25-joint skeleton motions for tests and demos.

Each generator builds a deterministic joint trajectory from a neutral
standing pose, with per-seed body variation (overall scale, motion
amplitude, limb proportions) drawn from one seeded stream and optional
per-frame Gaussian jitter drawn from a second, motion-specific stream.
Jitter is added after the trajectory is built, so at noise_std = 0 the
stand-up motion is the exact frame reversal of the sit-down motion for
the same seed: identical body, identical poses, opposite order.

Joint numbering follows the 25-joint depth-camera convention (1 spine
base, 2 spine mid, 21 spine shoulder, 3 neck, 4 head, 5-8 left arm,
9-12 right arm, 13-16 left leg, 17-20 right leg, 22/23 left hand
tip/thumb, 24/25 right hand tip/thumb). Axes: x right, y up, z forward.
"""

from __future__ import annotations

import enum
import math
from dataclasses import replace

import numpy as np

from .errors import InvalidParams
from .skeleton import NUM_JOINTS, SkeletonSequence, frames_from_array


class MotionKind(enum.Enum):
    RAISE_ARM = 0
    WAVE_HAND = 1
    SIT_DOWN = 2
    STAND_UP = 3
    ARM_CIRCLE = 4
    BOX = 5


def parse_kind(name: str) -> MotionKind:
    try:
        return MotionKind[name.strip().upper().replace("-", "_")]
    except KeyError:
        raise InvalidParams(
            f"unknown motion {name!r}; choose from "
            f"{[k.name.lower() for k in MotionKind]}"
        ) from None


# Neutral standing pose, spine base at the origin, units in meters.
_NEUTRAL = np.array([
    [0.000, 0.000, 0.000],   # 1  spine base
    [0.000, 0.250, 0.000],   # 2  spine mid
    [0.000, 0.550, 0.000],   # 3  neck
    [0.000, 0.700, 0.000],   # 4  head
    [-0.200, 0.450, 0.000],  # 5  left shoulder
    [-0.250, 0.200, 0.000],  # 6  left elbow
    [-0.270, -0.050, 0.000], # 7  left wrist
    [-0.280, -0.120, 0.000], # 8  left hand
    [0.200, 0.450, 0.000],   # 9  right shoulder
    [0.250, 0.200, 0.000],   # 10 right elbow
    [0.270, -0.050, 0.000],  # 11 right wrist
    [0.280, -0.120, 0.000],  # 12 right hand
    [-0.090, -0.050, 0.000], # 13 left hip
    [-0.100, -0.450, 0.000], # 14 left knee
    [-0.110, -0.850, 0.000], # 15 left ankle
    [-0.110, -0.900, 0.120], # 16 left foot
    [0.090, -0.050, 0.000],  # 17 right hip
    [0.100, -0.450, 0.000],  # 18 right knee
    [0.110, -0.850, 0.000],  # 19 right ankle
    [0.110, -0.900, 0.120],  # 20 right foot
    [0.000, 0.450, 0.000],   # 21 spine shoulder
    [-0.285, -0.180, 0.000], # 22 left hand tip
    [-0.250, -0.140, 0.030], # 23 left thumb
    [0.285, -0.180, 0.000],  # 24 right hand tip
    [0.250, -0.140, 0.030],  # 25 right thumb
])

# 0-based row groups used by the motion builders.
_RIGHT_ARM = [9, 10, 11, 23, 24]     # elbow, wrist, hand, tip, thumb
_LEFT_ARM = [5, 6, 7, 21, 22]
_RIGHT_SHOULDER = 8
_LEFT_SHOULDER = 4
_LEFT_LEG = [13, 14, 15]             # knee, ankle, foot
_RIGHT_LEG = [17, 18, 19]
_TORSO_AND_ARMS = [0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 20, 21, 22, 23, 24]
_HIPS = [12, 16]
_KNEES = [13, 17]


def _ease(t: float) -> float:
    return 0.5 * (1.0 - math.cos(math.pi * t))


def _body_params(seed: int) -> dict:
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    return {
        "scale": rng.uniform(0.9, 1.1),
        "amplitude": rng.uniform(0.8, 1.2),
        "arm_f": rng.uniform(0.9, 1.1),
        "leg_f": rng.uniform(0.9, 1.1),
    }


def _base_pose(params: dict) -> np.ndarray:
    pose = _NEUTRAL.copy()
    for shoulder, chain in ((_LEFT_SHOULDER, _LEFT_ARM), (_RIGHT_SHOULDER, _RIGHT_ARM)):
        pose[chain] = pose[shoulder] + (pose[chain] - pose[shoulder]) * params["arm_f"]
    for hip, chain in ((12, _LEFT_LEG), (16, _RIGHT_LEG)):
        pose[chain] = pose[hip] + (pose[chain] - pose[hip]) * params["leg_f"]
    return pose


def _rotate_about_z(points: np.ndarray, center: np.ndarray, theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    rel = points - center
    out = rel.copy()
    out[:, 0] = c * rel[:, 0] - s * rel[:, 1]
    out[:, 1] = s * rel[:, 0] + c * rel[:, 1]
    return out + center


def _pose_raise_arm(pose: np.ndarray, t: float, p: dict) -> np.ndarray:
    theta = (5.0 * math.pi / 6.0) * p["amplitude"] * _ease(t)
    pose[_RIGHT_ARM] = _rotate_about_z(
        pose[_RIGHT_ARM], pose[_RIGHT_SHOULDER], theta
    )
    return pose


def _pose_wave_hand(pose: np.ndarray, t: float, p: dict) -> np.ndarray:
    shoulder = pose[_RIGHT_SHOULDER]
    arm_f = p["arm_f"]
    elbow = shoulder + np.array([0.25, 0.05, 0.0]) * arm_f
    phi = 0.5 * p["amplitude"] * math.sin(4.0 * math.pi * t)
    d = np.array([math.sin(phi), math.cos(phi), 0.0])
    pose[9] = elbow
    pose[10] = elbow + 0.25 * arm_f * d                       # wrist
    pose[11] = elbow + 0.32 * arm_f * d                       # hand
    pose[23] = elbow + 0.38 * arm_f * d                       # tip
    pose[24] = pose[10] + np.array([-0.03, 0.01, 0.03])       # thumb
    return pose


def _pose_sit_down(pose: np.ndarray, t: float, p: dict) -> np.ndarray:
    e = _ease(t)
    drop = 0.35 * p["amplitude"] * p["leg_f"] * e
    fwd = 0.12 * p["amplitude"] * e
    shift = np.array([0.0, -drop, fwd])
    pose[_TORSO_AND_ARMS] += shift
    pose[_HIPS] += shift
    pose[_KNEES] += np.array([0.0, 0.0, 0.28 * p["amplitude"] * p["leg_f"] * e])
    return pose


def _pose_arm_circle(pose: np.ndarray, t: float, p: dict) -> np.ndarray:
    shoulder = pose[_RIGHT_SHOULDER]
    alpha = 2.0 * math.pi * t
    r = 0.35 * p["amplitude"]
    d = np.array([r * math.cos(alpha), r * math.sin(alpha), 0.85])
    d /= np.linalg.norm(d)
    length = 0.55 * p["arm_f"]
    pose[9] = shoulder + 0.45 * length * d                    # elbow
    pose[10] = shoulder + 0.85 * length * d                   # wrist
    pose[11] = shoulder + 0.95 * length * d                   # hand
    pose[23] = shoulder + 1.05 * length * d                   # tip
    pose[24] = pose[10] + np.array([-0.03, 0.03, 0.0])        # thumb
    return pose


def _pose_box(pose: np.ndarray, t: float, p: dict) -> np.ndarray:
    swing = math.sin(4.0 * math.pi * t)
    for sign, shoulder_row, chain, ext in (
        (1.0, _RIGHT_SHOULDER, _RIGHT_ARM, max(0.0, swing)),
        (-1.0, _LEFT_SHOULDER, _LEFT_ARM, max(0.0, -swing)),
    ):
        shoulder = pose[shoulder_row]
        arm_f = p["arm_f"]
        reach = (0.12 + 0.45 * p["amplitude"] * ext) * arm_f
        wrist = shoulder + np.array([sign * 0.15 * (1.0 - 0.7 * ext), -0.05, reach])
        elbow = shoulder + 0.5 * (wrist - shoulder) + np.array(
            [sign * 0.05 * (1.0 - ext), -0.05, 0.0]
        )
        elbow_row, wrist_row, hand_row, tip_row, thumb_row = chain
        pose[elbow_row] = elbow
        pose[wrist_row] = wrist
        pose[hand_row] = wrist + np.array([0.0, 0.0, 0.07])
        pose[tip_row] = wrist + np.array([0.0, 0.0, 0.13])
        pose[thumb_row] = wrist + np.array([-sign * 0.03, 0.02, 0.02])
    return pose


_POSE_BUILDERS = {
    MotionKind.RAISE_ARM: _pose_raise_arm,
    MotionKind.WAVE_HAND: _pose_wave_hand,
    MotionKind.SIT_DOWN: _pose_sit_down,
    MotionKind.ARM_CIRCLE: _pose_arm_circle,
    MotionKind.BOX: _pose_box,
}


def _pose_at(kind: MotionKind, phase: float, params: dict) -> np.ndarray:
    pose = _base_pose(params)
    pose = _POSE_BUILDERS[kind](pose, phase, params)
    return pose * params["scale"]


def _phases(num_frames: int) -> list[float]:
    if num_frames == 1:
        return [0.0]
    return [(f - 1) / (num_frames - 1) for f in range(1, num_frames + 1)]


def _noise_rng(seed: int, kind: MotionKind) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(kind.value, 1))
    return np.random.Generator(np.random.PCG64(ss))


def _assemble(
    coords: np.ndarray,
    kind: MotionKind,
    seed: int,
    noise_std: float,
    label: int | None,
) -> SkeletonSequence:
    if noise_std > 0:
        coords = coords + _noise_rng(seed, kind).normal(
            0.0, noise_std, size=coords.shape
        )
    return frames_from_array(
        coords,
        label=kind.value if label is None else label,
        subject_id=seed % 40 + 1,
        camera_id=seed % 3 + 1,
    )


def _validate(num_frames: int, noise_std: float) -> None:
    if num_frames < 1:
        raise InvalidParams(f"num_frames must be >= 1, got {num_frames}")
    if noise_std < 0:
        raise InvalidParams(f"noise_std must be >= 0, got {noise_std}")


def gen_synthetic(
    kind: MotionKind,
    num_frames: int,
    seed: int,
    noise_std: float = 0.0,
    label: int | None = None,
) -> SkeletonSequence:
    """One synthetic motion sequence; label defaults to the kind's value."""
    if not isinstance(kind, MotionKind):
        raise InvalidParams(f"kind must be a MotionKind, got {kind!r}")
    _validate(num_frames, noise_std)
    params = _body_params(seed)
    if kind is MotionKind.STAND_UP:
        poses = [
            _pose_at(MotionKind.SIT_DOWN, t, params) for t in _phases(num_frames)
        ]
        poses.reverse()
    else:
        poses = [_pose_at(kind, t, params) for t in _phases(num_frames)]
    return _assemble(np.stack(poses), kind, seed, noise_std, label)


def gen_half_motion(
    kind: MotionKind,
    num_frames: int,
    active_half: str,
    seed: int,
    noise_std: float = 0.0,
    label: int | None = None,
) -> SkeletonSequence:
    """Motion squeezed into one half of the sequence at double speed.

    active_half="first": the motion plays over the first half, then the
    final pose holds. active_half="last": the initial pose holds through
    the first half, then the motion plays. The occupied space is the same
    either way; only timing differs.
    """
    if not isinstance(kind, MotionKind):
        raise InvalidParams(f"kind must be a MotionKind, got {kind!r}")
    if active_half not in ("first", "last"):
        raise InvalidParams(
            f"active_half must be 'first' or 'last', got {active_half!r}"
        )
    _validate(num_frames, noise_std)
    params = _body_params(seed)
    base_kind = MotionKind.SIT_DOWN if kind is MotionKind.STAND_UP else kind
    poses = []
    for t in _phases(num_frames):
        phase = min(1.0, 2.0 * t) if active_half == "first" else max(0.0, 2.0 * t - 1.0)
        if kind is MotionKind.STAND_UP:
            phase = 1.0 - phase
        poses.append(_pose_at(base_kind, phase, params))
    return _assemble(np.stack(poses), kind, seed, noise_std, label)


def make_reversed_pairs(
    num_pairs: int,
    num_frames: int,
    seed0: int = 0,
    noise_std: float = 0.0,
) -> tuple[list[SkeletonSequence], np.ndarray]:
    """Sit-down / stand-up pairs sharing bodies; labels 0 (sit) and 1 (stand)."""
    if num_pairs < 1:
        raise InvalidParams(f"num_pairs must be >= 1, got {num_pairs}")
    seqs = []
    labels = []
    for i in range(num_pairs):
        seqs.append(
            gen_synthetic(MotionKind.SIT_DOWN, num_frames, seed0 + i, noise_std, label=0)
        )
        labels.append(0)
        seqs.append(
            gen_synthetic(MotionKind.STAND_UP, num_frames, seed0 + i, noise_std, label=1)
        )
        labels.append(1)
    return seqs, np.asarray(labels, dtype=np.int64)


def relabel(seq: SkeletonSequence, label: int) -> SkeletonSequence:
    return replace(seq, label=label)
