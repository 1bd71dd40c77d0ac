"""Voxel volume encoding of point-cloud sequences.

A sequence is fitted with a per-sequence cubic bounding box (aspect
preserved, 5% margin by default), then rasterized into two R x R x R
volumes:

* spatial: voxel = 1 wherever any point of any frame lands, else 0
* temporal: voxel = normalized index of the LAST frame touching it,
  norm(f) = (f-1)/(F-1) (norm = 1 when F = 1); untouched voxels are 0

The first frame therefore encodes as 0 and the last as 1; a frame-reversed
sequence keeps the identical spatial volume but changes the temporal one.

Volume file format (``.vox``), little-endian::

    offset  size   field
    0       4      magic b"VXVL"
    4       2      format version, u16 (currently 1)
    6       1      kind, u8: 0 spatial, 1 temporal
    7       4      resolution R, u32
    11      24     bounds center, 3 x f64
    35      8      bounds half_extent, f64
    43      4*R^3  values, f32, C order over axes (x, y, z)
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    EmptyInput,
    IndexOutOfRange,
    MalformedFile,
    OutOfBounds,
    TruncatedFile,
    VersionMismatch,
)
from .preprocess import PointCloudSequence

DEFAULT_RESOLUTION = 50
DEFAULT_MARGIN = 0.05
MIN_HALF_EXTENT = 0.1  # meters; floor for degenerate clouds

VOLUME_MAGIC = b"VXVL"
VOLUME_VERSION = 1

KIND_SPATIAL = "spatial"
KIND_TEMPORAL = "temporal"
_KIND_CODES = {KIND_SPATIAL: 0, KIND_TEMPORAL: 1}
_CODE_KINDS = {v: k for k, v in _KIND_CODES.items()}

# Slack for points that defined the bounds but round outside them by one ulp.
_BOUNDS_TOLERANCE = 1e-9


@dataclass(frozen=True)
class GridBounds:
    """Axis-aligned cube in world space."""

    center: np.ndarray   # (3,)
    half_extent: float

    def __post_init__(self):
        c = np.asarray(self.center, dtype=np.float64)
        if c.shape != (3,):
            raise ValueError("center must be a 3-vector")
        if not self.half_extent > 0:
            raise ValueError("half_extent must be positive")
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "half_extent", float(self.half_extent))

    @property
    def minimum(self) -> np.ndarray:
        return self.center - self.half_extent

    @property
    def maximum(self) -> np.ndarray:
        return self.center + self.half_extent


@dataclass(frozen=True)
class VoxelGrid:
    """Dense R x R x R scalar field over cube bounds, values in [0, 1]."""

    values: np.ndarray  # (R, R, R) float64, axes (x, y, z)
    bounds: GridBounds
    kind: str

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 3 or len(set(v.shape)) != 1:
            raise ValueError(f"values must be cubic, got shape {v.shape}")
        if self.kind not in _KIND_CODES:
            raise ValueError(f"kind must be one of {sorted(_KIND_CODES)}")
        if self.kind == KIND_SPATIAL:
            if not np.all((v == 0.0) | (v == 1.0)):
                raise ValueError("spatial volume values must be 0 or 1")
        else:
            if v.min() < 0.0 or v.max() > 1.0:
                raise ValueError("temporal volume values must lie in [0, 1]")
        object.__setattr__(self, "values", v)

    @property
    def resolution(self) -> int:
        return self.values.shape[0]


def fit_bounds(pcs: PointCloudSequence, margin: float = DEFAULT_MARGIN) -> GridBounds:
    """Cube around the bounding box of all frames, expanded by ``margin``.

    The cube is centered on the box midpoint with half extent
    (1 + margin) * (largest box dimension) / 2, floored at MIN_HALF_EXTENT
    so single points and degenerate clouds still get a usable cube.
    """
    if margin < 0:
        raise ValueError("margin must be >= 0")
    if pcs.num_frames == 0:
        raise EmptyInput("no frames to fit bounds around")
    pts = pcs.all_points()
    if pts.size == 0:
        raise EmptyInput("no points to fit bounds around")
    lo = pts.min(axis=0)
    hi = pts.max(axis=0)
    center = (lo + hi) / 2.0
    half = float((hi - lo).max()) / 2.0
    half_extent = max((1.0 + margin) * half, MIN_HALF_EXTENT)
    return GridBounds(center=center, half_extent=half_extent)


def _voxel_indices(points: np.ndarray, bounds: GridBounds, resolution: int) -> np.ndarray:
    """Map an (N, 3) point array to (N, 3) integer voxel indices."""
    pts = np.asarray(points, dtype=np.float64)
    lo = bounds.minimum
    hi = bounds.maximum
    tol = _BOUNDS_TOLERANCE * max(1.0, bounds.half_extent)
    if np.any(pts < lo - tol) or np.any(pts > hi + tol):
        raise OutOfBounds("point outside the grid cube")
    scaled = (pts - lo) / (2.0 * bounds.half_extent) * resolution
    idx = np.floor(scaled).astype(np.int64)
    return np.clip(idx, 0, resolution - 1)


def point_to_voxel(point, bounds: GridBounds, resolution: int) -> tuple[int, int, int]:
    """Voxel index triple of one point; raises OutOfBounds outside the cube."""
    idx = _voxel_indices(np.asarray(point, dtype=np.float64).reshape(1, 3), bounds, resolution)
    return (int(idx[0, 0]), int(idx[0, 1]), int(idx[0, 2]))


def _check_nonempty(pcs: PointCloudSequence) -> None:
    if pcs.num_frames == 0 or all(f.shape[0] == 0 for f in pcs.frames):
        raise EmptyInput("cannot encode an empty point-cloud sequence")


def encode_spatial(
    pcs: PointCloudSequence,
    bounds: GridBounds,
    resolution: int = DEFAULT_RESOLUTION,
) -> VoxelGrid:
    """Binary occupancy volume: 1 where any point of any frame lands."""
    _check_nonempty(pcs)
    values = np.zeros((resolution,) * 3, dtype=np.float64)
    for frame_pts in pcs.frames:
        if frame_pts.shape[0] == 0:
            continue
        idx = _voxel_indices(frame_pts, bounds, resolution)
        values[idx[:, 0], idx[:, 1], idx[:, 2]] = 1.0
    return VoxelGrid(values=values, bounds=bounds, kind=KIND_SPATIAL)


def encode_temporal(
    pcs: PointCloudSequence,
    bounds: GridBounds,
    resolution: int = DEFAULT_RESOLUTION,
) -> VoxelGrid:
    """Last-touch time volume: norm(f) of the latest frame hitting each voxel."""
    _check_nonempty(pcs)
    f_total = pcs.num_frames
    values = np.zeros((resolution,) * 3, dtype=np.float64)
    for f, frame_pts in enumerate(pcs.frames, start=1):
        if frame_pts.shape[0] == 0:
            continue
        norm = 1.0 if f_total == 1 else (f - 1) / (f_total - 1)
        idx = _voxel_indices(frame_pts, bounds, resolution)
        values[idx[:, 0], idx[:, 1], idx[:, 2]] = norm
    return VoxelGrid(values=values, bounds=bounds, kind=KIND_TEMPORAL)


# --------------------------------------------------------------------------
# volume files
# --------------------------------------------------------------------------

def write_volume(grid: VoxelGrid) -> bytes:
    out = bytearray()
    out += VOLUME_MAGIC
    out += struct.pack("<H", VOLUME_VERSION)
    out += struct.pack("<B", _KIND_CODES[grid.kind])
    out += struct.pack("<I", grid.resolution)
    out += struct.pack("<3d", *grid.bounds.center)
    out += struct.pack("<d", grid.bounds.half_extent)
    out += np.ascontiguousarray(grid.values, dtype="<f4").tobytes()
    return bytes(out)


def read_volume(data: bytes) -> VoxelGrid:
    if len(data) < 4 or data[:4] != VOLUME_MAGIC:
        raise VersionMismatch("bad magic bytes for volume file")
    pos = 4
    def take(n: int) -> bytes:
        nonlocal pos
        if pos + n > len(data):
            raise TruncatedFile(f"volume file ends early at offset {pos}")
        chunk = data[pos:pos + n]
        pos += n
        return chunk
    (version,) = struct.unpack("<H", take(2))
    if version != VOLUME_VERSION:
        raise VersionMismatch(f"unknown volume format version {version}")
    (kind_code,) = struct.unpack("<B", take(1))
    if kind_code not in _CODE_KINDS:
        raise MalformedFile(f"unknown volume kind code {kind_code}")
    (resolution,) = struct.unpack("<I", take(4))
    if resolution < 1 or resolution > 4096:
        raise MalformedFile(f"implausible resolution {resolution}")
    center = np.array(struct.unpack("<3d", take(24)))
    (half_extent,) = struct.unpack("<d", take(8))
    if not (np.all(np.isfinite(center)) and np.isfinite(half_extent) and half_extent > 0):
        raise MalformedFile("non-finite or non-positive volume bounds")
    payload = take(resolution ** 3 * 4)
    if pos != len(data):
        raise MalformedFile("trailing bytes after volume payload")
    values = np.frombuffer(payload, dtype="<f4").astype(np.float64)
    values = values.reshape((resolution,) * 3)
    if not np.all(np.isfinite(values)):
        raise MalformedFile("non-finite volume value")
    try:
        return VoxelGrid(
            values=values,
            bounds=GridBounds(center=center, half_extent=half_extent),
            kind=_CODE_KINDS[kind_code],
        )
    except ValueError as exc:
        raise MalformedFile(str(exc)) from exc


def save_volume(grid: VoxelGrid, path: str | Path) -> None:
    Path(path).write_bytes(write_volume(grid))


def load_volume(path: str | Path) -> VoxelGrid:
    return read_volume(Path(path).read_bytes())


# --------------------------------------------------------------------------
# slices, projections, image export
# --------------------------------------------------------------------------

_AXES = {"x": 0, "y": 1, "z": 2}


def volume_slice(grid: VoxelGrid, axis: str, index: int) -> np.ndarray:
    """One orthogonal 2D slice of the volume."""
    if axis not in _AXES:
        raise ValueError(f"axis must be one of {sorted(_AXES)}")
    if not 0 <= index < grid.resolution:
        raise IndexOutOfRange(f"slice index {index} outside 0..{grid.resolution - 1}")
    return np.take(grid.values, index, axis=_AXES[axis])


def max_projection(grid: VoxelGrid, axis: str) -> np.ndarray:
    """Maximum-intensity projection along one axis."""
    if axis not in _AXES:
        raise ValueError(f"axis must be one of {sorted(_AXES)}")
    return grid.values.max(axis=_AXES[axis])


def to_pgm_bytes(plane: np.ndarray) -> bytes:
    """Render a [0,1] plane as binary PGM; larger values print darker."""
    v = np.clip(np.asarray(plane, dtype=np.float64), 0.0, 1.0)
    pixels = (255 - np.rint(v * 255)).astype(np.uint8)
    header = f"P5\n{pixels.shape[1]} {pixels.shape[0]}\n255\n".encode("ascii")
    return header + pixels.tobytes()


def plane_to_csv(plane: np.ndarray) -> str:
    rows = [",".join(repr(float(v)) for v in row) for row in np.asarray(plane)]
    return "\n".join(rows) + "\n"
