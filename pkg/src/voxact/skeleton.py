"""Skeleton sequence types and file formats.

Three formats are handled here:

* NTU text format (``.skeleton``): the layout used by the NTU RGB+D corpus.
  Line 1 holds the frame count.  Each frame starts with a body-count line;
  each body contributes a header line of ``body_id`` plus 9 tracking
  parameters, a line holding the joint count (always ``25``), and 25 joint
  lines of 12 whitespace-separated floats whose first three fields are the
  x, y, z camera-space coordinates in meters.  The other 9 fields are parsed
  for well-formedness and discarded.

* Generic CSV (``.csv``): rows of ``frame,joint,x,y,z`` with an optional
  header, 25 joints per frame, any row order.

* Internal binary (``.skq``): versioned little-endian container giving
  bit-exact round trips.  Byte layout::

      offset  size  field
      0       4     magic b"VXSK"
      4       2     format version, u16 LE (currently 1)
      6       1     flags, u8: bit0 label, bit1 subject_id, bit2 camera_id,
                    bit3 source_path
      7       4     label, i32 LE            (present iff bit0)
      .       4     subject_id, i32 LE       (present iff bit1)
      .       4     camera_id, i32 LE        (present iff bit2)
      .       4+n   source_path: u32 LE byte length, then UTF-8 bytes
                    (present iff bit3)
      .       4     frame count F, u32 LE
      .       1     joint count M, u8 (always 25)
      .       F*M*3*8   coordinates, f64 LE, frame-major then joint then x,y,z

Frames are indexed 1..F.  Multi-body NTU files keep the body whose id shows
up in the most frames (ties broken toward the lowest id); frames without
that body are dropped and the survivors re-sequenced.
"""

from __future__ import annotations

import csv
import io
import math
import struct
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import (
    EmptySequence,
    MalformedFile,
    MissingJoint,
    TruncatedFile,
    VersionMismatch,
)

NUM_JOINTS = 25

MAGIC = b"VXSK"
FORMAT_VERSION = 1

_NTU_BODY_FIELDS = 10   # body id + 9 tracking parameters
_NTU_JOINT_FIELDS = 12  # x y z + 9 discarded fields


@dataclass(frozen=True)
class Joint:
    """One labeled 3D joint in camera space (meters)."""

    x: float
    y: float
    z: float

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=np.float64)


@dataclass(frozen=True)
class SkeletonFrame:
    """A single frame: 25 joints as a (25, 3) float64 array.

    The array is treated as immutable once the frame is built.
    """

    joints: np.ndarray
    frame_index: int

    def __post_init__(self):
        j = np.asarray(self.joints, dtype=np.float64)
        if j.shape != (NUM_JOINTS, 3):
            raise ValueError(f"expected ({NUM_JOINTS}, 3) joints, got {j.shape}")
        if not np.all(np.isfinite(j)):
            raise ValueError("joint coordinates must be finite")
        if self.frame_index < 1:
            raise ValueError("frame_index must be >= 1")
        object.__setattr__(self, "joints", j)

    def joint(self, index: int) -> Joint:
        """Return joint by 1-based NTU index."""
        x, y, z = self.joints[index - 1]
        return Joint(float(x), float(y), float(z))

    def __eq__(self, other) -> bool:
        if not isinstance(other, SkeletonFrame):
            return NotImplemented
        return self.frame_index == other.frame_index and np.array_equal(
            self.joints, other.joints
        )


@dataclass(frozen=True, eq=False)
class SkeletonSequence:
    """An ordered run of skeleton frames plus sample metadata."""

    frames: tuple[SkeletonFrame, ...]
    label: int | None = None
    subject_id: int | None = None
    camera_id: int | None = None
    source_path: str | None = None

    def __post_init__(self):
        frames = tuple(self.frames)
        if not frames:
            raise ValueError("a sequence needs at least one frame")
        for i, f in enumerate(frames, start=1):
            if f.frame_index != i:
                raise ValueError(
                    f"frame_index values must run 1..F; got {f.frame_index} at position {i}"
                )
        object.__setattr__(self, "frames", frames)

    @property
    def num_frames(self) -> int:
        return len(self.frames)

    def joint_array(self) -> np.ndarray:
        """All coordinates as an (F, 25, 3) float64 array."""
        return np.stack([f.joints for f in self.frames])

    def with_frames(self, joint_arrays: list[np.ndarray] | np.ndarray) -> "SkeletonSequence":
        """Same metadata, new frame geometry; indices re-sequenced 1..F."""
        frames = tuple(
            SkeletonFrame(joints=a, frame_index=i)
            for i, a in enumerate(joint_arrays, start=1)
        )
        return replace(self, frames=frames)

    def __eq__(self, other) -> bool:
        if not isinstance(other, SkeletonSequence):
            return NotImplemented
        return (
            self.label == other.label
            and self.subject_id == other.subject_id
            and self.camera_id == other.camera_id
            and self.source_path == other.source_path
            and self.frames == other.frames
        )


def frames_from_array(coords: np.ndarray, **meta) -> SkeletonSequence:
    """Build a sequence from an (F, 25, 3) array."""
    coords = np.asarray(coords, dtype=np.float64)
    if coords.ndim != 3 or coords.shape[1:] != (NUM_JOINTS, 3):
        raise ValueError(f"expected (F, {NUM_JOINTS}, 3), got {coords.shape}")
    frames = tuple(
        SkeletonFrame(joints=coords[i], frame_index=i + 1)
        for i in range(coords.shape[0])
    )
    return SkeletonSequence(frames=frames, **meta)


# --------------------------------------------------------------------------
# NTU text format
# --------------------------------------------------------------------------

class _LineReader:
    def __init__(self, text: str):
        self._lines = text.splitlines()
        self._pos = 0

    def next_line(self) -> str:
        while self._pos < len(self._lines):
            line = self._lines[self._pos]
            self._pos += 1
            if line.strip():
                return line
        raise MalformedFile("unexpected end of file")

    def rest_is_blank(self) -> bool:
        return all(not line.strip() for line in self._lines[self._pos:])


def _parse_int(token: str, what: str) -> int:
    try:
        return int(token.strip())
    except ValueError:
        raise MalformedFile(f"expected integer {what}, got {token.strip()!r}") from None


def _parse_float(token: str, what: str) -> float:
    try:
        return float(token)
    except ValueError:
        raise MalformedFile(f"expected number in {what}, got {token!r}") from None


def parse_ntu_skeleton(text: str, source_path: str | None = None) -> SkeletonSequence:
    """Parse NTU skeleton text into a sequence.

    Frames with no usable body are dropped and the rest re-sequenced.  When
    several bodies are tracked, the body id present in the most frames wins
    (ties toward the lowest id).
    """
    reader = _LineReader(text)
    frame_count = _parse_int(reader.next_line(), "frame count")
    if frame_count < 0:
        raise MalformedFile("negative frame count")

    # frame -> list of (body_id, (25, 3) coords)
    raw_frames: list[list[tuple[int, np.ndarray]]] = []
    for _ in range(frame_count):
        body_count = _parse_int(reader.next_line(), "body count")
        if body_count < 0:
            raise MalformedFile("negative body count")
        bodies = []
        for _ in range(body_count):
            header = reader.next_line().split()
            if len(header) != _NTU_BODY_FIELDS:
                raise MalformedFile(
                    f"body header has {len(header)} fields, expected {_NTU_BODY_FIELDS}"
                )
            body_id = _parse_int(header[0], "body id")
            for tok in header[1:]:
                _parse_float(tok, "body header")
            joint_count = _parse_int(reader.next_line(), "joint count")
            if joint_count != NUM_JOINTS:
                raise MalformedFile(f"joint count {joint_count} != {NUM_JOINTS}")
            coords = np.empty((NUM_JOINTS, 3), dtype=np.float64)
            for j in range(NUM_JOINTS):
                fields = reader.next_line().split()
                if len(fields) != _NTU_JOINT_FIELDS:
                    raise MalformedFile(
                        f"joint line has {len(fields)} fields, expected {_NTU_JOINT_FIELDS}"
                    )
                vals = [_parse_float(tok, "joint line") for tok in fields]
                x, y, z = vals[0], vals[1], vals[2]
                if not (math.isfinite(x) and math.isfinite(y) and math.isfinite(z)):
                    raise MalformedFile("non-finite joint coordinate")
                coords[j] = (x, y, z)
            bodies.append((body_id, coords))
        raw_frames.append(bodies)

    if not reader.rest_is_blank():
        raise MalformedFile("trailing content after declared frames")

    # pick the body id seen in the most frames, ties toward the lowest id
    presence: dict[int, int] = {}
    for bodies in raw_frames:
        for body_id in {bid for bid, _ in bodies}:
            presence[body_id] = presence.get(body_id, 0) + 1
    if not presence:
        raise EmptySequence("no bodies in any frame")
    chosen = min(presence, key=lambda bid: (-presence[bid], bid))

    frames = []
    for bodies in raw_frames:
        for body_id, coords in bodies:
            if body_id == chosen:
                frames.append(coords)
                break
    if not frames:
        raise EmptySequence("no usable frames")
    return frames_from_array(np.stack(frames), source_path=source_path)


# --------------------------------------------------------------------------
# CSV format
# --------------------------------------------------------------------------

def parse_csv_sequence(text: str, source_path: str | None = None) -> SkeletonSequence:
    """Parse ``frame,joint,x,y,z`` rows (header optional, any row order)."""
    rows: dict[tuple[int, int], tuple[float, float, float]] = {}
    reader = csv.reader(io.StringIO(text))
    first = True
    for row in reader:
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 5:
            raise MalformedFile(f"CSV row has {len(row)} fields, expected 5")
        if first:
            first = False
            try:
                int(row[0].strip())
            except ValueError:
                continue  # header row
        frame = _parse_int(row[0], "frame index")
        joint = _parse_int(row[1], "joint index")
        if frame < 1:
            raise MalformedFile(f"frame index {frame} < 1")
        if not 1 <= joint <= NUM_JOINTS:
            raise MalformedFile(f"joint index {joint} outside 1..{NUM_JOINTS}")
        x = _parse_float(row[2].strip(), "x")
        y = _parse_float(row[3].strip(), "y")
        z = _parse_float(row[4].strip(), "z")
        if not (math.isfinite(x) and math.isfinite(y) and math.isfinite(z)):
            raise MalformedFile("non-finite joint coordinate")
        key = (frame, joint)
        if key in rows:
            raise MalformedFile(f"duplicate row for frame {frame}, joint {joint}")
        rows[key] = (x, y, z)

    if not rows:
        raise EmptySequence("CSV contained no joint rows")

    frame_ids = sorted({f for f, _ in rows})
    coords = np.empty((len(frame_ids), NUM_JOINTS, 3), dtype=np.float64)
    for fi, frame in enumerate(frame_ids):
        for joint in range(1, NUM_JOINTS + 1):
            if (frame, joint) not in rows:
                raise MissingJoint(f"frame {frame} lacks joint {joint}")
            coords[fi, joint - 1] = rows[(frame, joint)]
    return frames_from_array(coords, source_path=source_path)


# --------------------------------------------------------------------------
# internal binary format
# --------------------------------------------------------------------------

_FLAG_LABEL = 1
_FLAG_SUBJECT = 2
_FLAG_CAMERA = 4
_FLAG_SOURCE = 8


def write_sequence(seq: SkeletonSequence) -> bytes:
    """Serialize to the internal binary format (bit-exact round trip)."""
    out = bytearray()
    out += MAGIC
    out += struct.pack("<H", FORMAT_VERSION)
    flags = 0
    if seq.label is not None:
        flags |= _FLAG_LABEL
    if seq.subject_id is not None:
        flags |= _FLAG_SUBJECT
    if seq.camera_id is not None:
        flags |= _FLAG_CAMERA
    if seq.source_path is not None:
        flags |= _FLAG_SOURCE
    out += struct.pack("<B", flags)
    if seq.label is not None:
        out += struct.pack("<i", seq.label)
    if seq.subject_id is not None:
        out += struct.pack("<i", seq.subject_id)
    if seq.camera_id is not None:
        out += struct.pack("<i", seq.camera_id)
    if seq.source_path is not None:
        encoded = seq.source_path.encode("utf-8")
        out += struct.pack("<I", len(encoded))
        out += encoded
    out += struct.pack("<I", seq.num_frames)
    out += struct.pack("<B", NUM_JOINTS)
    coords = np.ascontiguousarray(seq.joint_array(), dtype="<f8")
    out += coords.tobytes()
    return bytes(out)


class _ByteReader:
    def __init__(self, data: bytes):
        self._data = data
        self._pos = 0

    def take(self, n: int) -> bytes:
        if self._pos + n > len(self._data):
            raise TruncatedFile(
                f"needed {n} bytes at offset {self._pos}, only {len(self._data) - self._pos} left"
            )
        chunk = self._data[self._pos:self._pos + n]
        self._pos += n
        return chunk

    def done(self) -> bool:
        return self._pos == len(self._data)


def read_sequence(data: bytes) -> SkeletonSequence:
    """Deserialize the internal binary format."""
    r = _ByteReader(data)
    if r.take(4) != MAGIC:
        raise VersionMismatch("bad magic bytes")
    (version,) = struct.unpack("<H", r.take(2))
    if version != FORMAT_VERSION:
        raise VersionMismatch(f"unknown format version {version}")
    (flags,) = struct.unpack("<B", r.take(1))
    label = subject_id = camera_id = None
    source_path = None
    if flags & _FLAG_LABEL:
        (label,) = struct.unpack("<i", r.take(4))
    if flags & _FLAG_SUBJECT:
        (subject_id,) = struct.unpack("<i", r.take(4))
    if flags & _FLAG_CAMERA:
        (camera_id,) = struct.unpack("<i", r.take(4))
    if flags & _FLAG_SOURCE:
        (n,) = struct.unpack("<I", r.take(4))
        try:
            source_path = r.take(n).decode("utf-8")
        except UnicodeDecodeError as exc:
            raise MalformedFile("source path is not valid UTF-8") from exc
    (num_frames,) = struct.unpack("<I", r.take(4))
    (num_joints,) = struct.unpack("<B", r.take(1))
    if num_joints != NUM_JOINTS:
        raise MalformedFile(f"joint count {num_joints} != {NUM_JOINTS}")
    if num_frames < 1:
        raise EmptySequence("stored sequence has zero frames")
    payload = r.take(num_frames * NUM_JOINTS * 3 * 8)
    if not r.done():
        raise MalformedFile("trailing bytes after coordinate payload")
    coords = np.frombuffer(payload, dtype="<f8").reshape(num_frames, NUM_JOINTS, 3)
    if not np.all(np.isfinite(coords)):
        raise MalformedFile("non-finite stored coordinate")
    return frames_from_array(
        coords.astype(np.float64),
        label=label,
        subject_id=subject_id,
        camera_id=camera_id,
        source_path=source_path,
    )


def save_sequence(seq: SkeletonSequence, path: str | Path) -> None:
    Path(path).write_bytes(write_sequence(seq))


def load_sequence(path: str | Path) -> SkeletonSequence:
    return read_sequence(Path(path).read_bytes())


def load_skeleton_file(path: str | Path) -> SkeletonSequence:
    """Load by extension: .skeleton (NTU text), .csv, or .skq (binary)."""
    path = Path(path)
    suffix = path.suffix.lower()
    if suffix == ".skq":
        return load_sequence(path)
    text = path.read_text()
    if suffix == ".csv":
        return parse_csv_sequence(text, source_path=str(path))
    return parse_ntu_skeleton(text, source_path=str(path))
