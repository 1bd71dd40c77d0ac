"""Two-stream voxel CNN: architecture, training, fusion, checkpoints.

Each stream is a 3D CNN over one voxel volume kind (spatial occupancy or
temporal last-touch), built from repeated blocks

    conv3d -> ReLU -> dropout -> 2x2x2 max pool (stride 2, floor)

followed by two fully connected ReLU layers and a linear class layer.
The default architecture uses four conv blocks with channel widths
(3, 8, 32, 64) and kernels (7,7,5), (5,5,3), (5,5,3), (3,5,3) over axes
(x, y, z). The first three convs preserve extent (same padding); the last
is unpadded. When the incoming volume is too small for an unpadded kernel
(resolutions below 48 shrink past it), that layer falls back to same
padding so one architecture serves multiple grid resolutions; the shape
trace is validated at construction and reported on failure.

The two streams are trained independently and fused at prediction time by
an elementwise product of their class probability vectors (left
unnormalized; the argmax is unaffected). Multi-temporal prediction runs
the same two-stream model per temporal level and fuses level outputs the
same way (a mean mode is available as a config switch).
"""

from __future__ import annotations

import json
import struct
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from . import nn
from .errors import (
    ClassMissing,
    ConfigError,
    EmptyDataset,
    EmptyInput,
    IncompatibleCheckpoint,
    LengthMismatch,
    NumericError,
    TruncatedFile,
    VersionMismatch,
)
from .preprocess import (
    PointCloudSequence,
    center_on_hip,
    interpolate_bones,
    temporal_subsequence,
    view_normalize,
)
from .skeleton import SkeletonSequence
from .volumes import (
    KIND_SPATIAL,
    KIND_TEMPORAL,
    VoxelGrid,
    encode_spatial,
    encode_temporal,
    fit_bounds,
)

CHECKPOINT_MAGIC = b"VXNN"
CHECKPOINT_VERSION = 1
MANIFEST_NAME = "manifest.json"

STREAM_KINDS = (KIND_SPATIAL, KIND_TEMPORAL)
ALL_LEVELS = (0, 1, 2, 3)


# --------------------------------------------------------------------------
# encoding pipeline configuration
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class EncodeConfig:
    """How a skeleton sequence becomes voxel volumes."""

    resolution: int = 50
    margin: float = 0.05
    bone_points: int = 10
    normalize_view: bool = True

    def __post_init__(self):
        if self.resolution < 1:
            raise ConfigError(f"resolution must be >= 1, got {self.resolution}")
        if self.margin < 0:
            raise ConfigError(f"margin must be >= 0, got {self.margin}")
        if self.bone_points < 0:
            raise ConfigError(f"bone_points must be >= 0, got {self.bone_points}")


def sequence_points(seq: SkeletonSequence, cfg: EncodeConfig) -> PointCloudSequence:
    """Shared preprocessing: center, optional view alignment, bone fill."""
    centered = center_on_hip(seq)
    if cfg.normalize_view:
        centered = view_normalize(centered).seq
    return interpolate_bones(centered, cfg.bone_points)


def encode_sequence(
    seq: SkeletonSequence,
    cfg: EncodeConfig,
    level: int = 0,
) -> tuple[VoxelGrid, VoxelGrid]:
    """Encode one temporal level of a sequence as (spatial, temporal) grids."""
    sub = temporal_subsequence(seq, level)
    pcs = sequence_points(sub, cfg)
    bounds = fit_bounds(pcs, cfg.margin)
    return (
        encode_spatial(pcs, bounds, cfg.resolution),
        encode_temporal(pcs, bounds, cfg.resolution),
    )


def volumes_to_batch(grids: list[VoxelGrid], dtype=np.float32) -> np.ndarray:
    """Stack voxel grids into an (N, 1, R, R, R) activation tensor."""
    if not grids:
        raise EmptyInput("no volumes to batch")
    res = grids[0].resolution
    for g in grids:
        if g.resolution != res:
            raise LengthMismatch(
                f"mixed resolutions in batch: {g.resolution} vs {res}"
            )
    return np.stack([g.values for g in grids])[:, None].astype(dtype)


# --------------------------------------------------------------------------
# stream network
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class StreamConfig:
    """Architecture of one stream; defaults give the full-size network."""

    resolution: int
    num_classes: int
    conv_channels: tuple = (3, 8, 32, 64)
    conv_kernels: tuple = ((7, 7, 5), (5, 5, 3), (5, 5, 3), (3, 5, 3))
    conv_paddings: tuple = ("same", "same", "same", "valid")
    pool_window: tuple = (2, 2, 2)
    fc_sizes: tuple = (512, 256)
    dropout: float = 0.3
    dtype: str = "float32"
    conv_method: str = "auto"

    def __post_init__(self):
        object.__setattr__(self, "conv_channels", tuple(self.conv_channels))
        object.__setattr__(
            self, "conv_kernels", tuple(tuple(k) for k in self.conv_kernels)
        )
        object.__setattr__(self, "conv_paddings", tuple(self.conv_paddings))
        object.__setattr__(self, "pool_window", tuple(self.pool_window))
        object.__setattr__(self, "fc_sizes", tuple(self.fc_sizes))
        if self.resolution < 1:
            raise ConfigError(f"resolution must be >= 1, got {self.resolution}")
        if self.num_classes < 2:
            raise ConfigError(f"need at least 2 classes, got {self.num_classes}")
        n = len(self.conv_channels)
        if n == 0:
            raise ConfigError("need at least one conv block")
        if len(self.conv_kernels) != n or len(self.conv_paddings) != n:
            raise ConfigError(
                "conv_channels, conv_kernels and conv_paddings must have equal length"
            )
        for k in self.conv_kernels:
            if len(k) != 3 or any(e < 1 for e in k):
                raise ConfigError(f"bad kernel {k}")
        for p in self.conv_paddings:
            if p not in ("same", "valid"):
                raise ConfigError(f"padding must be 'same' or 'valid', got {p!r}")
        if not 0.0 <= self.dropout < 1.0:
            raise ConfigError(f"dropout must be in [0, 1), got {self.dropout}")
        if self.dtype not in ("float32", "float64"):
            raise ConfigError(f"dtype must be float32 or float64, got {self.dtype}")
        if self.conv_method not in ("auto", "im2col", "fft"):
            raise ConfigError(f"unknown conv method {self.conv_method!r}")

    @property
    def np_dtype(self):
        return np.float32 if self.dtype == "float32" else np.float64


def _resolve_architecture(cfg: StreamConfig):
    """Walk the shape trace; resolve paddings and the flatten width.

    Returns (paddings, trace) where paddings are numeric triples and trace
    is a list of (description, shape) pairs for diagnostics.
    """
    shape = (cfg.resolution,) * 3
    trace = [("input", shape)]
    paddings = []
    channels = 1
    for i, (c_out, kernel, pad_kind) in enumerate(
        zip(cfg.conv_channels, cfg.conv_kernels, cfg.conv_paddings)
    ):
        if pad_kind == "valid" and all(d >= k for d, k in zip(shape, kernel)):
            pad = (0, 0, 0)
        else:
            # Same padding, either requested or as the small-volume fallback.
            try:
                pad = nn.same_padding(kernel)
            except ValueError as exc:
                raise ConfigError(str(exc)) from exc
        shape = nn.conv3d_output_shape(shape, kernel, pad)
        trace.append((f"conv{i + 1}", shape))
        pooled = tuple(
            (d - w) // w + 1 for d, w in zip(shape, cfg.pool_window)
        )
        if any(e < 1 for e in pooled):
            raise ConfigError(
                f"volume collapses at pool{i + 1}: trace so far {trace}"
            )
        shape = pooled
        trace.append((f"pool{i + 1}", shape))
        paddings.append(pad)
        channels = c_out
    flat = channels * int(np.prod(shape))
    trace.append(("flatten", (flat,)))
    return paddings, trace, flat


class StreamNetwork:
    """One voxel CNN stream with manual forward and backward passes."""

    def __init__(self, config: StreamConfig, rng: np.random.Generator):
        self.config = config
        self.paddings, self.trace, self.flat_size = _resolve_architecture(config)
        dtype = config.np_dtype
        self.conv_w: list[np.ndarray] = []
        self.conv_b: list[np.ndarray] = []
        c_in = 1
        for c_out, kernel in zip(config.conv_channels, config.conv_kernels):
            w, b = nn.init_conv_params(c_in, c_out, kernel, rng, dtype)
            self.conv_w.append(w)
            self.conv_b.append(b)
            c_in = c_out
        self.fc_w: list[np.ndarray] = []
        self.fc_b: list[np.ndarray] = []
        width = self.flat_size
        for size in config.fc_sizes:
            w, b = nn.init_dense_params(width, size, rng, dtype)
            self.fc_w.append(w)
            self.fc_b.append(b)
            width = size
        self.out_w, self.out_b = nn.init_dense_params(
            width, config.num_classes, rng, dtype
        )

    # parameters -----------------------------------------------------------

    def params(self) -> list[np.ndarray]:
        flat = []
        for w, b in zip(self.conv_w, self.conv_b):
            flat += [w, b]
        for w, b in zip(self.fc_w, self.fc_b):
            flat += [w, b]
        flat += [self.out_w, self.out_b]
        return flat

    def param_names(self) -> list[str]:
        names = []
        for i in range(len(self.conv_w)):
            names += [f"conv{i + 1}_w", f"conv{i + 1}_b"]
        for i in range(len(self.fc_w)):
            names += [f"fc{i + 1}_w", f"fc{i + 1}_b"]
        names += ["out_w", "out_b"]
        return names

    @property
    def num_params(self) -> int:
        return nn.param_count(self.params())

    # passes ----------------------------------------------------------------

    def forward(
        self,
        x: np.ndarray,
        training: bool = False,
        rng: np.random.Generator | None = None,
        frozen_masks: list[np.ndarray] | None = None,
    ):
        """Returns (logits, cache); cache feeds backward()."""
        cfg = self.config
        x = np.asarray(x, dtype=cfg.np_dtype)
        if x.ndim != 5 or x.shape[1] != 1 or x.shape[2:] != (cfg.resolution,) * 3:
            raise LengthMismatch(
                f"expected (N, 1, {cfg.resolution}, {cfg.resolution}, "
                f"{cfg.resolution}) input, got {x.shape}"
            )
        blocks = []
        for i, (w, b) in enumerate(zip(self.conv_w, self.conv_b)):
            conv_in = x
            z = nn.conv3d_forward(conv_in, w, b, self.paddings[i], cfg.conv_method)
            a = nn.relu_forward(z)
            mask = frozen_masks[i] if frozen_masks is not None else None
            d, mask = nn.dropout_forward(a, cfg.dropout, rng, training, mask)
            x, pool_cache = nn.maxpool3d_forward(d, cfg.pool_window)
            blocks.append({"conv_in": conv_in, "pre_relu": z, "mask": mask,
                           "pool": pool_cache})
        pooled_shape = x.shape
        h = x.reshape(x.shape[0], -1)
        fcs = []
        for w, b in zip(self.fc_w, self.fc_b):
            z = nn.dense_forward(h, w, b)
            fcs.append({"in": h, "pre_relu": z})
            h = nn.relu_forward(z)
        logits = nn.dense_forward(h, self.out_w, self.out_b)
        cache = {"blocks": blocks, "pooled_shape": pooled_shape, "fcs": fcs,
                 "out_in": h}
        return logits, cache

    def backward(self, cache, grad_logits: np.ndarray) -> list[np.ndarray]:
        """Gradients for every parameter, ordered like params()."""
        cfg = self.config
        g, out_gw, out_gb = nn.dense_backward(
            cache["out_in"], self.out_w, grad_logits
        )
        fc_grads = []
        for layer, w in zip(reversed(cache["fcs"]), reversed(self.fc_w)):
            g = nn.relu_backward(g, layer["pre_relu"])
            g, gw, gb = nn.dense_backward(layer["in"], w, g)
            fc_grads.append((gw, gb))
        fc_grads.reverse()
        g = g.reshape(cache["pooled_shape"])
        conv_grads = []
        for i in range(len(self.conv_w) - 1, -1, -1):
            blk = cache["blocks"][i]
            g = nn.maxpool3d_backward(g, blk["pool"])
            g = nn.dropout_backward(g, blk["mask"], cfg.dropout)
            g = nn.relu_backward(g, blk["pre_relu"])
            g, gw, gb = nn.conv3d_backward(
                blk["conv_in"], self.conv_w[i], g, self.paddings[i],
                cfg.conv_method, need_grad_x=(i > 0),
            )
            conv_grads.append((gw, gb))
        conv_grads.reverse()
        grads = []
        for gw, gb in conv_grads:
            grads += [gw, gb]
        for gw, gb in fc_grads:
            grads += [gw, gb]
        grads += [out_gw, out_gb]
        return grads

    def predict_probs(self, x: np.ndarray, batch_size: int = 32) -> np.ndarray:
        """Evaluation-mode class probabilities, (N, K)."""
        x = np.asarray(x)
        out = []
        for lo in range(0, x.shape[0], batch_size):
            logits, _ = self.forward(x[lo:lo + batch_size], training=False)
            out.append(nn.softmax(logits))
        return np.concatenate(out, axis=0)


# --------------------------------------------------------------------------
# training
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 250
    batch_size: int = 32
    learning_rate: float = 0.0005
    momentum: float = 0.9
    weight_decay: float = 1e-6

    def __post_init__(self):
        if self.epochs < 0:
            raise ConfigError(f"epochs must be >= 0, got {self.epochs}")
        if self.batch_size < 1:
            raise ConfigError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.learning_rate < 0:
            raise ConfigError(f"learning_rate must be >= 0")
        if not 0.0 <= self.momentum < 1.0:
            raise ConfigError(f"momentum must be in [0, 1), got {self.momentum}")
        if self.weight_decay < 0:
            raise ConfigError(f"weight_decay must be >= 0")


@dataclass
class EpochStats:
    epoch: int
    train_loss: float
    train_err: float
    val_err: float        # NaN when no validation set was given
    best_val_err: float   # NaN likewise


@dataclass
class TrainLog:
    rows: list = field(default_factory=list)

    CSV_HEADER = "epoch,train_loss,train_err,val_err,best_val_err"

    def to_csv(self) -> str:
        lines = [self.CSV_HEADER]
        for r in self.rows:
            lines.append(
                f"{r.epoch},{r.train_loss!r},{r.train_err!r},"
                f"{r.val_err!r},{r.best_val_err!r}"
            )
        return "\n".join(lines) + "\n"


def _check_labels(labels: np.ndarray, num_classes: int) -> np.ndarray:
    labels = np.asarray(labels)
    if labels.size == 0:
        raise EmptyDataset("no training samples")
    present = set(int(v) for v in np.unique(labels))
    missing = [k for k in range(num_classes) if k not in present]
    if missing:
        raise ClassMissing(f"no training samples for classes {missing}")
    return labels.astype(np.int64)


def train_stream(
    net: StreamNetwork,
    x: np.ndarray,
    labels: np.ndarray,
    cfg: TrainConfig,
    rng: np.random.Generator,
    val_x: np.ndarray | None = None,
    val_labels: np.ndarray | None = None,
    on_epoch=None,
) -> TrainLog:
    """Minibatch SGD with momentum and weight decay on one stream.

    Shuffles each epoch with ``rng``; the final partial batch is kept.
    ``on_epoch`` (if given) receives each EpochStats row as it is produced.
    """
    x = np.asarray(x, dtype=net.config.np_dtype)
    labels = _check_labels(labels, net.config.num_classes)
    if x.shape[0] != labels.shape[0]:
        raise LengthMismatch(
            f"{x.shape[0]} volumes but {labels.shape[0]} labels"
        )
    n = x.shape[0]
    params = net.params()
    state = nn.SgdState.zeros_like(params)
    log = TrainLog()
    best_val = np.nan
    for epoch in range(1, cfg.epochs + 1):
        order = rng.permutation(n)
        loss_sum = 0.0
        wrong = 0
        for lo in range(0, n, cfg.batch_size):
            sel = order[lo:lo + cfg.batch_size]
            xb, yb = x[sel], labels[sel]
            logits, cache = net.forward(xb, training=True, rng=rng)
            loss, probs, grad_logits = nn.softmax_cross_entropy(logits, yb)
            if not np.isfinite(loss):
                raise NumericError(f"loss diverged at epoch {epoch}")
            grads = net.backward(cache, grad_logits)
            nn.sgd_step(params, grads, state, cfg.learning_rate,
                        cfg.momentum, cfg.weight_decay)
            loss_sum += loss * len(sel)
            wrong += int((probs.argmax(axis=1) != yb).sum())
        val_err = np.nan
        if val_x is not None and len(val_x) > 0:
            val_probs = net.predict_probs(val_x, cfg.batch_size)
            val_err = float(
                (val_probs.argmax(axis=1) != np.asarray(val_labels)).mean()
            )
            best_val = val_err if np.isnan(best_val) else min(best_val, val_err)
        row = EpochStats(
            epoch=epoch,
            train_loss=loss_sum / n,
            train_err=wrong / n,
            val_err=val_err,
            best_val_err=best_val,
        )
        log.rows.append(row)
        if on_epoch is not None:
            on_epoch(row)
    return log


# --------------------------------------------------------------------------
# fusion
# --------------------------------------------------------------------------

def fuse_streams(probs_a: np.ndarray, probs_b: np.ndarray) -> np.ndarray:
    """Elementwise product of two probability arrays (not renormalized)."""
    a = np.asarray(probs_a, dtype=np.float64)
    b = np.asarray(probs_b, dtype=np.float64)
    if a.shape != b.shape:
        raise LengthMismatch(f"cannot fuse shapes {a.shape} and {b.shape}")
    return a * b


def fuse_levels(prob_list, mode: str = "product") -> np.ndarray:
    """Combine per-level class scores into one vector per sample."""
    if len(prob_list) == 0:
        raise EmptyInput("no level outputs to fuse")
    arrays = [np.asarray(p, dtype=np.float64) for p in prob_list]
    for p in arrays[1:]:
        if p.shape != arrays[0].shape:
            raise LengthMismatch("level outputs have mismatched shapes")
    stack = np.stack(arrays)
    if mode == "product":
        return np.prod(stack, axis=0)
    if mode == "mean":
        return stack.mean(axis=0)
    raise ConfigError(f"unknown level fusion mode {mode!r}")


def predict_label(probs: np.ndarray) -> int | np.ndarray:
    """Argmax over classes; ties resolve to the lowest class index."""
    probs = np.asarray(probs)
    if probs.ndim == 1:
        return int(probs.argmax())
    return probs.argmax(axis=-1)


# --------------------------------------------------------------------------
# two-stream and multi-level models
# --------------------------------------------------------------------------

class TwoStreamModel:
    """Independent spatial and temporal streams, fused by product."""

    def __init__(self, spatial: StreamNetwork, temporal: StreamNetwork):
        if spatial.config != temporal.config:
            raise ConfigError("stream configs must match")
        self.spatial = spatial
        self.temporal = temporal

    @classmethod
    def create(cls, config: StreamConfig, rng: np.random.Generator):
        return cls(StreamNetwork(config, rng), StreamNetwork(config, rng))

    def predict_probs(
        self,
        spatial_x: np.ndarray,
        temporal_x: np.ndarray,
        streams=STREAM_KINDS,
    ) -> np.ndarray:
        parts = []
        if KIND_SPATIAL in streams:
            parts.append(self.spatial.predict_probs(spatial_x))
        if KIND_TEMPORAL in streams:
            parts.append(self.temporal.predict_probs(temporal_x))
        if not parts:
            raise EmptyInput("no streams selected")
        fused = parts[0]
        for p in parts[1:]:
            fused = fuse_streams(fused, p)
        return fused


class MultiTemporalModel:
    """Two-stream models over temporal levels with product fusion.

    Level 0 covers the whole sequence; levels 1..3 cover its first, middle
    and last halves. Sequences shorter than 4 frames are scored by the
    level 0 model alone.
    """

    def __init__(
        self,
        stream_config: StreamConfig,
        encode_config: EncodeConfig,
        levels=ALL_LEVELS,
        level_fusion: str = "product",
        rng: np.random.Generator | None = None,
        models: dict | None = None,
    ):
        if stream_config.resolution != encode_config.resolution:
            raise ConfigError(
                f"stream resolution {stream_config.resolution} differs from "
                f"encode resolution {encode_config.resolution}"
            )
        levels = tuple(sorted(set(int(v) for v in levels)))
        if not levels or any(v not in ALL_LEVELS for v in levels):
            raise ConfigError(f"levels must be a nonempty subset of {ALL_LEVELS}")
        if 0 not in levels:
            raise ConfigError("level 0 is required (short-sequence fallback)")
        if level_fusion not in ("product", "mean"):
            raise ConfigError(f"unknown level fusion mode {level_fusion!r}")
        self.stream_config = stream_config
        self.encode_config = encode_config
        self.levels = levels
        self.level_fusion = level_fusion
        if models is None:
            if rng is None:
                raise ConfigError("need an rng to initialize stream weights")
            models = {
                lvl: TwoStreamModel.create(stream_config, rng) for lvl in levels
            }
        if set(models) != set(levels):
            raise ConfigError("models dict must cover exactly the chosen levels")
        self.models = models

    def _resolve_levels(self, seq: SkeletonSequence, levels) -> tuple:
        use_levels = self.levels if levels is None else tuple(sorted(set(levels)))
        for lvl in use_levels:
            if lvl not in self.models:
                raise ConfigError(f"model has no level {lvl}")
        if seq.num_frames < 4:
            return (0,)
        return use_levels

    def stream_level_probs(self, seq: SkeletonSequence, levels=None) -> dict:
        """Per-(level, stream kind) probability vectors for one sequence.

        Encodes each level once; useful for ablation reports that reuse
        the same sequence under several stream/level combinations.
        """
        out = {}
        for lvl in self._resolve_levels(seq, levels):
            sg, tg = encode_sequence(seq, self.encode_config, lvl)
            for kind, grid in ((KIND_SPATIAL, sg), (KIND_TEMPORAL, tg)):
                batch = volumes_to_batch([grid], self.stream_config.np_dtype)
                net = getattr(self.models[lvl], kind)
                out[(lvl, kind)] = net.predict_probs(batch)[0]
        return out

    def predict_probs_sequence(
        self,
        seq: SkeletonSequence,
        streams=STREAM_KINDS,
        levels=None,
    ) -> np.ndarray:
        """Fused class scores (K,) for one skeleton sequence."""
        use_levels = self._resolve_levels(seq, levels)
        by_key = self.stream_level_probs(seq, use_levels)
        per_level = []
        for lvl in use_levels:
            parts = [by_key[(lvl, k)] for k in STREAM_KINDS if k in streams]
            if not parts:
                raise EmptyInput("no streams selected")
            fused = parts[0]
            for p in parts[1:]:
                fused = fuse_streams(fused, p)
            per_level.append(fused)
        return fuse_levels(per_level, self.level_fusion)

    def predict(self, seq: SkeletonSequence, streams=STREAM_KINDS, levels=None) -> int:
        return predict_label(self.predict_probs_sequence(seq, streams, levels))


class RestrictedView:
    """Prediction adapter pinning a model to chosen streams and levels."""

    def __init__(self, model: MultiTemporalModel, streams=STREAM_KINDS, levels=None):
        self.model = model
        self.streams = streams
        self.levels = levels

    def predict(self, seq: SkeletonSequence) -> int:
        return self.model.predict(seq, self.streams, self.levels)


# --------------------------------------------------------------------------
# checkpoints
# --------------------------------------------------------------------------

def write_stream(net: StreamNetwork) -> bytes:
    """Serialize one stream: magic, version, JSON topology, raw arrays."""
    names = net.param_names()
    params = net.params()
    arrays = [
        {"name": n, "dtype": str(p.dtype), "shape": list(p.shape)}
        for n, p in zip(names, params)
    ]
    header = json.dumps(
        {"config": asdict(net.config), "arrays": arrays},
        sort_keys=True, separators=(",", ":"),
    ).encode("utf-8")
    out = bytearray()
    out += CHECKPOINT_MAGIC
    out += struct.pack("<H", CHECKPOINT_VERSION)
    out += struct.pack("<I", len(header))
    out += header
    for p in params:
        out += np.ascontiguousarray(p).astype(p.dtype.newbyteorder("<")).tobytes()
    return bytes(out)


def read_stream(data: bytes) -> StreamNetwork:
    if len(data) < 4 or data[:4] != CHECKPOINT_MAGIC:
        raise VersionMismatch("bad magic bytes for stream checkpoint")
    pos = 4
    def take(n: int) -> bytes:
        nonlocal pos
        if pos + n > len(data):
            raise TruncatedFile(f"checkpoint ends early at offset {pos}")
        chunk = data[pos:pos + n]
        pos += n
        return chunk
    (version,) = struct.unpack("<H", take(2))
    if version != CHECKPOINT_VERSION:
        raise VersionMismatch(f"unknown checkpoint version {version}")
    (header_len,) = struct.unpack("<I", take(4))
    try:
        header = json.loads(take(header_len).decode("utf-8"))
        config = StreamConfig(**header["config"])
        manifest = header["arrays"]
    except (ValueError, KeyError, TypeError, ConfigError) as exc:
        raise IncompatibleCheckpoint(f"bad checkpoint header: {exc}") from exc
    rng = np.random.default_rng(0)  # placeholder weights, overwritten below
    net = StreamNetwork(config, rng)
    params = net.params()
    names = net.param_names()
    if [m.get("name") for m in manifest] != names:
        raise IncompatibleCheckpoint(
            "checkpoint arrays do not match the declared architecture"
        )
    for meta, name, p in zip(manifest, names, params):
        shape = tuple(meta["shape"])
        dtype = np.dtype(meta["dtype"])
        if shape != p.shape or dtype != p.dtype:
            raise IncompatibleCheckpoint(
                f"array {name}: expected {p.dtype}{p.shape}, "
                f"checkpoint has {dtype}{shape}"
            )
        raw = take(int(np.prod(shape)) * dtype.itemsize)
        arr = np.frombuffer(raw, dtype=dtype.newbyteorder("<")).reshape(shape)
        if not np.all(np.isfinite(arr)):
            raise IncompatibleCheckpoint(f"non-finite values in array {name}")
        p[...] = arr
    if pos != len(data):
        raise IncompatibleCheckpoint("trailing bytes after checkpoint arrays")
    return net


def save_stream(net: StreamNetwork, path: str | Path) -> None:
    Path(path).write_bytes(write_stream(net))


def load_stream(path: str | Path) -> StreamNetwork:
    return read_stream(Path(path).read_bytes())


def save_model(model: MultiTemporalModel, directory: str | Path) -> None:
    """Write a checkpoint bundle: per-level stream files plus a manifest."""
    root = Path(directory)
    root.mkdir(parents=True, exist_ok=True)
    stream_paths = {}
    for lvl in model.levels:
        lvl_dir = root / f"level_{lvl}"
        lvl_dir.mkdir(exist_ok=True)
        pair = {}
        for kind in STREAM_KINDS:
            rel = f"level_{lvl}/{kind}.nnck"
            net = getattr(model.models[lvl], kind)
            save_stream(net, root / rel)
            pair[kind] = rel
        stream_paths[str(lvl)] = pair
    manifest = {
        "format_version": CHECKPOINT_VERSION,
        "num_classes": model.stream_config.num_classes,
        "levels": list(model.levels),
        "level_fusion": model.level_fusion,
        "encode": asdict(model.encode_config),
        "stream": asdict(model.stream_config),
        "streams": stream_paths,
    }
    (root / MANIFEST_NAME).write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n"
    )


def load_model(directory: str | Path) -> MultiTemporalModel:
    root = Path(directory)
    manifest_path = root / MANIFEST_NAME
    if not manifest_path.is_file():
        raise IncompatibleCheckpoint(f"no {MANIFEST_NAME} in {root}")
    try:
        manifest = json.loads(manifest_path.read_text())
    except ValueError as exc:
        raise IncompatibleCheckpoint(f"unreadable manifest: {exc}") from exc
    if manifest.get("format_version") != CHECKPOINT_VERSION:
        raise VersionMismatch(
            f"unknown bundle format version {manifest.get('format_version')}"
        )
    try:
        encode_cfg = EncodeConfig(**manifest["encode"])
        stream_cfg = StreamConfig(**manifest["stream"])
        levels = tuple(manifest["levels"])
        fusion = manifest["level_fusion"]
        stream_paths = manifest["streams"]
    except (KeyError, TypeError, ConfigError) as exc:
        raise IncompatibleCheckpoint(f"bad manifest: {exc}") from exc
    models = {}
    for lvl in levels:
        pair = {}
        for kind in STREAM_KINDS:
            try:
                rel = stream_paths[str(lvl)][kind]
            except KeyError as exc:
                raise IncompatibleCheckpoint(
                    f"manifest lists no {kind} stream for level {lvl}"
                ) from exc
            path = root / rel
            if not path.is_file():
                raise IncompatibleCheckpoint(f"missing checkpoint file {path}")
            net = load_stream(path)
            if net.config != stream_cfg:
                raise IncompatibleCheckpoint(
                    f"stream {rel} config disagrees with the manifest"
                )
            pair[kind] = net
        models[lvl] = TwoStreamModel(pair[KIND_SPATIAL], pair[KIND_TEMPORAL])
    return MultiTemporalModel(
        stream_cfg, encode_cfg, levels=levels, level_fusion=fusion, models=models
    )
