"""Command-line front end: encode, train, eval, inspect, gen.

Exit codes: 0 success, 1 user or input error (bad flags, unreadable or
malformed files, incompatible checkpoints), 2 internal or numeric error
(diverged loss, unexpected failures). Every command writes the resolved
run configuration as config.json into its output directory, and all
outputs are deterministic for a fixed seed.

Hyperparameters come from built-in defaults, overridden by an optional
JSON config file (--config), overridden by explicit flags.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
import traceback
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import evaluation, model, synthetic, volumes
from .errors import (
    ConfigError,
    IncompatibleCheckpoint,
    NumericError,
    VoxactError,
)
from .skeleton import load_skeleton_file, save_sequence
from .volumes import KIND_SPATIAL, KIND_TEMPORAL

_SKELETON_SUFFIXES = (".skq", ".csv", ".skeleton", ".txt")


# --------------------------------------------------------------------------
# run configuration
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class RunConfig:
    """All knobs shared across commands, serialized so runs are replayable."""

    resolution: int = 50
    bone_points: int = 10
    margin: float = 0.05
    dropout: float = 0.3
    learning_rate: float = 0.0005
    momentum: float = 0.9
    weight_decay: float = 1e-6
    batch_size: int = 32
    epochs: int = 250
    seed: int = 0
    deterministic: bool = True
    levels: tuple = (0, 1, 2, 3)
    level_fusion: str = "product"
    val_fraction: float = 0.2
    dtype: str = "float32"
    conv_method: str = "auto"
    normalize_view: bool = True

    def __post_init__(self):
        object.__setattr__(
            self, "levels", tuple(sorted(set(int(v) for v in self.levels)))
        )
        if self.learning_rate <= 0:
            raise ConfigError(f"learning_rate must be > 0, got {self.learning_rate}")
        if not 0.0 <= self.dropout < 1.0:
            raise ConfigError(f"dropout must be in [0, 1), got {self.dropout}")
        if self.batch_size < 1:
            raise ConfigError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.epochs < 0:
            raise ConfigError(f"epochs must be >= 0, got {self.epochs}")
        if not 0.0 <= self.val_fraction < 1.0:
            raise ConfigError(
                f"val_fraction must be in [0, 1), got {self.val_fraction}"
            )
        if any(lvl not in model.ALL_LEVELS for lvl in self.levels) or not self.levels:
            raise ConfigError(
                f"levels must be a nonempty subset of {model.ALL_LEVELS}"
            )
        if 0 not in self.levels:
            raise ConfigError("level 0 must be included")
        # Delegated range checks.
        self.encode_config()
        model.TrainConfig(
            epochs=self.epochs, batch_size=self.batch_size,
            learning_rate=self.learning_rate, momentum=self.momentum,
            weight_decay=self.weight_decay,
        )

    def encode_config(self) -> model.EncodeConfig:
        return model.EncodeConfig(
            resolution=self.resolution, margin=self.margin,
            bone_points=self.bone_points, normalize_view=self.normalize_view,
        )

    def stream_config(self, num_classes: int) -> model.StreamConfig:
        return model.StreamConfig(
            resolution=self.resolution, num_classes=num_classes,
            dropout=self.dropout, dtype=self.dtype, conv_method=self.conv_method,
        )

    def train_config(self) -> model.TrainConfig:
        return model.TrainConfig(
            epochs=self.epochs, batch_size=self.batch_size,
            learning_rate=self.learning_rate, momentum=self.momentum,
            weight_decay=self.weight_decay,
        )

    def to_json(self) -> str:
        d = dataclasses.asdict(self)
        d["levels"] = list(self.levels)
        return json.dumps(d, indent=2, sort_keys=True) + "\n"


_CONFIG_FIELDS = {f.name for f in dataclasses.fields(RunConfig)}


def build_run_config(args: argparse.Namespace) -> RunConfig:
    """Defaults, then config file entries, then explicit flags."""
    values: dict = {}
    config_path = getattr(args, "config", None)
    if config_path:
        try:
            loaded = json.loads(Path(config_path).read_text())
        except ValueError as exc:
            raise ConfigError(f"config file {config_path}: {exc}") from exc
        if not isinstance(loaded, dict):
            raise ConfigError(f"config file {config_path} must hold a JSON object")
        unknown = set(loaded) - _CONFIG_FIELDS
        if unknown:
            raise ConfigError(
                f"config file {config_path}: unknown keys {sorted(unknown)}"
            )
        values.update(loaded)
    for name in _CONFIG_FIELDS:
        flag_value = getattr(args, name, None)
        if flag_value is not None:
            values[name] = flag_value
    try:
        return RunConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def _parse_levels(text: str) -> tuple:
    try:
        return tuple(int(part) for part in text.split(",") if part.strip() != "")
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad level list {text!r}") from None


def _parse_id_list(text: str) -> tuple:
    try:
        return tuple(int(part) for part in text.split(",") if part.strip() != "")
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad id list {text!r}") from None


# --------------------------------------------------------------------------
# shared helpers
# --------------------------------------------------------------------------

def _write_config(out_dir: Path, cfg: RunConfig) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "config.json").write_text(cfg.to_json())


def _iter_skeleton_files(paths) -> list[Path]:
    files: list[Path] = []
    for raw in paths:
        p = Path(raw)
        if p.is_dir():
            found = sorted(
                f for f in p.iterdir()
                if f.is_file() and f.suffix.lower() in _SKELETON_SUFFIXES
            )
            if not found:
                raise VoxactError(f"no skeleton files under {p}")
            files.extend(found)
        elif p.is_file():
            files.append(p)
        else:
            raise VoxactError(f"no such file or directory: {p}")
    return files


def _load_dataset(paths):
    """Load skeleton files; returns parallel lists (stems, sequences)."""
    stems, seqs = [], []
    for path in _iter_skeleton_files(paths):
        try:
            seqs.append(load_skeleton_file(path))
        except (VoxactError, OSError) as exc:
            raise VoxactError(f"{path}: {exc}") from exc
        stems.append(path.stem)
    return stems, seqs


def _num_classes(seqs) -> int:
    labels = [s.label for s in seqs]
    if any(lab is None for lab in labels):
        raise VoxactError("dataset contains sequences without labels")
    return max(labels) + 1


def _apply_split(stems, seqs, split_name, train_subjects=None, test_cameras=None):
    """Returns ((train_stems, train_seqs), (test_stems, test_seqs))."""
    if split_name == "none":
        return (stems, seqs), ([], [])
    pairs = list(zip(stems, seqs))
    by_id = {id(s): st for st, s in pairs}
    if split_name == "cross-subject":
        kwargs = {}
        if train_subjects is not None:
            kwargs["train_subjects"] = train_subjects
        train, test = evaluation.split_cross_subject(seqs, **kwargs)
    elif split_name == "cross-view":
        kwargs = {}
        if test_cameras is not None:
            kwargs["test_cameras"] = test_cameras
        train, test = evaluation.split_cross_view(seqs, **kwargs)
    elif split_name == "subject-lists":
        train, test = evaluation.split_subject_lists(seqs)
    else:
        raise ConfigError(f"unknown split {split_name!r}")
    return (
        ([by_id[id(s)] for s in train], train),
        ([by_id[id(s)] for s in test], test),
    )


def _volume_filename(stem: str, level: int, kind: str) -> str:
    return f"{stem}_L{level}_{kind}.vox"


# --------------------------------------------------------------------------
# gen
# --------------------------------------------------------------------------

def cmd_gen(args) -> int:
    cfg = build_run_config(args)
    out_dir = Path(args.out)
    _write_config(out_dir, cfg)
    kinds = [synthetic.parse_kind(k) for k in args.kinds.split(",")]
    halves = {"none": [None], "first": ["first"], "last": ["last"],
              "both": ["first", "last"]}[args.half]
    classes = [(kind, half) for kind in kinds for half in halves]
    entries = []
    label_rows = []
    for label, (kind, half) in enumerate(classes):
        tag = kind.name.lower() + (f"_{half}" if half else "")
        label_rows.append({"label": label, "kind": kind.name.lower(), "half": half})
        for i in range(args.count):
            seed = cfg.seed + label * args.count + i
            if half is None:
                seq = synthetic.gen_synthetic(
                    kind, args.frames, seed, args.noise, label=label
                )
            else:
                seq = synthetic.gen_half_motion(
                    kind, args.frames, half, seed, args.noise, label=label
                )
            name = f"{label:02d}_{tag}_{i:04d}.skq"
            save_sequence(seq, out_dir / name)
            entries.append({
                "path": name, "label": label, "frames": seq.num_frames,
                "subject_id": seq.subject_id, "camera_id": seq.camera_id,
            })
    manifest = {"classes": label_rows, "files": entries}
    (out_dir / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n"
    )
    print(f"wrote {len(entries)} sequences in {len(classes)} classes to {out_dir}")
    return 0


# --------------------------------------------------------------------------
# encode
# --------------------------------------------------------------------------

def _encode_to_dir(stems, seqs, cfg: RunConfig, out_dir: Path) -> list[dict]:
    encode_cfg = cfg.encode_config()
    entries = []
    for stem, seq in zip(stems, seqs):
        for level in cfg.levels:
            try:
                sg, tg = model.encode_sequence(seq, encode_cfg, level)
            except VoxactError as exc:
                raise VoxactError(f"{stem} level {level}: {exc}") from exc
            names = {}
            for kind, grid in ((KIND_SPATIAL, sg), (KIND_TEMPORAL, tg)):
                name = _volume_filename(stem, level, kind)
                volumes.save_volume(grid, out_dir / name)
                names[kind] = name
            entries.append({
                "source": stem, "level": level, "label": seq.label,
                "spatial": names[KIND_SPATIAL], "temporal": names[KIND_TEMPORAL],
            })
    return entries


def cmd_encode(args) -> int:
    cfg = build_run_config(args)
    out_dir = Path(args.out)
    _write_config(out_dir, cfg)
    stems, seqs = _load_dataset(args.inputs)
    entries = _encode_to_dir(stems, seqs, cfg, out_dir)
    (out_dir / "manifest.json").write_text(
        json.dumps({"volumes": entries}, indent=2, sort_keys=True) + "\n"
    )
    print(f"encoded {len(seqs)} sequences x {len(cfg.levels)} levels to {out_dir}")
    return 0


# --------------------------------------------------------------------------
# train
# --------------------------------------------------------------------------

def _load_cached_volumes(volume_dir: Path, stems, level: int, kind: str):
    grids = []
    for stem in stems:
        path = volume_dir / _volume_filename(stem, level, kind)
        if not path.is_file():
            raise VoxactError(f"missing cached volume {path}")
        grids.append(volumes.load_volume(path))
    return grids


def _volumes_for(
    stems, seqs, level: int, kind: str, cfg: RunConfig, cache_dir: Path | None
):
    """Voxel grids for one (level, stream) pair, from cache when available."""
    if cache_dir is not None:
        return _load_cached_volumes(cache_dir, stems, level, kind)
    encode_cfg = cfg.encode_config()
    grids = []
    for stem, seq in zip(stems, seqs):
        sg, tg = model.encode_sequence(seq, encode_cfg, level)
        grids.append(sg if kind == KIND_SPATIAL else tg)
    return grids


def cmd_train(args) -> int:
    cfg = build_run_config(args)
    out_dir = Path(args.out)
    _write_config(out_dir, cfg)
    stems, seqs = _load_dataset([args.data])
    (train_stems, train_seqs), _ = _apply_split(
        stems, seqs, args.split, args.train_subjects, args.test_cameras
    )
    if not train_seqs:
        raise VoxactError("split left no training sequences")
    num_classes = _num_classes(seqs)
    stream_cfg = cfg.stream_config(num_classes)
    train_cfg = cfg.train_config()

    root_ss = np.random.SeedSequence(cfg.seed)
    val_ss, *stream_ss = root_ss.spawn(1 + 2 * len(cfg.levels) * 2)
    stream_ss = iter(stream_ss)

    labels = np.asarray([s.label for s in train_seqs], dtype=np.int64)
    if cfg.val_fraction > 0:
        tr_idx, val_idx = evaluation.validation_split(
            len(train_seqs), cfg.val_fraction,
            np.random.Generator(np.random.PCG64(val_ss)),
        )
    else:
        tr_idx, val_idx = np.arange(len(train_seqs)), np.array([], dtype=np.int64)

    cache_dir = Path(args.volumes) if args.volumes else None
    write_cache = cache_dir is None and not args.no_volume_cache
    if write_cache:
        vol_dir = out_dir / "volumes"
        vol_dir.mkdir(parents=True, exist_ok=True)
        entries = _encode_to_dir(train_stems, train_seqs, cfg, vol_dir)
        (vol_dir / "manifest.json").write_text(
            json.dumps({"volumes": entries}, indent=2, sort_keys=True) + "\n"
        )
        cache_dir = vol_dir

    nets: dict[int, dict[str, model.StreamNetwork]] = {}
    for level in cfg.levels:
        nets[level] = {}
        for kind in (KIND_SPATIAL, KIND_TEMPORAL):
            init_rng = np.random.Generator(np.random.PCG64(next(stream_ss)))
            train_rng = np.random.Generator(np.random.PCG64(next(stream_ss)))
            grids = _volumes_for(train_stems, train_seqs, level, kind, cfg, cache_dir)
            x = model.volumes_to_batch(grids, stream_cfg.np_dtype)
            net = model.StreamNetwork(stream_cfg, init_rng)
            val_x = x[val_idx] if len(val_idx) else None
            val_y = labels[val_idx] if len(val_idx) else None
            log = model.train_stream(
                net, x[tr_idx], labels[tr_idx], train_cfg, train_rng,
                val_x, val_y,
            )
            csv_path = out_dir / f"loss_level{level}_{kind}.csv"
            csv_path.write_text(log.to_csv())
            nets[level][kind] = net
            last = log.rows[-1] if log.rows else None
            status = (
                f"train_err {last.train_err:.4f} val_err {last.val_err:.4f}"
                if last else "no epochs"
            )
            print(f"level {level} {kind}: {status}")

    mtm = model.MultiTemporalModel(
        stream_cfg, cfg.encode_config(), levels=cfg.levels,
        level_fusion=cfg.level_fusion,
        models={
            lvl: model.TwoStreamModel(pair[KIND_SPATIAL], pair[KIND_TEMPORAL])
            for lvl, pair in nets.items()
        },
    )
    model.save_model(mtm, out_dir / "checkpoint")
    print(f"checkpoint bundle written to {out_dir / 'checkpoint'}")
    return 0


# --------------------------------------------------------------------------
# eval
# --------------------------------------------------------------------------

def _ablation_rows(mtm: model.MultiTemporalModel, seqs, labels, mode: str):
    """(name, accuracy) rows sharing one encoding pass per sequence."""
    per_seq = [mtm.stream_level_probs(s) for s in seqs]
    rows = []

    def accuracy(selector) -> float:
        correct = 0
        for probs_by_key, label in zip(per_seq, labels):
            fused = selector(probs_by_key)
            correct += int(model.predict_label(fused) == label)
        return correct / len(labels)

    def fuse(probs_by_key, streams, levels):
        avail = [lvl for lvl in levels if any(k[0] == lvl for k in probs_by_key)]
        use = avail if avail else [0]
        per_level = []
        for lvl in use:
            parts = [
                probs_by_key[(lvl, kind)]
                for kind in (KIND_SPATIAL, KIND_TEMPORAL) if kind in streams
            ]
            fused = parts[0]
            for p in parts[1:]:
                fused = model.fuse_streams(fused, p)
            per_level.append(fused)
        return model.fuse_levels(per_level, mtm.level_fusion)

    if mode == "fused":
        for name, streams in (
            ("spatial", (KIND_SPATIAL,)),
            ("temporal", (KIND_TEMPORAL,)),
            ("two-stream", (KIND_SPATIAL, KIND_TEMPORAL)),
        ):
            rows.append((name, accuracy(lambda pk, s=streams: fuse(pk, s, mtm.levels))))
    elif mode == "levels":
        both = (KIND_SPATIAL, KIND_TEMPORAL)
        for lvl in mtm.levels:
            rows.append((
                f"level {lvl}",
                accuracy(lambda pk, l=lvl: fuse(pk, both, (l,))),
            ))
        joint = "+".join(str(v) for v in mtm.levels)
        rows.append((f"level {joint}", accuracy(lambda pk: fuse(pk, both, mtm.levels))))
    else:
        raise ConfigError(f"unknown eval mode {mode!r}")
    return rows


def cmd_eval(args) -> int:
    cfg = build_run_config(args)
    out_dir = Path(args.out)
    _write_config(out_dir, cfg)
    mtm = model.load_model(args.checkpoint)
    stems, seqs = _load_dataset([args.data])
    _, (test_stems, test_seqs) = _apply_split(
        stems, seqs, args.split, args.train_subjects, args.test_cameras
    )
    if args.split == "none":
        test_seqs = seqs
    if not test_seqs:
        raise VoxactError("split left no test sequences")
    k = mtm.stream_config.num_classes
    for s in test_seqs:
        if s.label is None:
            raise VoxactError("dataset contains sequences without labels")
        if not 0 <= s.label < k:
            raise IncompatibleCheckpoint(
                f"dataset label {s.label} outside checkpoint classes 0..{k - 1}"
            )
    labels = [s.label for s in test_seqs]
    rows = _ablation_rows(mtm, test_seqs, labels, args.mode)
    report = evaluation.evaluate(mtm, test_seqs, k)
    lines = [f"{name}: {acc:.4f}" for name, acc in rows]
    text = report.summary() + "\n".join(lines) + "\n"
    (out_dir / "report.txt").write_text(text)
    (out_dir / "rows.csv").write_text(
        "mode,accuracy\n"
        + "".join(f"{name},{acc!r}\n" for name, acc in rows)
    )
    (out_dir / "confusion.csv").write_text(report.confusion_csv())
    print(text, end="")
    return 0


# --------------------------------------------------------------------------
# inspect
# --------------------------------------------------------------------------

def cmd_inspect(args) -> int:
    cfg = build_run_config(args)
    out_dir = Path(args.out)
    _write_config(out_dir, cfg)
    grid = volumes.load_volume(args.volume)
    stem = Path(args.volume).stem
    if args.project:
        plane = volumes.max_projection(grid, args.plane)
        tag = f"{args.plane}proj"
    else:
        plane = volumes.volume_slice(grid, args.plane, args.index)
        tag = f"{args.plane}{args.index}"
    pgm_path = out_dir / f"{stem}_{tag}.pgm"
    csv_path = out_dir / f"{stem}_{tag}.csv"
    pgm_path.write_bytes(volumes.to_pgm_bytes(plane))
    csv_path.write_text(volumes.plane_to_csv(plane))
    occupied = float((grid.values > 0).mean())
    print(
        f"{args.volume}: kind={grid.kind} R={grid.resolution} "
        f"occupied={occupied:.4f} value range "
        f"[{grid.values.min():.4f}, {grid.values.max():.4f}]"
    )
    print(f"wrote {pgm_path} and {csv_path}")
    return 0


# --------------------------------------------------------------------------
# argument parsing
# --------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    """argparse that exits 1 (not 2) on usage errors; 2 means internal."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _add_common_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("run configuration")
    g.add_argument("--config", help="JSON config file; flags override it")
    g.add_argument("--resolution", type=int, help="voxel grid resolution per axis")
    g.add_argument("--bone-points", dest="bone_points", type=int,
                   help="interpolated points per bone")
    g.add_argument("--margin", type=float, help="bounding cube margin fraction")
    g.add_argument("--dropout", type=float, help="dropout probability")
    g.add_argument("--lr", dest="learning_rate", type=float, help="learning rate")
    g.add_argument("--momentum", type=float)
    g.add_argument("--weight-decay", dest="weight_decay", type=float)
    g.add_argument("--batch-size", dest="batch_size", type=int)
    g.add_argument("--epochs", type=int)
    g.add_argument("--seed", type=int)
    g.add_argument("--deterministic", dest="deterministic",
                   action="store_const", const=True,
                   help="force sequential execution (always on in this build)")
    g.add_argument("--levels", type=_parse_levels,
                   help="comma-separated temporal levels, e.g. 0,1,2,3")
    g.add_argument("--level-fusion", dest="level_fusion",
                   choices=("product", "mean"))
    g.add_argument("--val-fraction", dest="val_fraction", type=float)
    g.add_argument("--dtype", choices=("float32", "float64"))
    g.add_argument("--conv-method", dest="conv_method",
                   choices=("auto", "im2col", "fft"))
    g.add_argument("--no-view-normalize", dest="normalize_view",
                   action="store_const", const=False,
                   help="skip view normalization during encoding")


def _add_split_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--split", default="none",
                   choices=("none", "cross-subject", "cross-view", "subject-lists"))
    p.add_argument("--train-subjects", type=_parse_id_list, default=None,
                   help="override cross-subject training ids, e.g. 1,2,4")
    p.add_argument("--test-cameras", type=_parse_id_list, default=None,
                   help="override cross-view test cameras, e.g. 1")


def build_parser() -> _Parser:
    parser = _Parser(prog="voxact",
                     description="Voxel two-stream action recognition pipeline")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("gen", help="generate labeled synthetic sequences")
    p.add_argument("--out", required=True)
    p.add_argument("--kinds", default=",".join(k.name.lower() for k in synthetic.MotionKind),
                   help="comma-separated motion kinds")
    p.add_argument("--count", type=int, default=10, help="sequences per class")
    p.add_argument("--frames", type=int, default=20)
    p.add_argument("--noise", type=float, default=0.0, help="joint jitter stddev")
    p.add_argument("--half", choices=("none", "first", "last", "both"),
                   default="none", help="confine the motion to one half")
    _add_common_flags(p)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("encode", help="encode skeleton files into voxel volumes")
    p.add_argument("inputs", nargs="+", help="skeleton files or directories")
    p.add_argument("--out", required=True)
    _add_common_flags(p)
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("train", help="train the per-level two-stream networks")
    p.add_argument("--data", required=True, help="directory of skeleton files")
    p.add_argument("--out", required=True)
    p.add_argument("--volumes", default=None,
                   help="reuse cached volumes from a previous encode/train run")
    p.add_argument("--no-volume-cache", action="store_true",
                   help="do not write encoded volumes into the output directory")
    _add_split_flags(p)
    _add_common_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate a checkpoint bundle")
    p.add_argument("--checkpoint", required=True, help="checkpoint bundle directory")
    p.add_argument("--data", required=True, help="directory of skeleton files")
    p.add_argument("--out", required=True)
    p.add_argument("--mode", choices=("fused", "levels"), default="fused",
                   help="ablation rows: stream fusion or level fusion")
    _add_split_flags(p)
    _add_common_flags(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("inspect", help="export a volume slice or projection")
    p.add_argument("--volume", required=True, help="volume file (.vox)")
    p.add_argument("--plane", choices=("x", "y", "z"), default="z")
    p.add_argument("--index", type=int, default=0)
    p.add_argument("--project", action="store_true",
                   help="max projection instead of a single slice")
    p.add_argument("--out", default=".")
    _add_common_flags(p)
    p.set_defaults(func=cmd_inspect)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except NumericError as exc:
        print(f"voxact: numeric error: {exc}", file=sys.stderr)
        return 2
    except (VoxactError, OSError) as exc:
        print(f"voxact: error: {exc}", file=sys.stderr)
        return 1
    except Exception:
        traceback.print_exc()
        return 2


if __name__ == "__main__":
    sys.exit(main())
