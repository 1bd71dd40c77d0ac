"""Skeleton-based action recognition over voxelized joint trajectories.

Pipeline: parse skeleton sequences (depth-camera text, CSV, or the
package's binary format), center and view-normalize them, densify bones
into point clouds, rasterize each temporal level into paired spatial and
temporal voxel volumes, classify each volume kind with its own 3D CNN,
and fuse stream and level probabilities by elementwise product.
"""

from .errors import (
    ClassMissing,
    ConfigError,
    EmptyDataset,
    EmptyInput,
    EmptyPartition,
    EmptySequence,
    IncompatibleCheckpoint,
    IndexOutOfRange,
    InvalidParams,
    InvalidProbability,
    InvalidTarget,
    LengthMismatch,
    MalformedFile,
    MissingJoint,
    MissingMetadata,
    NumericError,
    OutOfBounds,
    SequenceTooShort,
    ShapeMismatch,
    TooFewSamples,
    TruncatedFile,
    VersionMismatch,
    VoxactError,
)
from .evaluation import (
    EvalReport,
    evaluate,
    split_cross_subject,
    split_cross_view,
    split_subject_lists,
    validation_split,
)
from .model import (
    EncodeConfig,
    MultiTemporalModel,
    RestrictedView,
    StreamConfig,
    StreamNetwork,
    TrainConfig,
    TrainLog,
    TwoStreamModel,
    encode_sequence,
    fuse_levels,
    fuse_streams,
    load_model,
    load_stream,
    predict_label,
    save_model,
    save_stream,
    train_stream,
    volumes_to_batch,
)
from .preprocess import (
    BONE_EDGES,
    PointCloudSequence,
    RigidTransform,
    center_on_hip,
    compute_view_transform,
    interpolate_bones,
    temporal_subsequence,
    view_normalize,
)
from .skeleton import (
    Joint,
    SkeletonFrame,
    SkeletonSequence,
    frames_from_array,
    load_sequence,
    load_skeleton_file,
    parse_csv_sequence,
    parse_ntu_skeleton,
    read_sequence,
    save_sequence,
    write_sequence,
)
from .synthetic import (
    MotionKind,
    gen_half_motion,
    gen_synthetic,
    make_reversed_pairs,
)
from .volumes import (
    GridBounds,
    VoxelGrid,
    encode_spatial,
    encode_temporal,
    fit_bounds,
    load_volume,
    max_projection,
    point_to_voxel,
    save_volume,
    volume_slice,
)

__version__ = "0.1.0"
