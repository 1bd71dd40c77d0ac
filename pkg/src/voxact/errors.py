"""Typed errors raised across the package.

Every failure mode that user input can trigger maps to one of these classes,
so callers (and the CLI) can distinguish bad input (exit code 1) from internal
numeric trouble (exit code 2).
"""


class VoxactError(Exception):
    """Base class for all errors raised by this package."""


# --- input / parsing ------------------------------------------------------

class MalformedFile(VoxactError):
    """Input text or bytes do not conform to the documented layout."""


class EmptySequence(VoxactError):
    """A parsed skeleton file yielded zero usable frames."""


class MissingJoint(VoxactError):
    """A CSV frame lacks one or more of the 25 required joints."""


class TruncatedFile(VoxactError):
    """A binary stream ended before the declared payload was complete."""


class VersionMismatch(VoxactError):
    """A binary stream carries an unknown magic tag or format version."""


# --- geometry / encoding --------------------------------------------------

class SequenceTooShort(VoxactError):
    """Temporal slicing of levels 1..3 needs at least 4 frames."""


class EmptyInput(VoxactError):
    """An operation that needs at least one point received none."""


class OutOfBounds(VoxactError):
    """A point lies outside the voxel grid cube."""


class IndexOutOfRange(VoxactError):
    """A slice index is outside 0..R-1."""


# --- network / numerics ---------------------------------------------------

class ShapeMismatch(VoxactError):
    """Tensor shapes are inconsistent with the operation's contract."""


class LengthMismatch(ShapeMismatch):
    """Vectors being fused have different lengths."""


class InvalidProbability(VoxactError):
    """A probability parameter is outside its valid range."""


class InvalidTarget(VoxactError):
    """A class target is outside 0..K-1."""


class NumericError(VoxactError):
    """A forward/backward pass or loss produced NaN or Inf."""


class ConfigError(VoxactError):
    """A configuration value is out of range or internally inconsistent."""


class IncompatibleCheckpoint(VoxactError):
    """A checkpoint bundle does not match the requested dataset or config."""


# --- datasets / evaluation ------------------------------------------------

class EmptyDataset(VoxactError):
    """A training set is empty."""


class ClassMissing(VoxactError):
    """A training set lacks samples for one or more classes."""


class MissingMetadata(VoxactError):
    """A sample lacks the subject/camera id its split protocol needs."""


class EmptyPartition(VoxactError):
    """A dataset split produced an empty train or test side."""


class TooFewSamples(VoxactError):
    """A validation split cannot produce two nonempty parts."""


class InvalidParams(VoxactError):
    """Synthetic generator parameters are out of range."""
