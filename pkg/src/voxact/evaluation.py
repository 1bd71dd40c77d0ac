"""Dataset split protocols and classifier evaluation.

Split protocols operate on sequence metadata:

* cross-subject: a fixed list of training subject ids; every other
  subject tests. The default list is the standard 20-subject protocol
  for the large lab-captured corpus.
* cross-view: camera 1 tests, the remaining cameras train.
* paired subject lists: explicit train and test subject ids; subjects in
  neither list are excluded (used for the smaller home-environment corpus).

Evaluation reports overall accuracy, per-class accuracy, and a
row-normalized confusion matrix (rows = true class; rows with no test
samples stay all zero).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    EmptyDataset,
    EmptyPartition,
    InvalidTarget,
    MissingMetadata,
    TooFewSamples,
)

NTU_CROSS_SUBJECT_TRAIN = frozenset(
    {1, 2, 4, 5, 8, 9, 13, 14, 15, 16, 17, 18, 19, 25, 27, 28, 31, 34, 35, 38}
)
CROSS_VIEW_TEST_CAMERAS = frozenset({1})
SMARTHOME_TRAIN_SUBJECTS = frozenset({1, 3, 5, 7, 9})
SMARTHOME_TEST_SUBJECTS = frozenset({2, 4, 6, 8})


def _require(seqs, attr: str):
    for i, s in enumerate(seqs):
        if getattr(s, attr) is None:
            raise MissingMetadata(f"sequence {i} has no {attr}")


def _check_partitions(train, test, what: str):
    if not train:
        raise EmptyPartition(f"no training sequences under the {what} split")
    if not test:
        raise EmptyPartition(f"no test sequences under the {what} split")
    return train, test


def split_cross_subject(seqs, train_subjects=NTU_CROSS_SUBJECT_TRAIN):
    """Train on the listed subject ids, test on all others."""
    seqs = list(seqs)
    if not seqs:
        raise EmptyDataset("no sequences to split")
    _require(seqs, "subject_id")
    train_subjects = frozenset(train_subjects)
    train = [s for s in seqs if s.subject_id in train_subjects]
    test = [s for s in seqs if s.subject_id not in train_subjects]
    return _check_partitions(train, test, "cross-subject")


def split_cross_view(seqs, test_cameras=CROSS_VIEW_TEST_CAMERAS):
    """Test on the listed camera ids, train on all others."""
    seqs = list(seqs)
    if not seqs:
        raise EmptyDataset("no sequences to split")
    _require(seqs, "camera_id")
    test_cameras = frozenset(test_cameras)
    train = [s for s in seqs if s.camera_id not in test_cameras]
    test = [s for s in seqs if s.camera_id in test_cameras]
    return _check_partitions(train, test, "cross-view")


def split_subject_lists(
    seqs,
    train_subjects=SMARTHOME_TRAIN_SUBJECTS,
    test_subjects=SMARTHOME_TEST_SUBJECTS,
):
    """Explicit subject lists; subjects in neither list are dropped."""
    train_subjects = frozenset(train_subjects)
    test_subjects = frozenset(test_subjects)
    overlap = train_subjects & test_subjects
    if overlap:
        raise ValueError(f"subjects {sorted(overlap)} appear in both lists")
    seqs = list(seqs)
    if not seqs:
        raise EmptyDataset("no sequences to split")
    _require(seqs, "subject_id")
    train = [s for s in seqs if s.subject_id in train_subjects]
    test = [s for s in seqs if s.subject_id in test_subjects]
    return _check_partitions(train, test, "subject-list")


SPLIT_PROTOCOLS = {
    "cross-subject": split_cross_subject,
    "cross-view": split_cross_view,
    "subject-lists": split_subject_lists,
}


def validation_split(num_items: int, fraction: float, rng: np.random.Generator):
    """Random (train_indices, val_indices); |val| = round(fraction * n)."""
    if not 0.0 <= fraction <= 1.0:
        raise ValueError(f"fraction must be in [0, 1], got {fraction}")
    if num_items <= 0:
        raise EmptyDataset("nothing to split")
    n_val = int(round(fraction * num_items))
    if n_val == 0 or n_val == num_items:
        raise TooFewSamples(
            f"validation fraction {fraction} leaves {n_val} of "
            f"{num_items} samples for validation"
        )
    order = rng.permutation(num_items)
    return np.sort(order[n_val:]), np.sort(order[:n_val])


@dataclass
class EvalReport:
    num_classes: int
    labels: np.ndarray         # (N,) true classes
    predictions: np.ndarray    # (N,) predicted classes
    counts: np.ndarray         # (K, K) raw confusion counts, rows = true

    @property
    def accuracy(self) -> float:
        return float((self.labels == self.predictions).mean())

    @property
    def per_class_accuracy(self) -> np.ndarray:
        totals = self.counts.sum(axis=1)
        correct = np.diag(self.counts)
        out = np.zeros(self.num_classes, dtype=np.float64)
        nonzero = totals > 0
        out[nonzero] = correct[nonzero] / totals[nonzero]
        return out

    @property
    def confusion(self) -> np.ndarray:
        """Row-normalized confusion; rows without samples stay zero."""
        totals = self.counts.sum(axis=1, keepdims=True)
        with np.errstate(invalid="ignore"):
            norm = np.where(totals > 0, self.counts / np.maximum(totals, 1), 0.0)
        return norm

    def summary(self) -> str:
        lines = [
            f"samples: {len(self.labels)}",
            f"accuracy: {self.accuracy:.4f}",
        ]
        per_class = self.per_class_accuracy
        totals = self.counts.sum(axis=1)
        for k in range(self.num_classes):
            lines.append(
                f"class {k}: n={int(totals[k])} acc={per_class[k]:.4f}"
            )
        return "\n".join(lines) + "\n"

    def confusion_csv(self) -> str:
        rows = [",".join(repr(float(v)) for v in row) for row in self.confusion]
        return "\n".join(rows) + "\n"


def evaluate(model, sequences, num_classes: int) -> EvalReport:
    """Score ``model.predict(seq)`` against each sequence's label."""
    sequences = list(sequences)
    if not sequences:
        raise EmptyDataset("no sequences to evaluate")
    labels = []
    for i, s in enumerate(sequences):
        if s.label is None:
            raise MissingMetadata(f"sequence {i} has no label")
        if not 0 <= s.label < num_classes:
            raise InvalidTarget(
                f"label {s.label} outside 0..{num_classes - 1}"
            )
        labels.append(s.label)
    labels = np.asarray(labels, dtype=np.int64)
    preds = np.asarray([int(model.predict(s)) for s in sequences], dtype=np.int64)
    counts = np.zeros((num_classes, num_classes), dtype=np.int64)
    np.add.at(counts, (labels, preds), 1)
    return EvalReport(
        num_classes=num_classes, labels=labels, predictions=preds, counts=counts
    )
