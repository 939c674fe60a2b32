"""Core series/dataset containers, window cutting, and leakage-safe folds.

Full-length traces are cut into fixed-length overlapping windows.  To keep
overlapping windows of one trace from straddling the train/test boundary,
fold assignment happens on whole traces (by ``source_id``) before cutting.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

UNLABELED = -1


@dataclass(frozen=True)
class Series:
    """One univariate real-valued sequence with an optional class label.

    ``source_id`` identifies the full-length trace the values came from;
    windows cut from a trace inherit it.
    """

    values: np.ndarray
    label: int | None = None
    source_id: str = ""

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 1:
            raise ValueError(f"series values must be 1-D, got shape {values.shape}")
        if values.size == 0:
            raise ValueError("series values must be non-empty")
        if not np.all(np.isfinite(values)):
            raise ValueError("series values must all be finite")
        values = values.copy()
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        if self.label is not None:
            if int(self.label) < 0:
                raise ValueError(f"label must be >= 0 or None, got {self.label}")
            object.__setattr__(self, "label", int(self.label))

    def __len__(self) -> int:
        return int(self.values.shape[0])


@dataclass(frozen=True)
class Dataset:
    """Ordered collection of fixed-length windows plus class metadata.

    Every member series must have length exactly ``window_length``; labels,
    when present, must lie in ``[0, num_classes)``.
    """

    series: tuple[Series, ...]
    num_classes: int
    window_length: int
    _matrix: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "series", tuple(self.series))
        if not self.series:
            raise ValueError("dataset must contain at least one window")
        if self.window_length < 1:
            raise ValueError("window_length must be positive")
        if self.num_classes < 1:
            raise ValueError("num_classes must be positive")
        for s in self.series:
            if len(s) != self.window_length:
                raise ValueError(
                    f"window from {s.source_id!r} has length {len(s)}, "
                    f"expected {self.window_length}"
                )
            if s.label is not None and s.label >= self.num_classes:
                raise ValueError(
                    f"label {s.label} out of range for {self.num_classes} classes"
                )
        matrix = np.stack([s.values for s in self.series])
        matrix.setflags(write=False)
        object.__setattr__(self, "_matrix", matrix)

    @classmethod
    def from_windows(cls, windows: Iterable[Series], num_classes: int | None = None) -> "Dataset":
        windows = tuple(windows)
        if not windows:
            raise ValueError("no windows given")
        if num_classes is None:
            labels = [w.label for w in windows if w.label is not None]
            if not labels:
                raise ValueError("cannot infer num_classes from unlabeled windows")
            num_classes = 1 + max(labels)
        return cls(windows, num_classes, len(windows[0]))

    def __len__(self) -> int:
        return len(self.series)

    @property
    def matrix(self) -> np.ndarray:
        """All windows stacked as a read-only (n_windows, window_length) array."""
        return self._matrix

    def labels(self) -> np.ndarray:
        """Label per window as int array, UNLABELED (-1) where absent."""
        return np.array(
            [UNLABELED if s.label is None else s.label for s in self.series],
            dtype=np.int64,
        )

    def source_ids(self) -> list[str]:
        return [s.source_id for s in self.series]


@dataclass(frozen=True)
class FoldPlan:
    """Trace-level fold assignment; fold test ``i`` holds out folds ``i`` and
    ``(i+1) mod num_folds``."""

    num_folds: int
    assignment: Mapping[str, int]

    def __post_init__(self):
        if self.num_folds < 2:
            raise ValueError("num_folds must be >= 2")
        assignment = dict(self.assignment)
        for sid, fold in assignment.items():
            if not 0 <= fold < self.num_folds:
                raise ValueError(f"fold {fold} for {sid!r} out of range")
        object.__setattr__(self, "assignment", assignment)

    def test_pair(self, fold_test: int) -> tuple[int, int]:
        if not 0 <= fold_test < self.num_folds:
            raise ValueError(f"fold_test {fold_test} out of range")
        return fold_test, (fold_test + 1) % self.num_folds

    def fold_of(self, source_id: str) -> int:
        try:
            return self.assignment[source_id]
        except KeyError:
            raise KeyError(f"source_id {source_id!r} not covered by the fold plan") from None


def cut_windows(trace: Series, window_length: int, stride: int) -> list[Series]:
    """Cut a trace into fixed-length windows.

    Window starts are 0, stride, 2*stride, ... while they fit, plus one
    final window anchored at ``len - window_length`` when that start is not
    already on the stride grid.  Traces shorter than ``window_length`` are
    discarded (empty result).  Windows inherit label and source_id.
    """
    if window_length < 1:
        raise ValueError("window_length must be >= 1")
    if stride < 1:
        raise ValueError("stride must be >= 1")
    n = len(trace)
    if n < window_length:
        return []
    last = n - window_length
    starts = list(range(0, last + 1, stride))
    if starts[-1] != last:
        starts.append(last)
    return [
        Series(trace.values[a : a + window_length], trace.label, trace.source_id)
        for a in starts
    ]


def partition_folds(traces: Sequence[Series], num_folds: int, seed: int) -> FoldPlan:
    """Assign whole traces to folds, stratified by label, before any cutting.

    Deterministic for a given seed.  Raises when a class would be absent
    from every training split (possible only for degenerate fold counts).
    """
    if num_folds < 2:
        raise ValueError("num_folds must be >= 2")
    if len(traces) < num_folds:
        raise ValueError(f"need at least {num_folds} traces, got {len(traces)}")
    ids = [t.source_id for t in traces]
    if len(set(ids)) != len(ids):
        raise ValueError("traces must carry distinct source_ids")

    by_label: dict[int, list[str]] = {}
    for t in traces:
        key = UNLABELED if t.label is None else t.label
        by_label.setdefault(key, []).append(t.source_id)

    rng = np.random.default_rng(seed)
    assignment: dict[str, int] = {}
    cursor = 0
    for label in sorted(by_label):
        group = sorted(by_label[label])
        rng.shuffle(group)
        for sid in group:
            assignment[sid] = cursor % num_folds
            cursor += 1

    plan = FoldPlan(num_folds, assignment)
    for label, group in sorted(by_label.items()):
        folds = {assignment[sid] for sid in group}
        in_some_train = any(
            folds - set(plan.test_pair(i)) for i in range(num_folds)
        )
        if not in_some_train:
            raise ValueError(
                f"class {label} would be absent from every training split"
            )
    return plan


def split(dataset: Dataset, plan: FoldPlan, fold_test: int) -> tuple[Dataset, Dataset]:
    """Partition windows into (train, test) for one fold test.

    Test holds every window whose source trace lies in the held-out fold
    pair; train holds the rest.  Both sides keep window_length/num_classes.
    """
    test_folds = set(plan.test_pair(fold_test))
    train_rows, test_rows = [], []
    for s in dataset.series:
        if plan.fold_of(s.source_id) in test_folds:
            test_rows.append(s)
        else:
            train_rows.append(s)
    if not train_rows or not test_rows:
        raise ValueError(
            f"fold test {fold_test} leaves an empty split "
            f"(train={len(train_rows)}, test={len(test_rows)})"
        )
    train = Dataset(tuple(train_rows), dataset.num_classes, dataset.window_length)
    test = Dataset(tuple(test_rows), dataset.num_classes, dataset.window_length)
    return train, test


def save_csv(series: Sequence[Series], path) -> None:
    """Write series to CSV: header ``source_id,label,v0,v1,...``, one row per
    series, label -1 for unlabeled, full-precision decimal values."""
    series = list(series)
    max_len = max((len(s) for s in series), default=0)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["source_id", "label"] + [f"v{i}" for i in range(max_len)])
        for s in series:
            label = UNLABELED if s.label is None else s.label
            writer.writerow([s.source_id, label] + [repr(float(v)) for v in s.values])


def load_csv(path) -> list[Series]:
    """Inverse of :func:`save_csv`; errors name the offending line number."""
    out: list[Series] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or header[:2] != ["source_id", "label"]:
            raise ValueError(f"{path}: missing 'source_id,label,...' header")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) < 3:
                raise ValueError(f"{path}: line {lineno}: expected source_id, label and values")
            sid = row[0]
            try:
                label = int(row[1])
            except ValueError:
                raise ValueError(f"{path}: line {lineno}: bad label {row[1]!r}") from None
            if label < UNLABELED:
                raise ValueError(f"{path}: line {lineno}: bad label {label}")
            try:
                values = np.array([float(v) for v in row[2:]], dtype=np.float64)
            except ValueError:
                raise ValueError(f"{path}: line {lineno}: malformed value") from None
            if not np.all(np.isfinite(values)):
                raise ValueError(f"{path}: line {lineno}: non-finite value")
            out.append(Series(values, None if label == UNLABELED else label, sid))
    return out


def save_fold_plan(plan: FoldPlan, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["source_id", "fold"])
        for sid in sorted(plan.assignment):
            writer.writerow([sid, plan.assignment[sid]])


def load_fold_plan(path, num_folds: int | None = None) -> FoldPlan:
    assignment: dict[str, int] = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["source_id", "fold"]:
            raise ValueError(f"{path}: missing 'source_id,fold' header")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 2:
                raise ValueError(f"{path}: line {lineno}: expected source_id,fold")
            try:
                assignment[row[0]] = int(row[1])
            except ValueError:
                raise ValueError(f"{path}: line {lineno}: bad fold {row[1]!r}") from None
    if not assignment:
        raise ValueError(f"{path}: empty fold plan")
    if num_folds is None:
        num_folds = 1 + max(assignment.values())
    return FoldPlan(num_folds, assignment)
