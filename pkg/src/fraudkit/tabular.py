"""Data model, CSV ingestion, stratified splitting and min-max scaling.

All downstream modules consume the :class:`Dataset` defined here: a dense
float matrix of features plus a binary {0,1} label vector. Values are
validated to be finite at load time so the rest of the pipeline never has
to deal with NaN/Inf.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegenerateClass,
    EmptyDataset,
    MissingColumn,
    NonBinaryLabel,
    ParseError,
)


@dataclass
class Dataset:
    """Row-major numeric feature table with a binary label column."""

    feature_names: list[str]
    rows: np.ndarray          # (N, D) float64
    labels: np.ndarray        # (N,) int, values in {0, 1}

    def __post_init__(self):
        self.rows = np.asarray(self.rows, dtype=np.float64)
        if self.rows.ndim != 2:
            self.rows = self.rows.reshape(len(self.labels), -1)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.rows.shape[0] != self.labels.shape[0]:
            raise ParseError(
                f"row count {self.rows.shape[0]} != label count {self.labels.shape[0]}"
            )
        if self.rows.shape[1] != len(self.feature_names):
            raise ParseError(
                f"row width {self.rows.shape[1]} != feature count {len(self.feature_names)}"
            )

    @property
    def n_rows(self) -> int:
        return self.rows.shape[0]

    @property
    def n_features(self) -> int:
        return self.rows.shape[1]

    def class_counts(self) -> tuple[int, int]:
        """(count of label 0, count of label 1)."""
        return int(np.sum(self.labels == 0)), int(np.sum(self.labels == 1))

    def subset(self, indices) -> "Dataset":
        idx = np.asarray(indices, dtype=np.int64)
        return Dataset(list(self.feature_names), self.rows[idx].copy(), self.labels[idx].copy())


@dataclass
class ScaleParams:
    """Per-feature (min, max) fitted on training data."""

    mins: np.ndarray
    maxs: np.ndarray

    def transform(self, X: np.ndarray) -> np.ndarray:
        span = self.maxs - self.mins
        out = np.zeros_like(X, dtype=np.float64)
        nz = span > 0
        out[:, nz] = (X[:, nz] - self.mins[nz]) / span[nz]
        # constant features map to 0 by convention
        return out

    def inverse(self, X: np.ndarray) -> np.ndarray:
        span = self.maxs - self.mins
        out = np.empty_like(X, dtype=np.float64)
        nz = span > 0
        out[:, nz] = X[:, nz] * span[nz] + self.mins[nz]
        out[:, ~nz] = self.mins[~nz]
        return out


@dataclass
class SplitPair:
    train: Dataset
    test: Dataset


def load_csv(path, label_column: str = "Class") -> Dataset:
    """Read a numeric CSV with a header line into a Dataset.

    The label column is removed from the feature matrix and mapped to the
    label vector. Row order is preserved. Every cell must parse as a finite
    real number; label cells must be 0 or 1.
    """
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise EmptyDataset(f"{path}: file is empty")
        header = [h.strip() for h in header]
        if label_column not in header:
            raise MissingColumn(f"{path}: label column {label_column!r} not in header {header}")
        label_idx = header.index(label_column)
        feature_names = [h for j, h in enumerate(header) if j != label_idx]

        rows = []
        labels = []
        for lineno, record in enumerate(reader, start=1):
            if not record or (len(record) == 1 and record[0].strip() == ""):
                continue
            if len(record) != len(header):
                raise ParseError(
                    f"{path}: row {lineno} has {len(record)} cells, expected {len(header)}"
                )
            parsed = []
            for j, cell in enumerate(record):
                try:
                    value = float(cell)
                except ValueError:
                    raise ParseError(f"{path}: row {lineno}, cell {header[j]!r}: "
                                     f"cannot parse {cell!r}") from None
                if not math.isfinite(value):
                    raise ParseError(f"{path}: row {lineno}, cell {header[j]!r}: "
                                     f"non-finite value {cell!r}")
                parsed.append(value)
            label = parsed.pop(label_idx)
            if label not in (0.0, 1.0):
                raise NonBinaryLabel(f"{path}: row {lineno}: label {label!r} is not 0 or 1")
            rows.append(parsed)
            labels.append(int(label))

    if not rows:
        raise EmptyDataset(f"{path}: no data rows")
    return Dataset(feature_names, np.asarray(rows, dtype=np.float64),
                   np.asarray(labels, dtype=np.int64))


def save_csv(ds: Dataset, path, label_column: str = "Class") -> None:
    """Write a Dataset back to CSV (17 significant digits, LF line endings)."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(list(ds.feature_names) + [label_column]) + "\n")
        for i in range(ds.n_rows):
            cells = [format(v, ".17g") for v in ds.rows[i]]
            cells.append(str(int(ds.labels[i])))
            fh.write(",".join(cells) + "\n")


def stratified_split(ds: Dataset, test_fraction: float, seed: int) -> SplitPair:
    """Split per class: floor(test_fraction * class_count) rows go to test.

    Rows are chosen by a seeded shuffle within each class (class 0 drawn
    first, then class 1), so the result is deterministic for a fixed seed.
    Row order within each part follows the original dataset order.
    """
    if not 0.0 < test_fraction < 1.0:
        raise ValueError(f"test_fraction must be in (0,1), got {test_fraction}")
    rng = np.random.default_rng(seed)
    test_idx = []
    for cls in (0, 1):
        members = np.flatnonzero(ds.labels == cls)
        if members.size < 2:
            raise DegenerateClass(f"class {cls} has {members.size} rows, need >= 2")
        n_test = int(math.floor(test_fraction * members.size))
        perm = rng.permutation(members.size)
        test_idx.append(members[perm[:n_test]])
    test_idx = np.sort(np.concatenate(test_idx))
    mask = np.ones(ds.n_rows, dtype=bool)
    mask[test_idx] = False
    train_idx = np.flatnonzero(mask)
    return SplitPair(train=ds.subset(train_idx), test=ds.subset(test_idx))


def minmax_scale(split: SplitPair) -> tuple[SplitPair, ScaleParams]:
    """Fit min-max params on train only and apply them to both partitions.

    Constant features are mapped to 0. Test values outside the train range
    scale outside [0,1]; that is intentional (no clipping).
    """
    if split.train.n_rows == 0:
        raise EmptyDataset("cannot fit scaling on an empty training set")
    params = ScaleParams(mins=split.train.rows.min(axis=0),
                         maxs=split.train.rows.max(axis=0))
    train = Dataset(list(split.train.feature_names),
                    params.transform(split.train.rows), split.train.labels.copy())
    test = Dataset(list(split.test.feature_names),
                   params.transform(split.test.rows), split.test.labels.copy())
    return SplitPair(train=train, test=test), params
