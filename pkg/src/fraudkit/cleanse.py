"""Class-conditional Tukey-fence outlier pruning.

Fences are computed on the target class only (the fraud subset) and only
rows of that class are ever removed. Features are processed sequentially
in the order given, with fences recomputed on the surviving subset before
each feature (the default; set ``recompute_fences=False`` to compute all
fences up front on the original subset).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyClassSubset, EmptyInput, UnknownFeature
from .tabular import Dataset


@dataclass
class Fences:
    """Quartiles and outlier cut-offs for one feature."""

    q1: float
    q3: float
    iqr: float
    lower: float
    upper: float
    multiplier: float = 1.5


@dataclass
class RemovalReport:
    fences: dict  # feature name -> Fences
    removed_row_indices: list  # indices into the input dataset, sorted
    rows_before: int
    rows_after: int
    removed_per_feature: dict = field(default_factory=dict)


def quantile(values, q: float) -> float:
    """Linear-interpolation quantile of a non-empty list of finite reals.

    Sorts ascending, takes h = q*(n-1) and interpolates between the two
    bracketing order statistics.
    """
    v = np.asarray(values, dtype=np.float64)
    if v.size == 0:
        raise EmptyInput("quantile of empty list")
    if not (0.0 <= q <= 1.0):
        raise ValueError(f"q must be in [0,1], got {q}")
    s = np.sort(v)
    h = q * (s.size - 1)
    lo = int(math.floor(h))
    hi = int(math.ceil(h))
    return float(s[lo] + (h - lo) * (s[hi] - s[lo]))


def tukey_fences(values, multiplier: float = 1.5) -> Fences:
    """Q1/Q3 quartiles plus lower/upper cut-offs at multiplier * IQR."""
    q1 = quantile(values, 0.25)
    q3 = quantile(values, 0.75)
    iqr = q3 - q1
    return Fences(q1=q1, q3=q3, iqr=iqr,
                  lower=q1 - multiplier * iqr,
                  upper=q3 + multiplier * iqr,
                  multiplier=multiplier)


def prune_class_outliers(ds: Dataset, features, target_class: int = 1,
                         multiplier: float = 1.5,
                         recompute_fences: bool = True) -> tuple[Dataset, RemovalReport]:
    """Remove target-class rows lying strictly outside per-feature fences.

    For each feature in order, fences come from the current target-class
    subset's values; rows strictly outside [lower, upper] are dropped before
    the next feature is processed. Rows of the other class are never touched.
    """
    for name in features:
        if name not in ds.feature_names:
            raise UnknownFeature(f"feature {name!r} not in dataset")

    keep = np.ones(ds.n_rows, dtype=bool)
    is_target = ds.labels == target_class
    fences_by_feature = {}
    removed_per_feature = {}

    if features and not np.any(is_target):
        raise EmptyClassSubset(f"no rows with class {target_class}")

    if not recompute_fences:
        # all fences from the original target subset, then one removal pass
        for name in features:
            col = ds.rows[:, ds.feature_names.index(name)]
            fences_by_feature[name] = tukey_fences(col[is_target], multiplier)

    for name in features:
        col = ds.rows[:, ds.feature_names.index(name)]
        active = is_target & keep
        if recompute_fences:
            if not np.any(active):
                raise EmptyClassSubset(
                    f"class {target_class} exhausted before feature {name!r}")
            fences_by_feature[name] = tukey_fences(col[active], multiplier)
        f = fences_by_feature[name]
        outside = active & ((col < f.lower) | (col > f.upper))
        removed_per_feature[name] = int(np.sum(outside))
        keep &= ~outside

    removed = np.flatnonzero(~keep)
    report = RemovalReport(
        fences=fences_by_feature,
        removed_row_indices=[int(i) for i in removed],
        rows_before=ds.n_rows,
        rows_after=int(np.sum(keep)),
        removed_per_feature=removed_per_feature,
    )
    return ds.subset(np.flatnonzero(keep)), report
