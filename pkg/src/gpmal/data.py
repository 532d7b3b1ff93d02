"""Tabular dataset loading, validation and min-max scaling.

A Dataset is an immutable (n, d) float64 matrix plus optional class labels.
Labels are kept as dense integer ids (first-appearance order) with the
original strings retained for reporting; they are never used by fitness,
only by the evaluation harness.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace

import numpy as np


class DataError(Exception):
    """Raised for malformed or unusable input data."""


@dataclass(frozen=True)
class Dataset:
    features: np.ndarray                       # (n, d) float64
    feature_names: tuple[str, ...]
    labels: np.ndarray | None = None           # (n,) int ids, or None
    label_names: tuple[str, ...] = field(default_factory=tuple)
    name: str = ""

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def d(self) -> int:
        return self.features.shape[1]

    def validate(self) -> None:
        if self.n < 2:
            raise DataError(f"need at least 2 instances, got {self.n}")
        if self.d < 1:
            raise DataError("need at least 1 feature")
        if not np.isfinite(self.features).all():
            raise DataError("non-finite value in feature matrix")
        if self.labels is not None:
            if len(self.labels) != self.n:
                raise DataError(
                    f"{len(self.labels)} labels for {self.n} instances"
                )
            if len(set(self.labels.tolist())) < 2:
                raise DataError("labels must contain at least 2 distinct classes")


def load_csv(path, label_column: str | None = None, name: str = "") -> Dataset:
    """Read a UTF-8, comma-separated file with a header row.

    ``label_column`` selects the class column by header name, or the literal
    string ``"last"`` for the final column. The returned features are
    unscaled; call :func:`scale_min_max` separately.
    """
    with open(path, "r", encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise DataError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    body = rows[1:]
    if not body:
        raise DataError(f"{path}: no data rows")

    ncols = len(header)
    label_idx: int | None = None
    if label_column is not None:
        if label_column == "last":
            label_idx = ncols - 1
        elif label_column in header:
            label_idx = header.index(label_column)
        else:
            raise DataError(f"{path}: no column named {label_column!r}")

    feature_cols = [c for c in range(ncols) if c != label_idx]
    if not feature_cols:
        raise DataError(f"{path}: no feature columns left after label extraction")

    feats = np.empty((len(body), len(feature_cols)), dtype=np.float64)
    labels: list[str] = []
    for r, row in enumerate(body):
        if len(row) != ncols:
            raise DataError(
                f"{path}: row {r + 2} has {len(row)} cells, expected {ncols}"
            )
        for j, c in enumerate(feature_cols):
            cell = row[c].strip()
            try:
                value = float(cell)
            except ValueError:
                raise DataError(
                    f"{path}: row {r + 2}, column {header[c]!r}: "
                    f"cannot parse {cell!r} as a number"
                ) from None
            if not math.isfinite(value):
                raise DataError(
                    f"{path}: row {r + 2}, column {header[c]!r}: "
                    f"non-finite value {cell!r}"
                )
            feats[r, j] = value
        if label_idx is not None:
            labels.append(row[label_idx].strip())

    label_ids = None
    label_names: tuple[str, ...] = ()
    if label_idx is not None:
        seen: dict[str, int] = {}
        for lab in labels:
            if lab not in seen:
                seen[lab] = len(seen)
        label_ids = np.array([seen[lab] for lab in labels], dtype=np.intp)
        label_names = tuple(seen)

    ds = Dataset(
        features=feats,
        feature_names=tuple(header[c] for c in feature_cols),
        labels=label_ids,
        label_names=label_names,
        name=name or str(path),
    )
    ds.validate()
    return ds


def scaling_params(ds: Dataset) -> tuple[np.ndarray, np.ndarray]:
    """Per-feature (min, max) of the dataset, used for scaling and reuse."""
    return ds.features.min(axis=0), ds.features.max(axis=0)


def apply_scaling(features: np.ndarray, mins: np.ndarray, maxs: np.ndarray) -> np.ndarray:
    """Map each column linearly so [min, max] becomes [0, 1].

    Constant columns (max == min) map to all zeros. Values outside the
    stored range scale linearly without clamping, so held-out data keeps
    its geometry relative to the training range.
    """
    span = maxs - mins
    safe = np.where(span == 0.0, 1.0, span)
    scaled = (features - mins) / safe
    scaled[:, span == 0.0] = 0.0
    return scaled


def scale_min_max(ds: Dataset) -> Dataset:
    """Min-max scale every feature column to [0, 1]. Idempotent."""
    mins, maxs = scaling_params(ds)
    return replace(ds, features=apply_scaling(ds.features, mins, maxs))


def format_value(x: float) -> str:
    """Shortest decimal that round-trips to the same float."""
    return repr(float(x))


def save_csv(ds: Dataset, path, label_header: str = "class") -> None:
    """Write the dataset back out; reloading yields identical values."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        header = list(ds.feature_names)
        if ds.labels is not None:
            header.append(label_header)
        writer.writerow(header)
        for i in range(ds.n):
            row = [format_value(v) for v in ds.features[i]]
            if ds.labels is not None:
                row.append(ds.label_names[ds.labels[i]])
            writer.writerow(row)
