# -*- coding: utf-8 -*-
"""
core.dataset.tabular

The tabular dataset type shared by every pipeline stage, plus CSV I/O.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, Sequence, Tuple

import numpy as np
import pandas as pd

from core.exceptions import DatasetError
from core.logger import logger
from decorators import log_events


@dataclass(frozen=True, eq=False)
class TabularDataset:
    """Feature matrix with named columns and 0-based integer class labels.

    Arrays are stored read-only so instances can be shared between
    threads and worker processes without copying.
    """

    feature_names: Tuple[str, ...]
    rows: np.ndarray
    labels: np.ndarray
    label_names: Tuple[str, ...]

    def __post_init__(self) -> None:
        names = tuple(str(n) for n in self.feature_names)
        label_names = tuple(str(n) for n in self.label_names)
        rows = np.array(self.rows, dtype=np.float64, copy=True)
        labels = np.array(self.labels, dtype=np.int64, copy=True).reshape(-1)

        if rows.ndim != 2:
            raise DatasetError(f"rows must be a 2-D matrix, got ndim={rows.ndim}")
        n, d = rows.shape
        if n < 1 or d < 1:
            raise DatasetError(f"dataset must have n >= 1 and d >= 1, got n={n}, d={d}")
        if len(names) != d:
            raise DatasetError(f"{len(names)} feature names for {d} columns")
        if len(set(names)) != d:
            raise DatasetError("feature names must be unique")
        if labels.shape[0] != n:
            raise DatasetError(f"{labels.shape[0]} labels for {n} rows")
        if not label_names:
            raise DatasetError("label_names must not be empty")
        if labels.min() < 0 or labels.max() >= len(label_names):
            raise DatasetError("labels reference unknown label_names indices")
        if not np.all(np.isfinite(rows)):
            bad_row, bad_col = np.argwhere(~np.isfinite(rows))[0]
            raise DatasetError("non-finite value", row=int(bad_row), column=names[bad_col])

        rows.setflags(write=False)
        labels.setflags(write=False)
        object.__setattr__(self, "feature_names", names)
        object.__setattr__(self, "label_names", label_names)
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "labels", labels)

    @property
    def n(self) -> int:
        return int(self.rows.shape[0])

    @property
    def d(self) -> int:
        return int(self.rows.shape[1])

    def with_rows(self, rows: np.ndarray, feature_names: Sequence[str]) -> "TabularDataset":
        """Same labels, new feature matrix."""
        return TabularDataset(tuple(feature_names), rows, self.labels, self.label_names)

    def equals(self, other: "TabularDataset") -> bool:
        """Bit-for-bit equality on values, labels and names."""
        return (
            self.feature_names == other.feature_names
            and self.label_names == other.label_names
            and self.rows.shape == other.rows.shape
            and self.rows.tobytes() == other.rows.tobytes()
            and np.array_equal(self.labels, other.labels)
        )

    def to_frame(self, label_column: str = "label") -> pd.DataFrame:
        frame = pd.DataFrame(self.rows, columns=list(self.feature_names))
        frame[label_column] = [self.label_names[i] for i in self.labels]
        return frame


def subset(ds: TabularDataset, indices: Iterable[int]) -> TabularDataset:
    idx = np.asarray(list(indices), dtype=np.int64)
    if idx.size == 0:
        raise DatasetError("subset would be empty")
    return TabularDataset(ds.feature_names, ds.rows[idx], ds.labels[idx], ds.label_names)


def concat(a: TabularDataset, b: TabularDataset) -> TabularDataset:
    """Stack ``b`` under ``a``; b's labels are re-encoded against a's names."""
    if a.feature_names != b.feature_names:
        raise DatasetError("cannot concatenate datasets with different feature columns")
    names = list(a.label_names)
    for name in b.label_names:
        if name not in names:
            names.append(name)
    remap = np.array([names.index(name) for name in b.label_names], dtype=np.int64)
    return TabularDataset(
        a.feature_names,
        np.vstack([a.rows, b.rows]),
        np.concatenate([a.labels, remap[b.labels]]),
        tuple(names),
    )


def class_counts(ds: TabularDataset) -> Dict[str, int]:
    counts = np.bincount(ds.labels, minlength=len(ds.label_names))
    return {name: int(c) for name, c in zip(ds.label_names, counts)}


def set_positive_label(ds: TabularDataset, positive: str) -> TabularDataset:
    """Reduce to two classes with ``positive`` encoded as 1."""
    if positive not in ds.label_names:
        raise DatasetError(f"positive label '{positive}' not among {list(ds.label_names)}")
    pos = ds.label_names.index(positive)
    labels = (ds.labels == pos).astype(np.int64)
    others = [n for n in ds.label_names if n != positive]
    negative = others[0] if len(others) == 1 else "not_" + positive
    return TabularDataset(ds.feature_names, ds.rows, labels, (negative, positive))


@log_events("load_csv")
def load_csv(path: str | Path, label_column: str) -> TabularDataset:
    """Read a header-first, comma-separated export.

    Labels are encoded in order of first appearance. Every non-label
    cell must parse as a finite real; errors carry the 1-based file line
    and the column name.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"dataset file not found: {path}")

    frame = pd.read_csv(path, dtype=str, keep_default_na=False, skipinitialspace=True, encoding="utf-8")
    frame.columns = [str(c).strip() for c in frame.columns]
    if label_column not in frame.columns:
        raise DatasetError(f"label column '{label_column}' not in header {list(frame.columns)}")
    if frame.shape[0] == 0:
        raise DatasetError(f"{path} has a header but no rows")

    feature_names = [c for c in frame.columns if c != label_column]
    if not feature_names:
        raise DatasetError(f"{path} has no feature columns")

    rows = np.empty((frame.shape[0], len(feature_names)), dtype=np.float64)
    for j, column in enumerate(feature_names):
        for i, cell in enumerate(frame[column].tolist()):
            text = cell.strip()
            line = i + 2  # header is line 1
            if not text:
                raise DatasetError("missing value", row=line, column=column)
            try:
                value = float(text)
            except ValueError:
                raise DatasetError(f"unparsable cell '{text}'", row=line, column=column) from None
            if not np.isfinite(value):
                raise DatasetError(f"non-finite cell '{text}'", row=line, column=column)
            rows[i, j] = value

    label_names: list[str] = []
    labels = np.empty(frame.shape[0], dtype=np.int64)
    for i, raw in enumerate(frame[label_column].tolist()):
        name = raw.strip()
        if not name:
            raise DatasetError("missing label", row=i + 2, column=label_column)
        if name not in label_names:
            label_names.append(name)
        labels[i] = label_names.index(name)

    ds = TabularDataset(tuple(feature_names), rows, labels, tuple(label_names))
    logger.info(f"[Dataset] loaded {path.name}: n={ds.n} d={ds.d} classes={class_counts(ds)}")
    return ds


def save_csv(ds: TabularDataset, path: str | Path, label_column: str = "label") -> Path:
    """Write ``ds`` so that ``load_csv`` reads it back bit-for-bit."""
    if label_column in ds.feature_names:
        raise DatasetError(f"label column '{label_column}' collides with a feature name")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame(
        {name: [repr(float(v)) for v in ds.rows[:, j]] for j, name in enumerate(ds.feature_names)}
    )
    frame[label_column] = [ds.label_names[i] for i in ds.labels]
    frame.to_csv(path, index=False, encoding="utf-8")
    return path
