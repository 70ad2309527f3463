# -*- coding: utf-8 -*-
"""
core.eda.analysis

Pearson correlation matrices, PCA by power iteration with deflation, and
the long-form pair table behind a pair plot. Everything is exported as
CSV for external plotting.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from core.dataset import TabularDataset
from core.exceptions import DatasetError
from core.logger import logger

POWER_TOL = 1e-10
POWER_MAX_ITERS = 10_000
RANK_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class CorrelationMatrix:
    """``values[i, j]`` is NaN where either column is constant."""

    names: Tuple[str, ...]
    values: np.ndarray
    undefined: Tuple[str, ...] = ()

    def get(self, a: str, b: str) -> float:
        return float(self.values[self.names.index(a), self.names.index(b)])

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.values, index=list(self.names), columns=list(self.names))


def pearson_matrix(ds: TabularDataset, include_label: bool = False, label_name: str = "label") -> CorrelationMatrix:
    if ds.n < 2:
        raise DatasetError(f"correlation needs at least 2 rows, got {ds.n}")
    X = ds.rows
    names = list(ds.feature_names)
    if include_label:
        X = np.column_stack([X, ds.labels.astype(np.float64)])
        names.append(label_name)
    centered = X - X.mean(axis=0)
    norms = np.sqrt((centered**2).sum(axis=0))
    constant = norms == 0.0
    safe = np.where(constant, 1.0, norms)
    r = (centered.T @ centered) / np.outer(safe, safe)
    r = np.clip((r + r.T) / 2.0, -1.0, 1.0)
    np.fill_diagonal(r, 1.0)
    r[constant, :] = np.nan
    r[:, constant] = np.nan
    undefined = tuple(n for n, c in zip(names, constant) if c)
    if undefined:
        logger.warning(f"[EDA] constant column(s) have undefined correlation: {list(undefined)}")
    return CorrelationMatrix(tuple(names), r, undefined)


def standardize(X: np.ndarray) -> np.ndarray:
    """Center every column; scale non-constant ones to unit variance."""
    centered = X - X.mean(axis=0)
    std = centered.std(axis=0)
    return centered / np.where(std > 0, std, 1.0)


def _orthogonal_start(d: int, basis: List[np.ndarray]) -> np.ndarray:
    v = np.random.default_rng(0).normal(size=d)
    for b in basis:
        v -= (v @ b) * b
    return v / np.linalg.norm(v)


def principal_components(Z: np.ndarray, k: int) -> Tuple[np.ndarray, np.ndarray]:
    """Top-``k`` eigenpairs of the covariance of ``Z``.

    Returns ``(eigenvalues, components)`` with components as rows, each
    signed so its largest-magnitude loading is positive.
    """
    n, d = Z.shape
    if not 1 <= k <= d:
        raise DatasetError(f"need 1 <= k <= d={d}, got {k}")
    C = Z.T @ Z / max(n - 1, 1)
    values, vectors = [], []
    for _ in range(k):
        v = _orthogonal_start(d, vectors)
        lam = 0.0
        for _ in range(POWER_MAX_ITERS):
            w = C @ v
            norm = np.linalg.norm(w)
            if norm <= RANK_TOL:
                lam = 0.0
                break
            w /= norm
            if w @ v < 0:
                w = -w
            done = np.linalg.norm(w - v) < POWER_TOL
            v = w
            lam = float(v @ C @ v)
            if done:
                break
        # re-orthogonalize against earlier components
        for b in vectors:
            v = v - (v @ b) * b
        v = v / np.linalg.norm(v)
        if v[np.argmax(np.abs(v))] < 0:
            v = -v
        values.append(max(lam, 0.0))
        vectors.append(v)
        C = C - lam * np.outer(v, v)
    return np.array(values), np.array(vectors)


@dataclass(frozen=True, eq=False)
class Projection2D:
    coords: np.ndarray
    explained: Tuple[float, float]
    components: np.ndarray
    rank_deficient: bool = False


def pca_2d(ds: TabularDataset) -> Projection2D:
    if ds.n <= 2 or ds.d < 2:
        raise DatasetError(f"PCA to 2D needs n > 2 and d >= 2, got n={ds.n}, d={ds.d}")
    Z = standardize(ds.rows)
    total = float(np.trace(Z.T @ Z / (ds.n - 1)))
    values, components = principal_components(Z, 2)
    deficient = bool(values[1] <= RANK_TOL * max(total, 1.0))
    if deficient:
        logger.warning("[EDA] data has rank < 2; second component carries no variance")
    explained = tuple(float(v / total) if total > 0 else 0.0 for v in values)
    return Projection2D(Z @ components.T, explained, components, deficient)


def reconstruction_error(ds: TabularDataset, n_components: int) -> float:
    """Mean squared residual of the standardized rows after projecting
    onto the top ``n_components`` components."""
    Z = standardize(ds.rows)
    _, V = principal_components(Z, n_components)
    residual = Z - (Z @ V.T) @ V
    return float((residual**2).sum(axis=1).mean())


def pair_grid(ds: TabularDataset, features: Optional[Sequence[str]] = None) -> pd.DataFrame:
    """One row per (instance, feature pair) with ``x < y`` in column order."""
    features = list(features or ds.feature_names)
    missing = [f for f in features if f not in ds.feature_names]
    if missing:
        raise DatasetError(f"unknown feature(s) {missing}")
    idx = {f: ds.feature_names.index(f) for f in features}
    labels = [ds.label_names[l] for l in ds.labels]
    parts = []
    for a, b in itertools.combinations(features, 2):
        parts.append(
            pd.DataFrame(
                {
                    "row": np.arange(ds.n),
                    "label": labels,
                    "x_feature": a,
                    "y_feature": b,
                    "x": ds.rows[:, idx[a]],
                    "y": ds.rows[:, idx[b]],
                }
            )
        )
    columns = ["row", "label", "x_feature", "y_feature", "x", "y"]
    return pd.concat(parts, ignore_index=True) if parts else pd.DataFrame(columns=columns)


# ── writers ─────────────────────────────────────────────────────────


def _prepare(path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def write_correlation_csv(cm: CorrelationMatrix, path: str | Path) -> Path:
    path = _prepare(path)
    cm.to_frame().to_csv(path, float_format="%.6f", na_rep="")
    return path


def write_projection_csv(proj: Projection2D, ds: TabularDataset, path: str | Path) -> Path:
    path = _prepare(path)
    pd.DataFrame(
        {
            "pc1": proj.coords[:, 0],
            "pc2": proj.coords[:, 1],
            "label": [ds.label_names[l] for l in ds.labels],
        }
    ).to_csv(path, index=False, float_format="%.6f")
    return path


def write_pair_grid_csv(frame: pd.DataFrame, path: str | Path) -> Path:
    path = _prepare(path)
    frame.to_csv(path, index=False, float_format="%.6f")
    return path
