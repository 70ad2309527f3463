# -*- coding: utf-8 -*-
"""
core.learners.tree

Gini decision trees with axis-aligned splits, and bagged random forests.
Rows go left when ``x[feature] <= threshold``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from core.dataset import TabularDataset
from core.exceptions import ModelError
from core.learners.base import Model, check_xy, dataset_arrays, learner

GAIN_TIE_TOLERANCE = 1e-12
LEAF = -1


@dataclass(eq=False)
class TreeStructure:
    """Flat node arrays; ``feature == -1`` marks a leaf."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray

    @classmethod
    def from_nodes(cls, nodes: Sequence[Tuple[int, float, int, int, float]]) -> "TreeStructure":
        f, t, l, r, v = zip(*nodes)
        return cls(
            np.array(f, dtype=np.int64),
            np.array(t, dtype=np.float64),
            np.array(l, dtype=np.int64),
            np.array(r, dtype=np.int64),
            np.array(v, dtype=np.float64),
        )

    @property
    def n_nodes(self) -> int:
        return int(self.feature.shape[0])

    @property
    def n_leaves(self) -> int:
        return int(np.count_nonzero(self.feature == LEAF))

    def depth(self) -> int:
        def walk(node: int) -> int:
            if self.feature[node] == LEAF:
                return 0
            return 1 + max(walk(self.left[node]), walk(self.right[node]))

        return walk(0)

    def apply(self, X: np.ndarray) -> np.ndarray:
        """Leaf index reached by every row."""
        node = np.zeros(X.shape[0], dtype=np.int64)
        active = self.feature[node] != LEAF
        while active.any():
            rows = np.flatnonzero(active)
            cur = node[rows]
            go_left = X[rows, self.feature[cur]] <= self.threshold[cur]
            node[rows] = np.where(go_left, self.left[cur], self.right[cur])
            active = self.feature[node] != LEAF
        return node

    def predict_values(self, X: np.ndarray) -> np.ndarray:
        return self.value[self.apply(X)]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "feature": self.feature,
            "threshold": self.threshold,
            "left": self.left,
            "right": self.right,
            "value": self.value,
        }


def midpoint(a: float, b: float) -> float:
    thr = (a + b) / 2.0
    return a if thr >= b else thr


def best_gini_split(
    X: np.ndarray,
    y: np.ndarray,
    features: Sequence[int],
    min_samples_leaf: int = 1,
) -> Optional[Tuple[float, int, float]]:
    """``(gain, feature, threshold)`` of the best Gini split, or None.

    Features are scanned in the given order and thresholds ascending; a
    later candidate must beat the incumbent by more than the tie
    tolerance to replace it.
    """
    n = y.shape[0]
    if n < 2 * min_samples_leaf:
        return None
    total_pos = float(y.sum())
    parent = 2.0 * total_pos * (n - total_pos) / (n * n)
    best: Optional[Tuple[float, int, float]] = None

    for f in features:
        order = np.argsort(X[:, f], kind="stable")
        xs = X[order, f]
        cum_pos = np.cumsum(y[order])[:-1].astype(np.float64)
        n_left = np.arange(1, n, dtype=np.float64)
        n_right = n - n_left
        pos_right = total_pos - cum_pos
        valid = (xs[:-1] < xs[1:]) & (n_left >= min_samples_leaf) & (n_right >= min_samples_leaf)
        if not valid.any():
            continue
        impurity = (2.0 * cum_pos * (n_left - cum_pos) / n_left + 2.0 * pos_right * (n_right - pos_right) / n_right) / n
        gains = np.where(valid, parent - impurity, -np.inf)
        top = gains.max()
        i = int(np.flatnonzero(gains >= top - GAIN_TIE_TOLERANCE)[0])
        if best is None or gains[i] > best[0] + GAIN_TIE_TOLERANCE:
            best = (float(gains[i]), int(f), midpoint(float(xs[i]), float(xs[i + 1])))
    return best


def _column_subset(rng: np.random.Generator, d: int, n_cols: int) -> np.ndarray:
    if n_cols >= d:
        return np.arange(d)
    return np.sort(rng.choice(d, size=n_cols, replace=False))


def build_gini_tree(
    X: np.ndarray,
    y: np.ndarray,
    max_depth: Optional[int] = None,
    min_samples_leaf: int = 1,
    min_gain: float = 0.0,
    n_cols: Optional[int] = None,
    rng: Optional[np.random.Generator] = None,
) -> TreeStructure:
    d = X.shape[1]
    n_cols = d if n_cols is None else n_cols
    nodes: List[list] = []

    def grow(idx: np.ndarray, depth: int) -> int:
        node_id = len(nodes)
        nodes.append([LEAF, 0.0, LEAF, LEAF, float(y[idx].mean())])
        if max_depth is not None and depth >= max_depth:
            return node_id
        yi = y[idx]
        if yi.min() == yi.max():
            return node_id
        features = _column_subset(rng, d, n_cols) if rng is not None else np.arange(d)
        split = best_gini_split(X[idx], yi, features, min_samples_leaf)
        if split is None or split[0] <= min_gain:
            return node_id
        _, f, thr = split
        go_left = X[idx, f] <= thr
        left = grow(idx[go_left], depth + 1)
        right = grow(idx[~go_left], depth + 1)
        nodes[node_id][:4] = [f, thr, left, right]
        return node_id

    grow(np.arange(X.shape[0]), 0)
    return TreeStructure.from_nodes([tuple(n) for n in nodes])


class TreeModel(Model):
    family = "tree"

    def __init__(self, tree: TreeStructure, n_features: int):
        self.tree = tree
        self.input_shape = (int(n_features),)

    def _scores(self, X: np.ndarray) -> np.ndarray:
        return self.tree.predict_values(X)

    def to_dict(self) -> Dict[str, Any]:
        return {"tree": self.tree.to_dict(), "n_features": self.input_shape[0]}


class ForestModel(Model):
    family = "forest"

    def __init__(self, trees: Sequence[TreeStructure], n_features: int):
        self.trees = list(trees)
        self.input_shape = (int(n_features),)

    def _scores(self, X: np.ndarray) -> np.ndarray:
        return np.mean([t.predict_values(X) for t in self.trees], axis=0)

    def to_dict(self) -> Dict[str, Any]:
        return {"trees": [t.to_dict() for t in self.trees], "n_features": self.input_shape[0]}


def _depth(max_depth: Optional[int]) -> Optional[int]:
    return None if max_depth is None or max_depth <= 0 else int(max_depth)


@learner(
    "tree",
    description="CART-style Gini decision tree",
    defaults={"max_depth": 5, "min_samples_leaf": 1, "min_gain": 0.0},
)
def fit_tree(
    X: np.ndarray,
    y: np.ndarray,
    *,
    max_depth: Optional[int] = None,
    min_samples_leaf: int = 1,
    min_gain: float = 0.0,
    seed: int = 0,
) -> TreeModel:
    X, y = check_xy(X, y)
    if min_samples_leaf < 1:
        raise ModelError(f"min_samples_leaf must be >= 1, got {min_samples_leaf}")
    return TreeModel(build_gini_tree(X, y, _depth(max_depth), min_samples_leaf, min_gain), X.shape[1])


@learner(
    "forest",
    description="bagged Gini trees with per-split column sampling",
    defaults={"n_trees": 100, "max_depth": None, "min_samples_leaf": 1, "bootstrap": True, "colsample": None},
)
def fit_forest(
    X: np.ndarray,
    y: np.ndarray,
    *,
    n_trees: int = 100,
    max_depth: Optional[int] = None,
    min_samples_leaf: int = 1,
    min_gain: float = 0.0,
    bootstrap: bool = True,
    colsample: Optional[float] = None,
    seed: int = 0,
) -> ForestModel:
    """Tree ``t`` draws its bootstrap sample and split columns from a
    generator seeded with ``(seed, t)``. ``colsample=None`` uses
    ``floor(sqrt(d))`` columns per split."""
    X, y = check_xy(X, y)
    if n_trees < 1:
        raise ModelError(f"n_trees must be >= 1, got {n_trees}")
    n, d = X.shape
    if colsample is None:
        n_cols = max(1, int(np.floor(np.sqrt(d))))
    elif 0.0 < colsample <= 1.0:
        n_cols = max(1, int(round(colsample * d)))
    else:
        raise ModelError(f"colsample must lie in (0, 1], got {colsample}")

    trees = []
    for t in range(n_trees):
        rng = np.random.default_rng([seed, t])
        idx = rng.integers(0, n, size=n) if bootstrap else np.arange(n)
        trees.append(
            build_gini_tree(X[idx], y[idx], _depth(max_depth), min_samples_leaf, min_gain, n_cols, rng)
        )
    return ForestModel(trees, d)


def train_tree(ds: TabularDataset, max_depth: Optional[int] = None, min_samples_leaf: int = 1, min_gain: float = 0.0) -> TreeModel:
    return fit_tree(*dataset_arrays(ds), max_depth=max_depth, min_samples_leaf=min_samples_leaf, min_gain=min_gain)


def train_forest(
    ds: TabularDataset,
    n_trees: int = 100,
    max_depth: Optional[int] = None,
    min_samples_leaf: int = 1,
    min_gain: float = 0.0,
    bootstrap: bool = True,
    colsample: Optional[float] = None,
    seed: int = 0,
) -> ForestModel:
    return fit_forest(
        *dataset_arrays(ds),
        n_trees=n_trees,
        max_depth=max_depth,
        min_samples_leaf=min_samples_leaf,
        min_gain=min_gain,
        bootstrap=bootstrap,
        colsample=colsample,
        seed=seed,
    )
