# -*- coding: utf-8 -*-
"""k-nearest-neighbours scoring."""

from __future__ import annotations

from typing import Any, Dict

import numpy as np
from scipy.spatial.distance import cdist

from core.dataset import TabularDataset
from core.exceptions import ModelError
from core.learners.base import Model, check_xy, dataset_arrays, learner


class KnnModel(Model):
    """Score = share of class 1 among the k nearest training rows.

    Equal distances are resolved toward the lower training index.
    """

    family = "knn"

    def __init__(self, X: np.ndarray, y: np.ndarray, k: int):
        self.X = np.asarray(X, dtype=np.float64)
        self.y = np.asarray(y, dtype=np.int64)
        self.k = int(k)
        self.input_shape = (self.X.shape[1],)

    def neighbors(self, X: np.ndarray) -> np.ndarray:
        dist = cdist(self._check(X), self.X, metric="euclidean")
        return np.argsort(dist, axis=1, kind="stable")[:, : self.k]

    def _scores(self, X: np.ndarray) -> np.ndarray:
        dist = cdist(X, self.X, metric="euclidean")
        nearest = np.argsort(dist, axis=1, kind="stable")[:, : self.k]
        return self.y[nearest].mean(axis=1)

    def to_dict(self) -> Dict[str, Any]:
        return {"X": self.X, "y": self.y, "k": self.k}


@learner("knn", description="Euclidean k-nearest neighbours", defaults={"k": 5})
def fit_knn(X: np.ndarray, y: np.ndarray, *, k: int = 5, seed: int = 0) -> KnnModel:
    X, y = check_xy(X, y)
    if not 1 <= k <= X.shape[0]:
        raise ModelError(f"k must lie in [1, n={X.shape[0]}], got {k}")
    return KnnModel(X, y, k)


def train_knn(ds: TabularDataset, k: int = 5) -> KnnModel:
    return fit_knn(*dataset_arrays(ds), k=k)
