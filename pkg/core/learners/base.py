# -*- coding: utf-8 -*-
"""
core.learners.base

The scoring contract shared by every learner family, and the learner
registry the DOE roster and the HPO objectives resolve families through.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np

from core.dataset import TabularDataset
from core.exceptions import ModelError
from core.logger import logger


class Model:
    """A trained predictor scoring each instance in [0, 1].

    Subclasses set ``family`` and ``input_shape`` (``(d,)`` for tabular
    models, ``(c, h, w)`` for image models) and implement ``_scores``.
    """

    family: str = "model"
    input_shape: Tuple[int, ...] = ()

    def _check(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == len(self.input_shape):
            X = X[None]
        if X.shape[1:] != tuple(self.input_shape):
            raise ModelError(
                f"{self.family} expects inputs of shape {tuple(self.input_shape)}, got {tuple(X.shape[1:])}"
            )
        return X

    def _scores(self, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def predict_scores(self, X: np.ndarray) -> np.ndarray:
        scores = np.asarray(self._scores(self._check(X)), dtype=np.float64).reshape(-1)
        return np.clip(scores, 0.0, 1.0)

    def predict(self, x: np.ndarray) -> float:
        """Score of a single row or image."""
        return float(self.predict_scores(np.asarray(x)[None])[0])

    @property
    def n_features(self) -> int:
        return int(np.prod(self.input_shape))

    def to_dict(self) -> Dict[str, Any]:
        raise NotImplementedError


def check_binary(y: np.ndarray) -> np.ndarray:
    y = np.asarray(y)
    if y.ndim != 1 or y.size == 0:
        raise ModelError("labels must be a non-empty vector")
    if not np.isin(y, (0, 1)).all():
        raise ModelError(f"binary labels required, got classes {np.unique(y).tolist()}")
    return y.astype(np.int64)


def check_xy(X: np.ndarray, y: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    X = np.asarray(X, dtype=np.float64)
    y = check_binary(y)
    if X.shape[0] != y.shape[0]:
        raise ModelError(f"{X.shape[0]} rows but {y.shape[0]} labels")
    if not np.all(np.isfinite(X)):
        raise ModelError("training inputs contain non-finite values")
    return X, y


def dataset_arrays(ds: TabularDataset) -> Tuple[np.ndarray, np.ndarray]:
    if len(ds.label_names) != 2:
        raise ModelError(f"binary dataset required, got label names {list(ds.label_names)}")
    return ds.rows, ds.labels


# ── registry ────────────────────────────────────────────────────────

FitFn = Callable[..., Model]


@dataclass
class LearnerMetadata:
    """Roster entry: which fitter, with which defaults, on which inputs."""

    name: str
    family: str
    description: str = ""
    defaults: Dict[str, Any] = field(default_factory=dict)
    inputs: str = "tabular"  # or "image"


@dataclass
class RegisteredLearner:
    fit: FitFn
    metadata: LearnerMetadata

    def train(self, X: np.ndarray, y: np.ndarray, seed: int = 0, **overrides: Any) -> Model:
        params = dict(self.metadata.defaults)
        params.update(overrides)
        return self.fit(X, y, seed=seed, **params)


class LearnerRegistry:
    """Singleton registry of named learners."""

    _instance = None
    _registry: Dict[str, RegisteredLearner] = {}

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super(LearnerRegistry, cls).__new__(cls)
        return cls._instance

    def register(self, entry: RegisteredLearner) -> None:
        name = entry.metadata.name
        if name in self._registry:
            logger.warning(f"[Learners] overwriting learner '{name}'")
        self._registry[name] = entry

    def get(self, name: str) -> RegisteredLearner:
        # fitters register on import of the package
        import core.learners  # noqa: F401

        if name not in self._registry:
            raise ModelError(f"unknown learner '{name}'; available: {self.names()}")
        return self._registry[name]

    def names(self, inputs: Optional[str] = None) -> List[str]:
        return [n for n, e in self._registry.items() if inputs is None or e.metadata.inputs == inputs]


registry_instance = LearnerRegistry()


def learner(
    name: str,
    family: Optional[str] = None,
    description: str = "",
    defaults: Optional[Dict[str, Any]] = None,
    inputs: str = "tabular",
):
    """Register an array-level fitter ``fit(X, y, *, seed, **params) -> Model``.

    The same fitter may be registered several times under different names
    and defaults (e.g. the two boosted-tree styles).
    """

    def decorator_factory(func: FitFn) -> FitFn:
        registry_instance.register(
            RegisteredLearner(
                fit=func,
                metadata=LearnerMetadata(
                    name=name,
                    family=family or name,
                    description=description,
                    defaults=dict(defaults or {}),
                    inputs=inputs,
                ),
            )
        )

        @functools.wraps(func)
        def wrapper(*args, **kwargs):
            return func(*args, **kwargs)

        return wrapper

    return decorator_factory


def get_learner(name: str) -> RegisteredLearner:
    return registry_instance.get(name)
