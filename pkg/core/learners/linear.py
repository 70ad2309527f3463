# -*- coding: utf-8 -*-
"""
core.learners.linear

Linear regression (thresholded as a classifier), logistic regression and
a linear soft-margin SVM with Platt-scaled scores.
"""

from __future__ import annotations

from typing import Any, Dict, List

import numpy as np
from scipy.special import expit

from core.dataset import TabularDataset
from core.exceptions import ModelError
from core.learners.base import Model, check_xy, dataset_arrays, learner


class LinearModel(Model):
    """``bias + X @ weights`` clipped to [0, 1]."""

    family = "linear"

    def __init__(self, bias: float, weights: np.ndarray):
        self.bias = float(bias)
        self.weights = np.asarray(weights, dtype=np.float64)
        self.input_shape = (self.weights.shape[0],)

    def raw(self, X: np.ndarray) -> np.ndarray:
        return self.bias + self._check(X) @ self.weights

    def _scores(self, X: np.ndarray) -> np.ndarray:
        return np.clip(self.bias + X @ self.weights, 0.0, 1.0)

    def to_dict(self) -> Dict[str, Any]:
        return {"bias": self.bias, "weights": self.weights}


class LogisticModel(LinearModel):
    family = "logistic"

    def __init__(self, bias: float, weights: np.ndarray, loss_history: List[float] | None = None):
        super().__init__(bias, weights)
        self.loss_history = list(loss_history or [])

    def _scores(self, X: np.ndarray) -> np.ndarray:
        return expit(self.bias + X @ self.weights)


class LinearSvmModel(LinearModel):
    """Hinge-trained hyperplane; score = sigmoid(a * margin + b)."""

    family = "svm"

    def __init__(self, bias: float, weights: np.ndarray, platt_a: float, platt_b: float):
        super().__init__(bias, weights)
        self.platt_a = float(platt_a)
        self.platt_b = float(platt_b)

    def margin(self, X: np.ndarray) -> np.ndarray:
        return self.raw(X)

    def _scores(self, X: np.ndarray) -> np.ndarray:
        return expit(self.platt_a * (self.bias + X @ self.weights) + self.platt_b)

    def to_dict(self) -> Dict[str, Any]:
        return {"bias": self.bias, "weights": self.weights, "platt_a": self.platt_a, "platt_b": self.platt_b}


@learner("linear", description="least-squares / ridge regression on 0-1 targets", defaults={"l2": 0.0})
def fit_linear(X: np.ndarray, y: np.ndarray, *, l2: float = 0.0, seed: int = 0) -> LinearModel:
    """Ridge with an unpenalized bias, solved on centered data.

    With ``l2 == 0`` the weights are the minimum-norm least-squares
    solution, which also covers singular designs.
    """
    X, y = check_xy(X, y)
    if l2 < 0:
        raise ModelError(f"l2 must be >= 0, got {l2}")
    x_mean = X.mean(axis=0)
    y_mean = float(y.mean())
    Xc = X - x_mean
    yc = y - y_mean
    if l2 == 0.0:
        weights = np.linalg.lstsq(Xc, yc, rcond=None)[0]
    else:
        gram = Xc.T @ Xc + l2 * np.eye(X.shape[1])
        weights = np.linalg.solve(gram, Xc.T @ yc)
    return LinearModel(y_mean - float(x_mean @ weights), weights)


def _log_loss(bias: float, weights: np.ndarray, X: np.ndarray, y: np.ndarray, l2: float) -> float:
    z = bias + X @ weights
    return float(np.mean(np.logaddexp(0.0, z) - y * z) + 0.5 * l2 * weights @ weights)


@learner(
    "logistic",
    description="gradient-descent logistic regression",
    defaults={"lr": 0.1, "iters": 1000, "l2": 0.0},
)
def fit_logistic(
    X: np.ndarray,
    y: np.ndarray,
    *,
    lr: float = 0.1,
    iters: int = 1000,
    l2: float = 0.0,
    seed: int = 0,
) -> LogisticModel:
    """Full-batch gradient descent from theta = 0.

    A step that would raise the regularized log-loss is rejected and the
    learning rate halved, so the recorded loss never increases.
    """
    X, y = check_xy(X, y)
    if lr <= 0 or iters < 0 or l2 < 0:
        raise ModelError(f"invalid logistic parameters lr={lr}, iters={iters}, l2={l2}")
    n, d = X.shape
    bias, weights = 0.0, np.zeros(d)
    loss = _log_loss(bias, weights, X, y, l2)
    history = [loss]

    for _ in range(iters):
        residual = expit(bias + X @ weights) - y
        grad_b = float(residual.mean())
        grad_w = X.T @ residual / n + l2 * weights
        if max(abs(grad_b), float(np.max(np.abs(grad_w), initial=0.0))) < 1e-12:
            break
        cand_b, cand_w = bias - lr * grad_b, weights - lr * grad_w
        cand_loss = _log_loss(cand_b, cand_w, X, y, l2)
        if cand_loss > loss or not np.isfinite(cand_loss):
            lr *= 0.5
            if lr < 1e-12:
                break
            continue
        bias, weights, loss = cand_b, cand_w, cand_loss
        history.append(loss)

    return LogisticModel(bias, weights, history)


def _svm_objective(bias: float, weights: np.ndarray, X: np.ndarray, s: np.ndarray, C: float) -> float:
    hinge = np.maximum(0.0, 1.0 - s * (bias + X @ weights))
    return float(0.5 * weights @ weights + C * hinge.mean())


@learner("svm", description="linear soft-margin SVM, hinge subgradient", defaults={"C": 1.0, "iters": 1000})
def fit_linear_svm(
    X: np.ndarray,
    y: np.ndarray,
    *,
    C: float = 1.0,
    iters: int = 1000,
    eta0: float = 1.0,
    seed: int = 0,
) -> LinearSvmModel:
    """Minimize ``0.5|w|² + C * mean(hinge)`` by full-batch subgradient
    descent with step ``eta0 / sqrt(t)``; the best iterate is kept.

    Margins are then mapped to [0, 1] by a logistic fit on the training
    margins (Platt scaling).
    """
    X, y = check_xy(X, y)
    if C <= 0 or iters < 1:
        raise ModelError(f"invalid SVM parameters C={C}, iters={iters}")
    s = np.where(y == 1, 1.0, -1.0)
    n, d = X.shape
    bias, weights = 0.0, np.zeros(d)
    best = (_svm_objective(bias, weights, X, s, C), bias, weights.copy())

    for t in range(1, iters + 1):
        active = s * (bias + X @ weights) < 1.0
        grad_w = weights - C * (s[active, None] * X[active]).sum(axis=0) / n
        grad_b = -C * s[active].sum() / n
        step = eta0 / np.sqrt(t)
        weights = weights - step * grad_w
        bias = bias - step * grad_b
        objective = _svm_objective(bias, weights, X, s, C)
        if objective < best[0]:
            best = (objective, bias, weights.copy())

    _, bias, weights = best
    margins = (bias + X @ weights)[:, None]
    platt = fit_logistic(margins, y, lr=1.0, iters=500)
    return LinearSvmModel(bias, weights, float(platt.weights[0]), platt.bias)


def train_linear(ds: TabularDataset, l2: float = 0.0) -> LinearModel:
    return fit_linear(*dataset_arrays(ds), l2=l2)


def train_logistic(ds: TabularDataset, lr: float = 0.1, iters: int = 1000, l2: float = 0.0) -> LogisticModel:
    return fit_logistic(*dataset_arrays(ds), lr=lr, iters=iters, l2=l2)


def train_linear_svm(ds: TabularDataset, C: float = 1.0, iters: int = 1000) -> LinearSvmModel:
    return fit_linear_svm(*dataset_arrays(ds), C=C, iters=iters)
