# -*- coding: utf-8 -*-
"""
core.learners.network.model

Network specification, the trained network model, mini-batch training with
optional early stopping, and the finite-difference gradient check.

The output layer is ``dense(1, sigmoid)``; its sigmoid is folded into the
binary cross-entropy so the loss is computed from the logit with
``logaddexp`` and the output gradient is ``(p - y) / batch``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from scipy.special import expit

from core.exceptions import ModelError
from core.learners.base import Model, check_binary
from core.learners.network.layers import (
    DenseSpec,
    Layer,
    LayerSpec,
    Shape,
    build_layer,
    layer_from_dict,
    layer_to_dict,
    output_shape,
)
from core.logger import logger

GRADCHECK_FLOOR = 1e-6


@dataclass(frozen=True)
class OptimizerSpec:
    """``sgd`` (optional momentum) or ``adam``."""

    name: str = "adam"
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    momentum: float = 0.0

    def __post_init__(self) -> None:
        if self.name not in ("sgd", "adam"):
            raise ModelError(f"unknown optimizer '{self.name}'")
        if self.lr <= 0:
            raise ModelError(f"learning rate must be > 0, got {self.lr}")

    def to_dict(self) -> Dict[str, Any]:
        return dict(self.__dict__)


@dataclass(frozen=True)
class NetworkSpec:
    input_shape: Tuple[int, ...]
    layers: Tuple[LayerSpec, ...]
    optimizer: OptimizerSpec = field(default_factory=OptimizerSpec)

    def __post_init__(self) -> None:
        object.__setattr__(self, "input_shape", tuple(int(s) for s in self.input_shape))
        object.__setattr__(self, "layers", tuple(self.layers))

    def shapes(self) -> List[Shape]:
        """Per-sample shape after every layer; raises ModelError on any
        inconsistency, including a missing ``dense(1, sigmoid)`` output."""
        if not self.layers:
            raise ModelError("network has no layers")
        last = self.layers[-1]
        if not (isinstance(last, DenseSpec) and last.units == 1 and last.activation == "sigmoid"):
            raise ModelError(f"last layer must be dense(1, sigmoid), got {last}")
        shape: Shape = self.input_shape
        out = []
        for spec in self.layers:
            shape = output_shape(spec, shape)
            out.append(shape)
        return out

    def validate(self) -> "NetworkSpec":
        self.shapes()
        return self

    def to_dict(self) -> Dict[str, Any]:
        return {
            "input_shape": list(self.input_shape),
            "layers": [layer_to_dict(s) for s in self.layers],
            "optimizer": self.optimizer.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "NetworkSpec":
        return cls(
            input_shape=tuple(data["input_shape"]),
            layers=tuple(layer_from_dict(d) for d in data["layers"]),
            optimizer=OptimizerSpec(**data.get("optimizer", {})),
        )


def build_layers(spec: NetworkSpec, seed: int) -> List[Layer]:
    shapes = [spec.input_shape] + spec.validate().shapes()
    init_rng = np.random.default_rng(seed)
    dropout_rng = np.random.default_rng([seed, 2])
    n = len(spec.layers)
    return [
        build_layer(s, shapes[i], init_rng, dropout_rng, linear_output=(i == n - 1))
        for i, s in enumerate(spec.layers)
    ]


def _forward(layers: Sequence[Layer], x: np.ndarray, mode: str) -> np.ndarray:
    for layer in layers:
        x = layer.forward(x, mode)
    return x.reshape(-1)


def _backward(layers: Sequence[Layer], grad: np.ndarray) -> None:
    grad = grad.reshape(-1, 1)
    for layer in reversed(layers):
        grad = layer.backward(grad)


def bce_from_logits(z: np.ndarray, y: np.ndarray) -> float:
    return float(np.mean(np.logaddexp(0.0, z) - y * z))


def _loss_and_grads(layers: Sequence[Layer], x: np.ndarray, y: np.ndarray, mode: str) -> float:
    z = _forward(layers, x, mode)
    _backward(layers, (expit(z) - y) / y.shape[0])
    return bce_from_logits(z, y)


class NetworkModel(Model):
    family = "network"

    def __init__(self, spec: NetworkSpec, layers: List[Layer], history: Optional[List[Dict[str, float]]] = None):
        self.spec = spec
        self.layers = layers
        self.input_shape = spec.input_shape
        self.history = list(history or [])

    def logits(self, X: np.ndarray, batch_size: int = 256) -> np.ndarray:
        X = self._check(X)
        return np.concatenate(
            [_forward(self.layers, X[i : i + batch_size], "eval") for i in range(0, X.shape[0], batch_size)]
        ) if X.shape[0] else np.zeros(0)

    def _scores(self, X: np.ndarray) -> np.ndarray:
        return expit(self.logits(X))

    def weights(self) -> List[Dict[str, np.ndarray]]:
        return [{**{k: v.copy() for k, v in l.params.items()}, **{k: v.copy() for k, v in l.state.items()}} for l in self.layers]

    def set_weights(self, weights: Sequence[Mapping[str, np.ndarray]]) -> None:
        if len(weights) != len(self.layers):
            raise ModelError(f"{len(weights)} weight groups for {len(self.layers)} layers")
        for layer, group in zip(self.layers, weights):
            for key in list(layer.params) + list(layer.state):
                target = layer.params if key in layer.params else layer.state
                value = np.asarray(group[key], dtype=np.float64)
                if value.shape != target[key].shape:
                    raise ModelError(f"weight '{key}' has shape {value.shape}, expected {target[key].shape}")
                target[key] = value.copy()

    def to_dict(self) -> Dict[str, Any]:
        return {"spec": self.spec.to_dict(), "weights": self.weights()}


class _Optimizer:
    def __init__(self, spec: OptimizerSpec, layers: Sequence[Layer]):
        self.spec = spec
        self.layers = layers
        self.t = 0
        self.m = [{k: np.zeros_like(v) for k, v in l.params.items()} for l in layers]
        self.v = [{k: np.zeros_like(v) for k, v in l.params.items()} for l in layers]

    def step(self) -> None:
        s = self.spec
        self.t += 1
        for layer, m, v in zip(self.layers, self.m, self.v):
            for key, p in layer.params.items():
                g = layer.grads[key]
                if s.name == "sgd":
                    m[key] = s.momentum * m[key] + g
                    p -= s.lr * m[key]
                    continue
                m[key] = s.beta1 * m[key] + (1.0 - s.beta1) * g
                v[key] = s.beta2 * v[key] + (1.0 - s.beta2) * g * g
                m_hat = m[key] / (1.0 - s.beta1**self.t)
                v_hat = v[key] / (1.0 - s.beta2**self.t)
                p -= s.lr * m_hat / (np.sqrt(v_hat) + s.eps)


def _check_data(spec: NetworkSpec, X: np.ndarray, y: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    X = np.asarray(X, dtype=np.float64)
    y = check_binary(y).astype(np.float64)
    if X.shape[1:] != spec.input_shape:
        raise ModelError(f"network expects inputs of shape {spec.input_shape}, got {X.shape[1:]}")
    if X.shape[0] != y.shape[0]:
        raise ModelError(f"{X.shape[0]} inputs but {y.shape[0]} labels")
    return X, y


def nn_train(
    spec: NetworkSpec,
    X: np.ndarray,
    y: np.ndarray,
    epochs: int = 20,
    batch_size: int = 32,
    seed: int = 0,
    validation: Optional[Tuple[np.ndarray, np.ndarray]] = None,
    patience: int = 5,
) -> NetworkModel:
    """Mini-batch training with per-epoch shuffling.

    With ``validation`` given, training stops after ``patience`` epochs
    without a lower validation loss and the best epoch's weights are
    restored.
    """
    X, y = _check_data(spec, X, y)
    if epochs < 0 or batch_size < 1:
        raise ModelError(f"epochs must be >= 0 and batch_size >= 1, got {epochs}, {batch_size}")
    layers = build_layers(spec, seed)
    model = NetworkModel(spec, layers)
    optimizer = _Optimizer(spec.optimizer, layers)
    shuffle_rng = np.random.default_rng([seed, 1])
    if validation is not None:
        Xv, yv = _check_data(spec, *validation)
    best: Optional[Tuple[float, List[Dict[str, np.ndarray]]]] = None
    stale = 0

    for epoch in range(epochs):
        order = shuffle_rng.permutation(X.shape[0])
        losses = []
        for start in range(0, X.shape[0], batch_size):
            idx = order[start : start + batch_size]
            losses.append(_loss_and_grads(layers, X[idx], y[idx], "train") * idx.size)
            optimizer.step()
        record = {"epoch": epoch, "loss": float(np.sum(losses) / X.shape[0])}
        if not np.isfinite(record["loss"]):
            raise ModelError(f"training diverged at epoch {epoch}")
        if validation is not None and Xv.shape[0]:
            record["val_loss"] = bce_from_logits(model.logits(Xv), yv)
            if best is None or record["val_loss"] < best[0]:
                best = (record["val_loss"], model.weights())
                stale = 0
            else:
                stale += 1
        model.history.append(record)
        logger.debug(f"[Network] epoch {epoch}: {record}")
        if validation is not None and stale >= patience:
            logger.info(f"[Network] early stop after epoch {epoch}, best val_loss={best[0]:.4f}")
            break

    if best is not None:
        model.set_weights(best[1])
    return model


def nn_gradient_check(
    spec: NetworkSpec,
    X: np.ndarray,
    y: np.ndarray,
    eps: float = 1e-5,
    seed: int = 0,
) -> float:
    """Largest relative error between analytic and central-difference
    gradients over every trainable tensor, freshly initialized from
    ``seed``. Per tensor the error is ``|a - n| / max(|a| + |n|, floor)``
    with Euclidean norms."""
    X, y = _check_data(spec, X, y)
    layers = build_layers(spec, seed)
    _loss_and_grads(layers, X, y, "check")
    worst = 0.0
    for layer in layers:
        for key, p in layer.params.items():
            analytic = layer.grads[key].copy()
            numeric = np.zeros_like(p)
            for i in np.ndindex(p.shape):
                original = p[i]
                p[i] = original + eps
                plus = bce_from_logits(_forward(layers, X, "check"), y)
                p[i] = original - eps
                minus = bce_from_logits(_forward(layers, X, "check"), y)
                p[i] = original
                numeric[i] = (plus - minus) / (2.0 * eps)
            denom = max(np.linalg.norm(analytic) + np.linalg.norm(numeric), GRADCHECK_FLOOR)
            err = float(np.linalg.norm(analytic - numeric) / denom)
            logger.debug(f"[Network] grad check {type(layer).__name__}.{key}: {err:.2e}")
            worst = max(worst, err)
    return worst
