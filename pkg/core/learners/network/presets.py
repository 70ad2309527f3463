# -*- coding: utf-8 -*-
"""
core.learners.network.presets

Ready-made network specs and the registry entries for the image CNN and
the dense MLP.

``cnn_experiment(1..4)`` keeps the layer layout of the four reference
thermogram architectures (conv counts per filter group, dense depth,
batch norm, dropout, activation) at desk scale: filters divided by 8 and
dense units by 16. A 2x2 max pool follows every filter group and a
global average pool feeds the dense block.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, List, Optional, Sequence, Tuple

import numpy as np

from core.dataset.splits import split_indices
from core.exceptions import DatasetError, ModelError
from core.learners.base import learner
from core.learners.network.layers import (
    BatchNormSpec,
    Conv2dSpec,
    DenseSpec,
    DropoutSpec,
    FlattenSpec,
    GlobalAvgPoolSpec,
    LayerSpec,
    MaxPoolSpec,
)
from core.learners.network.model import NetworkModel, NetworkSpec, OptimizerSpec, nn_train
from core.logger import logger

FILTER_SCALE = 8
UNIT_SCALE = 16


@dataclass(frozen=True)
class CnnRow:
    groups: Tuple[Tuple[int, int], ...]  # (conv count, filters) per group
    dense_layers: int
    units: int
    batch_norm: bool
    dropout: float
    activation: str


CNN_ROWS = {
    1: CnnRow(((2, 32), (4, 64)), 1, 128, False, 0.25, "relu"),
    2: CnnRow(((4, 32), (8, 64)), 1, 256, True, 0.3, "elu"),
    3: CnnRow(((8, 32), (6, 64)), 2, 512, True, 0.1, "elu"),
    4: CnnRow(((6, 128), (2, 256)), 1, 1024, True, 0.01, "elu"),
}


def _output() -> DenseSpec:
    return DenseSpec(1, "sigmoid")


def cnn_experiment(
    number: int,
    input_shape: Tuple[int, int, int] = (1, 32, 32),
    lr: float = 1e-3,
) -> NetworkSpec:
    if number not in CNN_ROWS:
        raise ModelError(f"cnn experiment must be one of {sorted(CNN_ROWS)}, got {number}")
    row = CNN_ROWS[number]
    layers: List[LayerSpec] = []
    for count, filters in row.groups:
        for _ in range(count):
            layers.append(Conv2dSpec(max(1, filters // FILTER_SCALE), 3, row.activation))
            if row.batch_norm:
                layers.append(BatchNormSpec())
        layers.append(MaxPoolSpec())
    layers.append(GlobalAvgPoolSpec())
    for i in range(row.dense_layers):
        if i and row.batch_norm:
            layers.append(BatchNormSpec())
        layers.append(DenseSpec(max(1, row.units // UNIT_SCALE), row.activation))
        if row.dropout:
            layers.append(DropoutSpec(row.dropout))
    layers.append(_output())
    return NetworkSpec(tuple(input_shape), tuple(layers), OptimizerSpec("adam", lr)).validate()


def thermogram_cnn(input_shape: Tuple[int, int, int] = (1, 32, 32), lr: float = 1e-3) -> NetworkSpec:
    """Small default: two conv/pool stages, global pooling, one hidden dense."""
    layers = (
        Conv2dSpec(8, 3, "relu"),
        MaxPoolSpec(),
        Conv2dSpec(8, 3, "relu"),
        MaxPoolSpec(),
        GlobalAvgPoolSpec(),
        DenseSpec(8, "relu"),
        _output(),
    )
    return NetworkSpec(tuple(input_shape), layers, OptimizerSpec("adam", lr)).validate()


def mlp(
    input_shape: Sequence[int],
    units: int = 64,
    n_layers: int = 2,
    activation: str = "relu",
    dropout: float = 0.0,
    lr: float = 1e-3,
) -> NetworkSpec:
    """Dense baseline; image inputs are flattened first."""
    layers: List[LayerSpec] = []
    if len(input_shape) > 1:
        layers.append(FlattenSpec())
    for _ in range(int(n_layers)):
        layers.append(DenseSpec(int(units), activation))
        if dropout:
            layers.append(DropoutSpec(float(dropout)))
    layers.append(_output())
    return NetworkSpec(tuple(input_shape), tuple(layers), OptimizerSpec("adam", lr)).validate()


def _holdout(X: np.ndarray, y: np.ndarray, fraction: float, seed: int):
    if not fraction:
        return X, y, None
    try:
        keep, held = split_indices(y, fraction, seed)
    except DatasetError as e:
        logger.debug(f"[Network] no validation split ({e}); training without early stopping")
        return X, y, None
    return X[keep], y[keep], (X[held], y[held])


def _preset_spec(preset: str, input_shape: Tuple[int, ...], lr: float) -> NetworkSpec:
    if preset == "default":
        return thermogram_cnn(input_shape, lr)
    if preset.startswith("exp"):
        return cnn_experiment(int(preset[3:]), input_shape, lr)
    raise ModelError(f"unknown cnn preset '{preset}'; use default or exp1..exp4")


@learner(
    "cnn",
    family="network",
    description="convolutional network on (1, h, w) thermograms",
    defaults={"preset": "default", "epochs": 20, "batch_size": 32, "lr": 1e-3, "validation_fraction": 0.2},
    inputs="image",
)
def fit_cnn(
    X: np.ndarray,
    y: np.ndarray,
    *,
    preset: str = "default",
    epochs: int = 20,
    batch_size: int = 32,
    lr: float = 1e-3,
    validation_fraction: float = 0.2,
    patience: int = 5,
    seed: int = 0,
) -> NetworkModel:
    X = np.asarray(X, dtype=np.float64)
    spec = _preset_spec(preset, X.shape[1:], lr)
    X_fit, y_fit, validation = _holdout(X, np.asarray(y), validation_fraction, seed)
    return nn_train(spec, X_fit, y_fit, int(epochs), int(batch_size), seed, validation, int(patience))


@learner(
    "mlp",
    family="network",
    description="dense neural network",
    defaults={"units": 64, "n_layers": 2, "activation": "relu", "dropout": 0.0, "lr": 1e-3, "epochs": 100},
)
def fit_mlp(
    X: np.ndarray,
    y: np.ndarray,
    *,
    units: int = 64,
    n_layers: int = 2,
    activation: str = "relu",
    dropout: float = 0.0,
    lr: float = 1e-3,
    epochs: int = 100,
    batch_size: int = 32,
    validation_fraction: float = 0.2,
    patience: int = 10,
    seed: int = 0,
) -> NetworkModel:
    X = np.asarray(X, dtype=np.float64)
    spec = mlp(X.shape[1:], int(round(units)), int(round(n_layers)), activation, dropout, lr)
    X_fit, y_fit, validation = _holdout(X, np.asarray(y), validation_fraction, seed)
    return nn_train(spec, X_fit, y_fit, int(epochs), int(round(batch_size)), seed, validation, int(patience))


def default_spec_for(input_shape: Sequence[int], lr: float = 1e-3, preset: Optional[str] = None) -> NetworkSpec:
    """Default network for an input: a CNN for images, an MLP for rows."""
    shape: Tuple[Any, ...] = tuple(input_shape)
    if len(shape) == 3:
        return _preset_spec(preset or "default", shape, lr)
    return mlp(shape, lr=lr)
