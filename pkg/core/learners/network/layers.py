# -*- coding: utf-8 -*-
"""
core.learners.network.layers

Layer specs (plain, serializable) and the numpy layers they build. Every
layer implements ``forward(x, mode)`` and ``backward(grad)``; trainable
tensors live in ``params`` with matching ``grads``.

Modes: ``train`` (dropout on, batch statistics, running averages
updated), ``check`` (dropout off, batch statistics, nothing updated) and
``eval`` (dropout off, running averages).
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Any, Dict, Mapping, Optional, Tuple, Union

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.special import expit

from core.exceptions import ModelError

ACTIVATIONS = ("relu", "elu", "sigmoid", "tanh", "linear")
ELU_ALPHA = 1.0
MODES = ("train", "check", "eval")

Shape = Tuple[int, ...]


# ── specs ───────────────────────────────────────────────────────────


@dataclass(frozen=True)
class Conv2dSpec:
    filters: int
    kernel: int = 3
    activation: str = "relu"
    padding: str = "same"
    kind: str = "conv2d"


@dataclass(frozen=True)
class MaxPoolSpec:
    size: int = 2
    kind: str = "maxpool2d"


@dataclass(frozen=True)
class BatchNormSpec:
    momentum: float = 0.9
    eps: float = 1e-5
    kind: str = "batch_norm"


@dataclass(frozen=True)
class DropoutSpec:
    rate: float = 0.5
    kind: str = "dropout"


@dataclass(frozen=True)
class FlattenSpec:
    kind: str = "flatten"


@dataclass(frozen=True)
class GlobalAvgPoolSpec:
    kind: str = "global_average_pool"


@dataclass(frozen=True)
class DenseSpec:
    units: int
    activation: str = "relu"
    kind: str = "dense"


LayerSpec = Union[Conv2dSpec, MaxPoolSpec, BatchNormSpec, DropoutSpec, FlattenSpec, GlobalAvgPoolSpec, DenseSpec]

SPEC_TYPES = {
    cls.kind: cls  # type: ignore[attr-defined]
    for cls in (Conv2dSpec, MaxPoolSpec, BatchNormSpec, DropoutSpec, FlattenSpec, GlobalAvgPoolSpec, DenseSpec)
}


def layer_to_dict(spec: LayerSpec) -> Dict[str, Any]:
    return asdict(spec)


def layer_from_dict(data: Mapping[str, Any]) -> LayerSpec:
    data = dict(data)
    kind = data.get("kind")
    if kind not in SPEC_TYPES:
        raise ModelError(f"unknown layer kind '{kind}'")
    try:
        return SPEC_TYPES[kind](**data)
    except TypeError as e:
        raise ModelError(f"bad {kind} layer: {e}") from e


def output_shape(spec: LayerSpec, shape: Shape) -> Shape:
    """Shape after ``spec`` for one sample, or ModelError when incompatible."""
    kind = spec.kind
    if kind in ("conv2d", "maxpool2d", "global_average_pool") and len(shape) != 3:
        raise ModelError(f"{kind} needs (channels, height, width) input, got {shape}")
    if kind == "conv2d":
        if spec.filters < 1 or spec.kernel < 1:
            raise ModelError(f"conv2d needs filters >= 1 and kernel >= 1, got {spec}")
        if spec.activation not in ACTIVATIONS:
            raise ModelError(f"unknown activation '{spec.activation}'")
        _, h, w = shape
        if spec.padding == "same":
            if spec.kernel % 2 == 0:
                raise ModelError("'same' padding needs an odd kernel")
            return (spec.filters, h, w)
        if spec.padding != "valid":
            raise ModelError(f"unknown padding '{spec.padding}'")
        if h < spec.kernel or w < spec.kernel:
            raise ModelError(f"kernel {spec.kernel} larger than input {h}x{w}")
        return (spec.filters, h - spec.kernel + 1, w - spec.kernel + 1)
    if kind == "maxpool2d":
        c, h, w = shape
        if h < spec.size or w < spec.size:
            raise ModelError(f"cannot pool {h}x{w} by {spec.size}")
        return (c, h // spec.size, w // spec.size)
    if kind == "global_average_pool":
        return (shape[0],)
    if kind == "flatten":
        return (int(np.prod(shape)),)
    if kind == "dense":
        if len(shape) != 1:
            raise ModelError(f"dense needs flat input, got {shape}; add flatten or global_average_pool")
        if spec.units < 1 or spec.activation not in ACTIVATIONS:
            raise ModelError(f"bad dense layer {spec}")
        return (spec.units,)
    if kind == "dropout" and not 0.0 <= spec.rate < 1.0:
        raise ModelError(f"dropout rate must lie in [0, 1), got {spec.rate}")
    return shape


# ── activations ─────────────────────────────────────────────────────


def activate(name: str, z: np.ndarray) -> np.ndarray:
    if name == "relu":
        return np.maximum(z, 0.0)
    if name == "elu":
        return np.where(z > 0, z, ELU_ALPHA * np.expm1(np.minimum(z, 0.0)))
    if name == "sigmoid":
        return expit(z)
    if name == "tanh":
        return np.tanh(z)
    return z


def activation_grad(name: str, z: np.ndarray, a: np.ndarray) -> np.ndarray:
    if name == "relu":
        return (z > 0).astype(z.dtype)
    if name == "elu":
        return np.where(z > 0, 1.0, a + ELU_ALPHA)
    if name == "sigmoid":
        return a * (1.0 - a)
    if name == "tanh":
        return 1.0 - a * a
    return np.ones_like(z)


def _init_scale(activation: str, fan_in: int, fan_out: int) -> float:
    if activation in ("relu", "elu"):
        return float(np.sqrt(2.0 / fan_in))  # He
    return float(np.sqrt(2.0 / (fan_in + fan_out)))  # Glorot


# ── layers ──────────────────────────────────────────────────────────


class Layer:
    def __init__(self) -> None:
        self.params: Dict[str, np.ndarray] = {}
        self.grads: Dict[str, np.ndarray] = {}
        self.state: Dict[str, np.ndarray] = {}

    def forward(self, x: np.ndarray, mode: str) -> np.ndarray:
        raise NotImplementedError

    def backward(self, grad: np.ndarray) -> np.ndarray:
        raise NotImplementedError


class Conv2d(Layer):
    """Stride-1 convolution, weights ``(filters, in_channels, k, k)``."""

    def __init__(self, spec: Conv2dSpec, in_shape: Shape, rng: np.random.Generator, linear_output: bool = False):
        super().__init__()
        c = in_shape[0]
        k = spec.kernel
        self.kernel = k
        self.pad = k // 2 if spec.padding == "same" else 0
        self.activation = "linear" if linear_output else spec.activation
        scale = _init_scale(spec.activation, c * k * k, spec.filters * k * k)
        self.params = {
            "W": rng.normal(0.0, scale, size=(spec.filters, c, k, k)),
            "b": np.zeros(spec.filters),
        }

    def forward(self, x: np.ndarray, mode: str) -> np.ndarray:
        p = self.pad
        xp = np.pad(x, ((0, 0), (0, 0), (p, p), (p, p))) if p else x
        self._xp_shape = xp.shape
        self._windows = sliding_window_view(xp, (self.kernel, self.kernel), axis=(2, 3))
        z = np.einsum("nchwij,fcij->nfhw", self._windows, self.params["W"], optimize=True)
        z += self.params["b"][None, :, None, None]
        self._z = z
        self._a = activate(self.activation, z)
        return self._a

    def backward(self, grad: np.ndarray) -> np.ndarray:
        gz = grad * activation_grad(self.activation, self._z, self._a)
        W = self.params["W"]
        self.grads["W"] = np.einsum("nchwij,nfhw->fcij", self._windows, gz, optimize=True)
        self.grads["b"] = gz.sum(axis=(0, 2, 3))
        dxp = np.zeros(self._xp_shape)
        h_out, w_out = gz.shape[2], gz.shape[3]
        for i in range(self.kernel):
            for j in range(self.kernel):
                dxp[:, :, i : i + h_out, j : j + w_out] += np.einsum("nfhw,fc->nchw", gz, W[:, :, i, j], optimize=True)
        p = self.pad
        return dxp[:, :, p : dxp.shape[2] - p, p : dxp.shape[3] - p] if p else dxp


class MaxPool2d(Layer):
    """Non-overlapping max pooling; a trailing odd row/column is dropped."""

    def __init__(self, spec: MaxPoolSpec):
        super().__init__()
        self.size = spec.size

    def forward(self, x: np.ndarray, mode: str) -> np.ndarray:
        s = self.size
        n, c, h, w = x.shape
        ho, wo = h // s, w // s
        self._in_shape = x.shape
        blocks = x[:, :, : ho * s, : wo * s].reshape(n, c, ho, s, wo, s).transpose(0, 1, 2, 4, 3, 5)
        blocks = blocks.reshape(n, c, ho, wo, s * s)
        # first maximum wins ties
        self._argmax = blocks.argmax(axis=-1)
        return np.take_along_axis(blocks, self._argmax[..., None], axis=-1)[..., 0]

    def backward(self, grad: np.ndarray) -> np.ndarray:
        s = self.size
        n, c, h, w = self._in_shape
        ho, wo = grad.shape[2], grad.shape[3]
        blocks = np.zeros((n, c, ho, wo, s * s))
        np.put_along_axis(blocks, self._argmax[..., None], grad[..., None], axis=-1)
        blocks = blocks.reshape(n, c, ho, wo, s, s).transpose(0, 1, 2, 4, 3, 5).reshape(n, c, ho * s, wo * s)
        out = np.zeros(self._in_shape)
        out[:, :, : ho * s, : wo * s] = blocks
        return out


class BatchNorm(Layer):
    """Per-channel (images) or per-feature (vectors) normalization."""

    def __init__(self, spec: BatchNormSpec, in_shape: Shape):
        super().__init__()
        channels = in_shape[0]
        self.momentum = spec.momentum
        self.eps = spec.eps
        self.params = {"gamma": np.ones(channels), "beta": np.zeros(channels)}
        self.state = {"running_mean": np.zeros(channels), "running_var": np.ones(channels)}

    def _axes(self, x: np.ndarray) -> Tuple[int, ...]:
        return (0, 2, 3) if x.ndim == 4 else (0,)

    def _bcast(self, v: np.ndarray, ndim: int) -> np.ndarray:
        return v[None, :, None, None] if ndim == 4 else v[None, :]

    def forward(self, x: np.ndarray, mode: str) -> np.ndarray:
        axes = self._axes(x)
        if mode == "eval":
            mean, var = self.state["running_mean"], self.state["running_var"]
        else:
            mean, var = x.mean(axis=axes), x.var(axis=axes)
            if mode == "train":
                m = self.momentum
                self.state["running_mean"] = m * self.state["running_mean"] + (1.0 - m) * mean
                self.state["running_var"] = m * self.state["running_var"] + (1.0 - m) * var
        self._inv_std = 1.0 / np.sqrt(self._bcast(var, x.ndim) + self.eps)
        self._xhat = (x - self._bcast(mean, x.ndim)) * self._inv_std
        return self._bcast(self.params["gamma"], x.ndim) * self._xhat + self._bcast(self.params["beta"], x.ndim)

    def backward(self, grad: np.ndarray) -> np.ndarray:
        axes = self._axes(grad)
        xhat = self._xhat
        self.grads["gamma"] = (grad * xhat).sum(axis=axes)
        self.grads["beta"] = grad.sum(axis=axes)
        dxhat = grad * self._bcast(self.params["gamma"], grad.ndim)
        m = grad.size / self.params["gamma"].size
        return (
            self._inv_std
            / m
            * (m * dxhat - dxhat.sum(axis=axes, keepdims=True) - xhat * (dxhat * xhat).sum(axis=axes, keepdims=True))
        )


class Dropout(Layer):
    """Inverted dropout; identity outside ``train`` mode."""

    def __init__(self, spec: DropoutSpec, rng: np.random.Generator):
        super().__init__()
        self.rate = spec.rate
        self.rng = rng

    def forward(self, x: np.ndarray, mode: str) -> np.ndarray:
        if mode != "train" or self.rate == 0.0:
            self._mask = None
            return x
        self._mask = (self.rng.random(x.shape) >= self.rate) / (1.0 - self.rate)
        return x * self._mask

    def backward(self, grad: np.ndarray) -> np.ndarray:
        return grad if self._mask is None else grad * self._mask


class Flatten(Layer):
    def forward(self, x: np.ndarray, mode: str) -> np.ndarray:
        self._in_shape = x.shape
        return x.reshape(x.shape[0], -1)

    def backward(self, grad: np.ndarray) -> np.ndarray:
        return grad.reshape(self._in_shape)


class GlobalAvgPool(Layer):
    def forward(self, x: np.ndarray, mode: str) -> np.ndarray:
        self._in_shape = x.shape
        return x.mean(axis=(2, 3))

    def backward(self, grad: np.ndarray) -> np.ndarray:
        n, c, h, w = self._in_shape
        return np.broadcast_to(grad[:, :, None, None] / (h * w), self._in_shape).copy()


class Dense(Layer):
    def __init__(self, spec: DenseSpec, in_shape: Shape, rng: np.random.Generator, linear_output: bool = False):
        super().__init__()
        fan_in = in_shape[0]
        self.activation = "linear" if linear_output else spec.activation
        scale = _init_scale(spec.activation, fan_in, spec.units)
        self.params = {"W": rng.normal(0.0, scale, size=(fan_in, spec.units)), "b": np.zeros(spec.units)}

    def forward(self, x: np.ndarray, mode: str) -> np.ndarray:
        self._x = x
        self._z = x @ self.params["W"] + self.params["b"]
        self._a = activate(self.activation, self._z)
        return self._a

    def backward(self, grad: np.ndarray) -> np.ndarray:
        gz = grad * activation_grad(self.activation, self._z, self._a)
        self.grads["W"] = self._x.T @ gz
        self.grads["b"] = gz.sum(axis=0)
        return gz @ self.params["W"].T


def build_layer(
    spec: LayerSpec,
    in_shape: Shape,
    rng: np.random.Generator,
    dropout_rng: Optional[np.random.Generator] = None,
    linear_output: bool = False,
) -> Layer:
    """``linear_output`` drops the activation of the final layer; the
    sigmoid is folded into the loss instead."""
    kind = spec.kind
    if kind == "conv2d":
        return Conv2d(spec, in_shape, rng, linear_output)
    if kind == "dense":
        return Dense(spec, in_shape, rng, linear_output)
    if kind == "maxpool2d":
        return MaxPool2d(spec)
    if kind == "batch_norm":
        return BatchNorm(spec, in_shape)
    if kind == "dropout":
        return Dropout(spec, dropout_rng if dropout_rng is not None else rng)
    if kind == "flatten":
        return Flatten()
    if kind == "global_average_pool":
        return GlobalAvgPool()
    raise ModelError(f"unknown layer kind '{kind}'")
