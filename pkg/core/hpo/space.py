# -*- coding: utf-8 -*-
"""
core.hpo.space

Search-space dimensions and the two prior-based suggesters (random draw
and grid enumeration).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Any, ClassVar, Dict, List, Mapping, Sequence, Tuple

import numpy as np

from core.exceptions import HpoError

Params = Dict[str, Any]


@dataclass(frozen=True)
class Uniform:
    low: float
    high: float
    kind: ClassVar[str] = "uniform"

    def __post_init__(self) -> None:
        if not self.low < self.high:
            raise HpoError(f"uniform needs low < high, got ({self.low}, {self.high})")

    # internal (sampling) space bounds
    def bounds(self) -> Tuple[float, float]:
        return float(self.low), float(self.high)

    def to_internal(self, value: float) -> float:
        return float(value)

    def emit(self, internal: float) -> Any:
        return float(np.clip(internal, self.low, self.high))

    def sample(self, rng: np.random.Generator) -> Any:
        return self.emit(rng.uniform(*self.bounds()))

    def grid(self, points: int) -> List[Any]:
        return [float(v) for v in np.linspace(self.low, self.high, points)]


@dataclass(frozen=True)
class LogUniform(Uniform):
    """Uniform in log space; fitted and sampled on ``log(value)``."""

    kind: ClassVar[str] = "loguniform"

    def __post_init__(self) -> None:
        if self.low <= 0:
            raise HpoError(f"loguniform needs low > 0, got {self.low}")
        super().__post_init__()

    def bounds(self) -> Tuple[float, float]:
        return math.log(self.low), math.log(self.high)

    def to_internal(self, value: float) -> float:
        return math.log(value)

    def emit(self, internal: float) -> Any:
        return float(np.clip(math.exp(internal), self.low, self.high))

    def grid(self, points: int) -> List[Any]:
        return [float(v) for v in np.geomspace(self.low, self.high, points)]


@dataclass(frozen=True)
class QUniform(Uniform):
    """Continuous in [low, high], rounded to multiples of ``q`` on emission."""

    q: float = 1.0
    kind: ClassVar[str] = "quniform"

    def __post_init__(self) -> None:
        if self.q <= 0:
            raise HpoError(f"quniform needs q > 0, got {self.q}")
        super().__post_init__()

    def _integral(self) -> bool:
        return float(self.q).is_integer() and float(self.low).is_integer()

    def emit(self, internal: float) -> Any:
        value = round(float(internal) / self.q) * self.q
        value = float(np.clip(value, self.low, self.high))
        return int(round(value)) if self._integral() else value

    def grid(self, points: int) -> List[Any]:
        values = sorted({self.emit(v) for v in np.arange(self.low, self.high + self.q / 2, self.q)})
        if len(values) <= points:
            return values
        picks = np.linspace(0, len(values) - 1, points).round().astype(int)
        return [values[i] for i in picks]


@dataclass(frozen=True)
class Choice:
    values: Tuple[Any, ...]
    kind: ClassVar[str] = "choice"

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", tuple(self.values))
        if not self.values:
            raise HpoError("choice needs at least one value")

    def index_of(self, value: Any) -> int:
        try:
            return self.values.index(value)
        except ValueError as e:
            raise HpoError(f"{value!r} is not one of {list(self.values)}") from e

    def sample(self, rng: np.random.Generator) -> Any:
        return self.values[int(rng.integers(len(self.values)))]

    def grid(self, points: int) -> List[Any]:
        return list(self.values)


Dimension = Uniform | Choice

_KINDS = {"uniform": Uniform, "loguniform": LogUniform, "quniform": QUniform, "choice": Choice}


def dimension_from_dict(data: Mapping[str, Any]) -> Dimension:
    data = dict(data)
    kind = data.pop("kind", None)
    if kind not in _KINDS:
        raise HpoError(f"unknown dimension kind '{kind}'; use one of {sorted(_KINDS)}")
    try:
        return _KINDS[kind](**data)
    except TypeError as e:
        raise HpoError(f"bad {kind} dimension: {e}") from e


@dataclass(frozen=True)
class SearchSpace:
    dims: Dict[str, Dimension] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.dims:
            raise HpoError("search space has no dimensions")

    @property
    def names(self) -> List[str]:
        return list(self.dims)

    def contains(self, params: Mapping[str, Any]) -> bool:
        if set(params) != set(self.dims):
            return False
        for name, dim in self.dims.items():
            v = params[name]
            if isinstance(dim, Choice):
                if v not in dim.values:
                    return False
            elif not dim.low <= v <= dim.high:
                return False
        return True

    def to_dict(self) -> Dict[str, Any]:
        out = {}
        for name, dim in self.dims.items():
            d = {"kind": dim.kind, **dim.__dict__}
            if isinstance(dim, Choice):
                d["values"] = list(dim.values)
            out[name] = d
        return out

    @classmethod
    def from_dict(cls, data: Mapping[str, Mapping[str, Any]]) -> "SearchSpace":
        return cls({name: dimension_from_dict(d) for name, d in data.items()})


def suggest_random(space: SearchSpace, seed: int, index: int) -> Params:
    """Independent prior draws, reproducible per ``(seed, index)``."""
    rng = np.random.default_rng([seed, index])
    return {name: dim.sample(rng) for name, dim in space.dims.items()}


def grid_size(space: SearchSpace, points_per_dim: int) -> int:
    return int(np.prod([len(d.grid(points_per_dim)) for d in space.dims.values()]))


def suggest_grid(space: SearchSpace, index: int, points_per_dim: int = 5) -> Params:
    """The ``index``-th point of the full grid, first dimension slowest."""
    if points_per_dim < 2:
        raise HpoError(f"points_per_dim must be >= 2, got {points_per_dim}")
    axes: List[Sequence[Any]] = [d.grid(points_per_dim) for d in space.dims.values()]
    total = int(np.prod([len(a) for a in axes]))
    if not 0 <= index < total:
        raise HpoError(f"grid index {index} outside [0, {total})")
    point = next(itertools.islice(itertools.product(*axes), index, None))
    return dict(zip(space.dims, point))
