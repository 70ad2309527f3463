# -*- coding: utf-8 -*-
"""
core.doe.plan

Experiment grids, learner rosters and the plan that ties them to a dataset.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

from core.config import DEFAULT_AUGMENT_DEGREE, DEFAULT_SEED, DEFAULT_TEST_FRACTION, SYNTHETIC_RESIZE
from core.engineering import LeakageMode, ThermalToggles, TransformRecipe
from core.engineering.thermal import DEFAULT_OPS
from core.exceptions import ConfigError


class DatasetKind(str, Enum):
    BLOOD = "blood"
    EIT = "eit"
    THERMAL = "thermal"
    SYNTHETIC = "synthetic"

    @property
    def is_image(self) -> bool:
        return self in (DatasetKind.THERMAL, DatasetKind.SYNTHETIC)


TABULAR_ROSTER: Tuple[str, ...] = ("linear", "logistic", "knn", "svm", "tree", "forest", "gbt_x", "gbt_l", "mlp")
THERMAL_ROSTER: Tuple[str, ...] = ("cnn", "mlp", "logistic", "forest")


def tabular_grid(
    leakage_mode: LeakageMode | str = LeakageMode.PAPER_FAITHFUL,
    augment_degree: int = DEFAULT_AUGMENT_DEGREE,
) -> List[TransformRecipe]:
    """All 16 on/off combinations of scale, augment, expand and polynomial,
    ``original`` first and everything-on last."""
    return [
        TransformRecipe(
            scale=s,
            augment=a,
            augment_degree=augment_degree,
            expand=e,
            polynomial=p,
            leakage_mode=LeakageMode(leakage_mode),
        )
        for s, a, e, p in itertools.product((False, True), repeat=4)
    ]


def thermal_grid() -> List[ThermalToggles]:
    return [ThermalToggles(mask=m, augment=a, normalize=n) for m, a, n in itertools.product((False, True), repeat=3)]


@dataclass(frozen=True)
class RosterEntry:
    """A registered learner plus parameter overrides on top of its defaults."""

    name: str
    params: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {"name": self.name, "params": dict(self.params)}


@dataclass(frozen=True)
class ThermalSettings:
    size: Tuple[int, int] = SYNTHETIC_RESIZE
    ops: Tuple[str, ...] = DEFAULT_OPS
    degree: int = DEFAULT_AUGMENT_DEGREE
    normalize_mode: str = "per_image"
    bounds: Optional[Tuple[float, float]] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "size": list(self.size),
            "ops": list(self.ops),
            "degree": self.degree,
            "normalize_mode": self.normalize_mode,
            "bounds": list(self.bounds) if self.bounds else None,
        }


Cell = Union[TransformRecipe, ThermalToggles]


@dataclass(frozen=True)
class ExperimentPlan:
    dataset_id: str
    kind: DatasetKind
    grid: Tuple[Cell, ...]
    roster: Tuple[RosterEntry, ...]
    seeds: Tuple[int, ...] = (DEFAULT_SEED,)
    test_fraction: float = DEFAULT_TEST_FRACTION
    stratified: bool = True
    thermal: ThermalSettings = field(default_factory=ThermalSettings)

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", DatasetKind(self.kind))
        object.__setattr__(self, "grid", tuple(self.grid))
        object.__setattr__(self, "roster", tuple(self.roster))
        object.__setattr__(self, "seeds", tuple(int(s) for s in self.seeds))
        if not self.grid:
            raise ConfigError("experiment grid is empty", path="grid")
        if not self.roster:
            raise ConfigError("learner roster is empty", path="roster")
        if not self.seeds:
            raise ConfigError("at least one seed is required", path="seeds")
        expected = ThermalToggles if self.kind.is_image else TransformRecipe
        if not all(isinstance(c, expected) for c in self.grid):
            raise ConfigError(f"{self.kind.value} plans take {expected.__name__} cells", path="grid")

    @property
    def n_jobs(self) -> int:
        return len(self.grid) * len(self.seeds)


def default_roster(kind: DatasetKind, names: Optional[Sequence[str]] = None) -> Tuple[RosterEntry, ...]:
    chosen = names or (THERMAL_ROSTER if DatasetKind(kind).is_image else TABULAR_ROSTER)
    return tuple(RosterEntry(n) for n in chosen)
