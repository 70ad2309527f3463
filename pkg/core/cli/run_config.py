# -*- coding: utf-8 -*-
"""
core.cli.run_config

Run configuration read from JSON or YAML (``yaml.safe_load`` accepts
both). Every field has a default except the dataset kind and its input
path; unknown keys are rejected with their dotted path. ``to_dict`` is
the echo written to each run directory and parses back to an equal
config.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Optional, Tuple

import yaml

from core.config import (
    DEFAULT_AUGMENT_DEGREE,
    DEFAULT_FOLDS,
    DEFAULT_HPO_ITERS,
    DEFAULT_RESIZE,
    DEFAULT_SEED,
    DEFAULT_TEST_FRACTION,
    RESULTS_ROOT,
    SYNTHETIC_RESIZE,
    data_dir,
)
from core.bioheat import SyntheticParams
from core.dataset import EitLabelMode
from core.doe import DatasetKind, RosterEntry, ThermalSettings, default_roster, tabular_grid, thermal_grid
from core.doe.plan import Cell
from core.engineering import LeakageMode
from core.engineering.thermal import DEFAULT_OPS
from core.evaluation import METRIC_NAMES
from core.exceptions import ConfigError, ModelError
from core.hpo import SPACES, SearchAlgo
from core.learners import get_learner
from core.logger import logger

# Per-kind defaults for the public exports.
LABEL_COLUMNS = {DatasetKind.BLOOD: "Classification", DatasetKind.EIT: "Class"}
POSITIVE_LABELS = {DatasetKind.BLOOD: "2", DatasetKind.EIT: "car"}
HPO_CELLS = {DatasetKind.BLOOD: "augmented+expanded", DatasetKind.EIT: "scaled+expanded"}


@dataclass(frozen=True)
class HpoConfig:
    iters: int = DEFAULT_HPO_ITERS
    algo: SearchAlgo = SearchAlgo.TPE
    folds: int | str = DEFAULT_FOLDS
    metric: str = "accuracy"
    families: Tuple[str, ...] = ("gbt_x", "gbt_l")
    cell: str = ""

    def to_dict(self) -> Dict[str, Any]:
        return {
            "iters": self.iters,
            "algo": self.algo.value,
            "folds": self.folds,
            "metric": self.metric,
            "families": list(self.families),
            "cell": self.cell,
        }


@dataclass(frozen=True)
class SimulateConfig:
    healthy: int = 20
    tumor: int = 20
    images_per_patient: int = 4
    size: Tuple[int, int] = SYNTHETIC_RESIZE
    noise_std: float = 0.02
    resolution: float = SyntheticParams.resolution
    width: float = SyntheticParams.width

    def to_dict(self) -> Dict[str, Any]:
        return {
            "healthy": self.healthy,
            "tumor": self.tumor,
            "images_per_patient": self.images_per_patient,
            "size": list(self.size),
            "noise_std": self.noise_std,
            "resolution": self.resolution,
            "width": self.width,
        }


@dataclass(frozen=True)
class RunConfig:
    dataset: DatasetKind
    name: str = ""
    csv: Optional[str] = None
    label_column: str = "label"
    positive_label: Optional[str] = None
    eit_label_mode: EitLabelMode = EitLabelMode.TWO
    drop_con_adi: bool = False
    thermal_dir: Optional[str] = None
    seeds: Tuple[int, ...] = (DEFAULT_SEED,)
    test_fraction: float = DEFAULT_TEST_FRACTION
    stratified: bool = True
    leakage_mode: LeakageMode = LeakageMode.PAPER_FAITHFUL
    augment_degree: int = DEFAULT_AUGMENT_DEGREE
    cells: Tuple[str, ...] = ()
    roster: Tuple[RosterEntry, ...] = ()
    hpo: HpoConfig = field(default_factory=HpoConfig)
    thermal: ThermalSettings = field(default_factory=ThermalSettings)
    simulate: SimulateConfig = field(default_factory=SimulateConfig)
    out: str = str(RESULTS_ROOT)
    run_id: str = ""

    @property
    def run_dir(self) -> Path:
        return Path(self.out) / self.run_id

    def grid(self, leakage_mode: Optional[LeakageMode] = None) -> List[Cell]:
        """The configured cells, in canonical grid order."""
        if self.dataset.is_image:
            cells: List[Cell] = list(thermal_grid())
        else:
            cells = list(tabular_grid(leakage_mode or self.leakage_mode, self.augment_degree))
        if self.cells:
            cells = [c for c in cells if c.label in self.cells]
        return cells

    def to_dict(self) -> Dict[str, Any]:
        return {
            "dataset": self.dataset.value,
            "name": self.name,
            "csv": self.csv,
            "label_column": self.label_column,
            "positive_label": self.positive_label,
            "eit_label_mode": self.eit_label_mode.value,
            "drop_con_adi": self.drop_con_adi,
            "thermal_dir": self.thermal_dir,
            "seeds": list(self.seeds),
            "test_fraction": self.test_fraction,
            "stratified": self.stratified,
            "leakage_mode": self.leakage_mode.value,
            "augment_degree": self.augment_degree,
            "cells": list(self.cells),
            "roster": [e.to_dict() for e in self.roster],
            "hpo": self.hpo.to_dict(),
            "thermal": self.thermal.to_dict(),
            "simulate": self.simulate.to_dict(),
            "out": self.out,
            "run_id": self.run_id,
        }


# ── field readers ───────────────────────────────────────────────────


def _join(prefix: str, key: str) -> str:
    return f"{prefix}.{key}" if prefix else key


def _section(data: Any, allowed: Iterable[str], path: str) -> Dict[str, Any]:
    if not isinstance(data, Mapping):
        raise ConfigError(f"expected a mapping, got {type(data).__name__}", path=path or None)
    allowed = set(allowed)
    for key in data:
        if key not in allowed:
            raise ConfigError(f"unknown key '{key}'", path=_join(path, str(key)))
    return dict(data)


def _int(value: Any, path: str, minimum: Optional[int] = None) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"expected an integer, got {value!r}", path=path)
    if minimum is not None and value < minimum:
        raise ConfigError(f"must be >= {minimum}, got {value}", path=path)
    return value


def _float(value: Any, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"expected a number, got {value!r}", path=path)
    return float(value)


def _bool(value: Any, path: str) -> bool:
    if not isinstance(value, bool):
        raise ConfigError(f"expected true/false, got {value!r}", path=path)
    return value


def _str(value: Any, path: str) -> str:
    if not isinstance(value, str):
        raise ConfigError(f"expected a string, got {value!r}", path=path)
    return value


def _enum(enum_cls, value: Any, path: str):
    try:
        return enum_cls(value)
    except ValueError:
        choices = [e.value for e in enum_cls]
        raise ConfigError(f"expected one of {choices}, got {value!r}", path=path) from None


def _list(value: Any, path: str) -> list:
    if not isinstance(value, (list, tuple)):
        raise ConfigError(f"expected a list, got {value!r}", path=path)
    return list(value)


def _pair(value: Any, path: str) -> Tuple[int, int]:
    items = _list(value, path)
    if len(items) != 2:
        raise ConfigError(f"expected [height, width], got {value!r}", path=path)
    return (_int(items[0], f"{path}[0]", 1), _int(items[1], f"{path}[1]", 1))


def _resolve(raw: Optional[str], base_dir: Path, path: str, must_exist: bool) -> Optional[str]:
    if raw is None:
        return None
    candidate = Path(_str(raw, path)).expanduser()
    if not candidate.is_absolute():
        candidate = (data_dir() or base_dir) / candidate
    candidate = candidate.resolve()
    if must_exist and not candidate.exists():
        raise ConfigError(f"path does not exist: {candidate}", path=path)
    return str(candidate)


# ── sections ────────────────────────────────────────────────────────


def _roster(data: Any, kind: DatasetKind) -> Tuple[RosterEntry, ...]:
    if data is None:
        return default_roster(kind)
    entries = []
    for i, item in enumerate(_list(data, "roster")):
        path = f"roster[{i}]"
        if isinstance(item, str):
            item = {"name": item}
        item = _section(item, ("name", "params"), path)
        if "name" not in item:
            raise ConfigError("missing learner name", path=f"{path}.name")
        name = _str(item["name"], f"{path}.name")
        try:
            get_learner(name)
        except ModelError as exc:
            raise ConfigError(str(exc), path=f"{path}.name") from None
        params = item.get("params") or {}
        if not isinstance(params, Mapping):
            raise ConfigError(f"expected a mapping, got {params!r}", path=f"{path}.params")
        entries.append(RosterEntry(name, dict(params)))
    if not entries:
        raise ConfigError("learner roster is empty", path="roster")
    return tuple(entries)


def _hpo(data: Any, kind: DatasetKind) -> HpoConfig:
    data = _section(data or {}, HpoConfig.__dataclass_fields__, "hpo")
    folds = data.get("folds", DEFAULT_FOLDS)
    if folds != "holdout":
        folds = _int(folds, "hpo.folds", 2)
    metric = _str(data.get("metric", "accuracy"), "hpo.metric")
    if metric not in METRIC_NAMES + ("roc_auc",):
        raise ConfigError(f"unknown metric '{metric}'", path="hpo.metric")
    families = tuple(_str(f, f"hpo.families[{i}]") for i, f in enumerate(_list(data.get("families", ["gbt_x", "gbt_l"]), "hpo.families")))
    for i, family in enumerate(families):
        if family not in SPACES:
            raise ConfigError(f"no search space for '{family}'; known: {sorted(SPACES)}", path=f"hpo.families[{i}]")
    if not families:
        raise ConfigError("at least one family is required", path="hpo.families")
    return HpoConfig(
        iters=_int(data.get("iters", DEFAULT_HPO_ITERS), "hpo.iters", 1),
        algo=_enum(SearchAlgo, data.get("algo", SearchAlgo.TPE.value), "hpo.algo"),
        folds=folds,
        metric=metric,
        families=families,
        cell=_str(data.get("cell") or HPO_CELLS.get(kind, "original"), "hpo.cell"),
    )


def _thermal(data: Any, kind: DatasetKind) -> ThermalSettings:
    data = _section(data or {}, ThermalSettings.__dataclass_fields__, "thermal")
    default_size = DEFAULT_RESIZE if kind is DatasetKind.THERMAL else SYNTHETIC_RESIZE
    bounds = data.get("bounds")
    if bounds is not None:
        items = _list(bounds, "thermal.bounds")
        if len(items) != 2:
            raise ConfigError("expected [low, high]", path="thermal.bounds")
        bounds = (_float(items[0], "thermal.bounds[0]"), _float(items[1], "thermal.bounds[1]"))
    mode = _str(data.get("normalize_mode", "per_image"), "thermal.normalize_mode")
    if mode not in ("per_image", "fixed"):
        raise ConfigError(f"expected per_image or fixed, got '{mode}'", path="thermal.normalize_mode")
    if mode == "fixed" and bounds is None:
        raise ConfigError("fixed normalization needs bounds", path="thermal.bounds")
    return ThermalSettings(
        size=_pair(data.get("size", list(default_size)), "thermal.size"),
        ops=tuple(_str(o, f"thermal.ops[{i}]") for i, o in enumerate(_list(data.get("ops", list(DEFAULT_OPS)), "thermal.ops"))),
        degree=_int(data.get("degree", DEFAULT_AUGMENT_DEGREE), "thermal.degree", 2),
        normalize_mode=mode,
        bounds=bounds,
    )


def _simulate(data: Any) -> SimulateConfig:
    data = _section(data or {}, SimulateConfig.__dataclass_fields__, "simulate")
    noise = _float(data.get("noise_std", 0.02), "simulate.noise_std")
    if noise < 0:
        raise ConfigError("must be >= 0", path="simulate.noise_std")
    resolution = _float(data.get("resolution", SyntheticParams.resolution), "simulate.resolution")
    width = _float(data.get("width", SyntheticParams.width), "simulate.width")
    if resolution <= 0 or width < resolution:
        raise ConfigError(f"need 0 < resolution <= width, got {resolution} and {width}", path="simulate.resolution")
    return SimulateConfig(
        healthy=_int(data.get("healthy", 20), "simulate.healthy", 1),
        tumor=_int(data.get("tumor", 20), "simulate.tumor", 1),
        images_per_patient=_int(data.get("images_per_patient", 4), "simulate.images_per_patient", 1),
        size=_pair(data.get("size", list(SYNTHETIC_RESIZE)), "simulate.size"),
        noise_std=noise,
        resolution=resolution,
        width=width,
    )


def config_from_mapping(data: Any, base_dir: str | Path = ".") -> RunConfig:
    """Validate a raw mapping and fill every default."""
    data = _section(data, RunConfig.__dataclass_fields__, "")
    if "dataset" not in data:
        raise ConfigError("missing dataset kind", path="dataset")
    kind = _enum(DatasetKind, data["dataset"], "dataset")
    base_dir = Path(base_dir)

    csv = data.get("csv")
    thermal_dir = data.get("thermal_dir")
    if kind.is_image:
        if csv is not None:
            raise ConfigError(f"{kind.value} datasets read a directory, not a CSV", path="csv")
        if kind is DatasetKind.THERMAL and thermal_dir is None:
            raise ConfigError("thermal datasets need a directory", path="thermal_dir")
        thermal_dir = _resolve(thermal_dir, base_dir, "thermal_dir", must_exist=kind is DatasetKind.THERMAL)
    else:
        if csv is None:
            raise ConfigError(f"{kind.value} datasets need a CSV file", path="csv")
        if thermal_dir is not None:
            raise ConfigError(f"{kind.value} datasets do not read a directory", path="thermal_dir")
        csv = _resolve(csv, base_dir, "csv", must_exist=True)

    seeds = tuple(_int(s, f"seeds[{i}]", 0) for i, s in enumerate(_list(data.get("seeds", [DEFAULT_SEED]), "seeds")))
    if not seeds:
        raise ConfigError("at least one seed is required", path="seeds")
    test_fraction = _float(data.get("test_fraction", DEFAULT_TEST_FRACTION), "test_fraction")
    if not 0.0 < test_fraction < 1.0:
        raise ConfigError(f"must be in (0, 1), got {test_fraction}", path="test_fraction")

    positive = data.get("positive_label", POSITIVE_LABELS.get(kind))
    config = RunConfig(
        dataset=kind,
        name=_str(data.get("name") or kind.value, "name"),
        csv=csv,
        label_column=_str(data.get("label_column", LABEL_COLUMNS.get(kind, "label")), "label_column"),
        positive_label=None if positive is None else str(positive),
        eit_label_mode=_enum(EitLabelMode, data.get("eit_label_mode", EitLabelMode.TWO.value), "eit_label_mode"),
        drop_con_adi=_bool(data.get("drop_con_adi", False), "drop_con_adi"),
        thermal_dir=thermal_dir,
        seeds=seeds,
        test_fraction=test_fraction,
        stratified=_bool(data.get("stratified", True), "stratified"),
        leakage_mode=_enum(LeakageMode, data.get("leakage_mode", LeakageMode.PAPER_FAITHFUL.value), "leakage_mode"),
        augment_degree=_int(data.get("augment_degree", DEFAULT_AUGMENT_DEGREE), "augment_degree", 2),
        cells=tuple(_str(c, f"cells[{i}]") for i, c in enumerate(_list(data.get("cells", []), "cells"))),
        roster=_roster(data.get("roster"), kind),
        hpo=_hpo(data.get("hpo"), kind),
        thermal=_thermal(data.get("thermal"), kind),
        simulate=_simulate(data.get("simulate")),
        out=str(Path(_str(data.get("out", str(RESULTS_ROOT)), "out")).expanduser().resolve()),
        run_id=_str(data.get("run_id") or data.get("name") or kind.value, "run_id"),
    )

    known = {c.label for c in config.grid()}
    for i, label in enumerate(config.cells):
        if label not in known:
            raise ConfigError(f"unknown cell '{label}'; known: {sorted(known)}", path=f"cells[{i}]")
    if not kind.is_image and config.hpo.cell not in {c.label for c in tabular_grid()}:
        raise ConfigError(f"unknown cell '{config.hpo.cell}'", path="hpo.cell")
    return config


def parse_config(path: str | Path) -> RunConfig:
    """Read a JSON/YAML run config; relative paths resolve against the
    dataset root override or the config file's directory."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}", path=None)
    try:
        data = yaml.safe_load(path.read_text(encoding="utf-8"))
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from None
    config = config_from_mapping(data if data is not None else {}, path.resolve().parent)
    logger.debug(f"[Config] parsed {path}: dataset={config.dataset.value} run_id={config.run_id}")
    return config


def apply_overrides(config: RunConfig, **overrides: Any) -> RunConfig:
    """Replace scalar fields from command-line flags and re-validate.

    ``seed`` replaces the seed list, ``iters``/``healthy``/``tumor`` go
    to their sections; ``None`` values are ignored.
    """
    data = config.to_dict()
    for key, value in overrides.items():
        if value is None:
            continue
        if key == "seed":
            data["seeds"] = [value]
        elif key == "iters":
            data["hpo"]["iters"] = value
        elif key in ("healthy", "tumor"):
            data["simulate"][key] = value
        elif key == "out":
            data["out"] = str(value)
        else:
            raise ConfigError(f"no command-line override for '{key}'", path=key)
    return config_from_mapping(data)


def write_config_echo(config: RunConfig, run_dir: str | Path) -> Path:
    run_dir = Path(run_dir)
    run_dir.mkdir(parents=True, exist_ok=True)
    path = run_dir / "run_config.json"
    path.write_text(json.dumps(config.to_dict(), indent=2, sort_keys=True), encoding="utf-8")
    return path
