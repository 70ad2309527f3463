# -*- coding: utf-8 -*-
"""
core.engineering.tabular

The four tabular enhancement techniques (scale, augment, expand,
polynomial) and the recipe that composes them for one DOE cell.
"""

from __future__ import annotations

import warnings
from dataclasses import asdict, dataclass
from enum import Enum
from itertools import combinations
from typing import Any, Dict, Mapping, Tuple

import numpy as np
from scipy import stats

from core.config import AUGMENT_MAX_RETRIES, DEFAULT_AUGMENT_DEGREE, MAX_POLYNOMIAL_FEATURES, POLYNOMIAL_DEGREE
from core.dataset import TabularDataset, concat, train_test_split
from core.exceptions import AugmentationError, EngineeringError
from core.logger import logger
from decorators import log_events

EXPANDED_FEATURES: Tuple[str, ...] = ("min", "max", "mean", "median", "std", "skewness", "kurtosis")


class LeakageMode(str, Enum):
    # augmentation on the pooled data before the train/test split
    PAPER_FAITHFUL = "paper_faithful"
    # augmentation confined to the training partition
    LEAK_FREE = "leak_free"


@dataclass(frozen=True)
class TransformRecipe:
    scale: bool = False
    augment: bool = False
    augment_degree: int = DEFAULT_AUGMENT_DEGREE
    expand: bool = False
    polynomial: bool = False
    polynomial_degree: int = POLYNOMIAL_DEGREE
    leakage_mode: LeakageMode = LeakageMode.PAPER_FAITHFUL

    def __post_init__(self) -> None:
        object.__setattr__(self, "leakage_mode", LeakageMode(self.leakage_mode))
        if self.augment_degree < 2:
            raise EngineeringError(f"augment_degree must be >= 2, got {self.augment_degree}")
        if self.polynomial_degree != 2:
            raise EngineeringError(f"only degree-2 polynomial features exist, got {self.polynomial_degree}")

    @property
    def label(self) -> str:
        """Stable cell name, e.g. ``original`` or ``scaled+expanded``."""
        parts = [
            name
            for flag, name in (
                (self.scale, "scaled"),
                (self.augment, "augmented"),
                (self.expand, "expanded"),
                (self.polynomial, "polynomial"),
            )
            if flag
        ]
        return "+".join(parts) if parts else "original"

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["leakage_mode"] = self.leakage_mode.value
        return data

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "TransformRecipe":
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise EngineeringError(f"unknown recipe field(s): {sorted(unknown)}")
        return cls(**dict(data))


@dataclass(frozen=True, eq=False)
class FittedScaler:
    means: np.ndarray
    stds: np.ndarray
    zero_variance: np.ndarray

    def transform(self, ds: TabularDataset) -> TabularDataset:
        if ds.d != self.means.shape[0]:
            raise EngineeringError(f"scaler fitted on d={self.means.shape[0]}, got d={ds.d}")
        # constant columns are only centered
        divisor = np.where(self.zero_variance, 1.0, self.stds)
        return ds.with_rows((ds.rows - self.means) / divisor, ds.feature_names)

    def inverse_transform(self, ds: TabularDataset) -> TabularDataset:
        if ds.d != self.means.shape[0]:
            raise EngineeringError(f"scaler fitted on d={self.means.shape[0]}, got d={ds.d}")
        multiplier = np.where(self.zero_variance, 1.0, self.stds)
        return ds.with_rows(ds.rows * multiplier + self.means, ds.feature_names)


def fit_scaler(ds: TabularDataset) -> FittedScaler:
    means = ds.rows.mean(axis=0)
    stds = ds.rows.std(axis=0, ddof=0)
    zero = stds == 0.0
    if zero.any():
        flagged = [ds.feature_names[j] for j in np.flatnonzero(zero)]
        logger.warning(f"[Engineering] zero-variance column(s) left centered only: {flagged}")
    return FittedScaler(means=means, stds=stds, zero_variance=zero)


def scale(train: TabularDataset, test: TabularDataset) -> Tuple[TabularDataset, TabularDataset, FittedScaler]:
    """Standardize both sets with statistics fitted on ``train`` only."""
    if train.d != test.d:
        raise EngineeringError(f"dimension mismatch: train d={train.d}, test d={test.d}")
    scaler = fit_scaler(train)
    return scaler.transform(train), scaler.transform(test), scaler


def _synthetic_capacity(class_rows: np.ndarray, limit: int) -> int:
    """Distinct donor-product rows not already present, capped at ``limit``."""
    product = 1
    for j in range(class_rows.shape[1]):
        product *= np.unique(class_rows[:, j]).size
        if product > limit + class_rows.shape[0]:
            return limit
    existing = np.unique(class_rows, axis=0).shape[0]
    return min(product - existing, limit)


@log_events("augment")
def augment(train: TabularDataset, degree: int, seed: int) -> TabularDataset:
    """Donor-copy augmentation.

    Synthetic rows are produced in ``degree - 1`` rounds; each round adds one
    row per original row, of the same class, whose feature ``j`` is copied
    from a uniformly drawn same-class donor. Rows are unique across the whole
    output; a row that stays a duplicate after the retry cap is dropped.
    """
    if degree < 2:
        raise AugmentationError(f"augmentation degree must be >= 2, got {degree}")

    rows, labels = train.rows, train.labels
    class_members: Dict[int, np.ndarray] = {}
    for c in np.unique(labels):
        members = np.flatnonzero(labels == c)
        if members.size < 2:
            raise AugmentationError(f"class '{train.label_names[c]}' has fewer than 2 rows")
        needed = (degree - 1) * members.size
        if _synthetic_capacity(rows[members], needed) < needed:
            raise AugmentationError(
                f"class '{train.label_names[c]}' cannot yield {needed} unique synthetic rows "
                "from its per-column value sets"
            )
        class_members[int(c)] = members

    rng = np.random.default_rng(seed)
    seen = {row.tobytes() for row in rows}
    out_rows = [rows]
    out_labels = [labels]
    dropped = 0
    d = train.d
    cols = np.arange(d)

    for _ in range(1, degree):
        new_rows = []
        new_labels = []
        for i in range(train.n):
            c = int(labels[i])
            donors = rows[class_members[c]]
            for _attempt in range(AUGMENT_MAX_RETRIES):
                picks = rng.integers(0, donors.shape[0], size=d)
                candidate = donors[picks, cols]
                key = candidate.tobytes()
                if key not in seen:
                    seen.add(key)
                    new_rows.append(candidate)
                    new_labels.append(c)
                    break
            else:
                dropped += 1
        if new_rows:
            out_rows.append(np.vstack(new_rows))
            out_labels.append(np.asarray(new_labels, dtype=np.int64))

    if dropped:
        logger.warning(f"[Augment] dropped {dropped} synthetic row(s) after {AUGMENT_MAX_RETRIES} retries each")

    return TabularDataset(train.feature_names, np.vstack(out_rows), np.concatenate(out_labels), train.label_names)


def expand(ds: TabularDataset) -> TabularDataset:
    """Append seven row-wise statistics of the original feature columns."""
    if ds.d < 2:
        raise EngineeringError(f"expand needs d >= 2, got d={ds.d}")
    clash = set(EXPANDED_FEATURES) & set(ds.feature_names)
    if clash:
        raise EngineeringError(f"expanded column name(s) already present: {sorted(clash)}")

    x = ds.rows
    std = x.std(axis=1, ddof=0)
    constant = np.ptp(x, axis=1) == 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        skewness = stats.skew(x, axis=1, bias=True)
        kurtosis = stats.kurtosis(x, axis=1, fisher=True, bias=True)
    skewness = np.where(constant, 0.0, skewness)
    kurtosis = np.where(constant, 0.0, kurtosis)
    if constant.any():
        logger.warning(f"[Engineering] {int(constant.sum())} zero-variance row(s): skewness/kurtosis set to 0")

    extra = np.column_stack([x.min(axis=1), x.max(axis=1), x.mean(axis=1), np.median(x, axis=1), std, skewness, kurtosis])
    return ds.with_rows(np.hstack([x, extra]), ds.feature_names + EXPANDED_FEATURES)


def polynomial_feature_count(d: int) -> int:
    return 2 * d + d * (d - 1) // 2


def polynomial(ds: TabularDataset, degree: int = POLYNOMIAL_DEGREE) -> TabularDataset:
    """Originals, then every ``fi*fj`` with i < j, then every square ``fi*fi``."""
    if degree != 2:
        raise EngineeringError(f"only degree 2 is supported, got {degree}")
    width = polynomial_feature_count(ds.d)
    if width > MAX_POLYNOMIAL_FEATURES:
        raise EngineeringError(f"polynomial expansion would create {width} columns")

    x = ds.rows
    names = list(ds.feature_names)
    columns = [x]
    pairs = list(combinations(range(ds.d), 2))
    if pairs:
        i, j = np.array(pairs).T
        columns.append(x[:, i] * x[:, j])
        names += [f"{ds.feature_names[a]}*{ds.feature_names[b]}" for a, b in pairs]
    columns.append(x * x)
    names += [f"{n}*{n}" for n in ds.feature_names]

    out = np.hstack(columns)
    if not np.all(np.isfinite(out)):
        raise EngineeringError("polynomial features overflowed to non-finite values")
    return ds.with_rows(out, names)


@log_events("apply_recipe")
def apply_recipe(
    train: TabularDataset,
    test: TabularDataset,
    recipe: TransformRecipe,
    seed: int,
) -> Tuple[TabularDataset, TabularDataset]:
    """expand -> polynomial -> augment -> scale; scaler always fitted on train.

    In paper-faithful mode augmentation runs on train+test pooled and the
    pool is re-split with the original test share and the same seed.
    """
    if recipe.expand:
        train, test = expand(train), expand(test)
    if recipe.polynomial:
        train, test = polynomial(train, recipe.polynomial_degree), polynomial(test, recipe.polynomial_degree)
    if recipe.augment:
        if recipe.leakage_mode is LeakageMode.PAPER_FAITHFUL:
            pooled = augment(concat(train, test), recipe.augment_degree, seed)
            train, test = train_test_split(pooled, test.n / (train.n + test.n), seed, stratified=True)
        else:
            train = augment(train, recipe.augment_degree, seed)
    if recipe.scale:
        train, test, _ = scale(train, test)
    return train, test
