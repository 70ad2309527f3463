# -*- coding: utf-8 -*-
"""
core.dataset.splits

Seeded train/test partitions and stratified fold plans. The per-class
allocation helper is shared with the patient-level thermogram split.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, List, Sequence, Tuple

import numpy as np

from core.config import DEFAULT_VALIDATION_FRACTION
from core.dataset.tabular import TabularDataset, subset
from core.exceptions import DatasetError


def stratified_allocation(class_sizes: Sequence[int], fraction: float) -> List[int]:
    """How many members of each class go to the smaller side of a split.

    The total is round-half-up of ``fraction * n``; each class receives the
    floor of its own quota, at least 1 and at most ``size - 1``, and the
    remainder is handed out by largest fractional part (ties to the earlier
    class). Every class therefore lands within one instance of its share.
    """
    if not 0.0 < fraction < 1.0:
        raise DatasetError(f"split fraction must lie in (0, 1), got {fraction}")
    sizes = [int(s) for s in class_sizes]
    if any(s < 2 for s in sizes):
        raise DatasetError(f"every class needs at least 2 members to split, got sizes {sizes}")

    n = sum(sizes)
    k = len(sizes)
    total = int(math.floor(fraction * n + 0.5))
    total = min(max(total, k), n - k)

    quotas = [fraction * s for s in sizes]
    alloc = [min(max(int(math.floor(q)), 1), s - 1) for q, s in zip(quotas, sizes)]
    remainders = [q - a for q, a in zip(quotas, alloc)]

    # Largest remainder first; stable sort keeps the earlier class on ties.
    order_up = sorted(range(k), key=lambda c: -remainders[c])
    while sum(alloc) < total:
        for c in order_up:
            if sum(alloc) >= total:
                break
            if alloc[c] < sizes[c] - 1:
                alloc[c] += 1
                remainders[c] -= 1.0
        order_up = sorted(range(k), key=lambda c: -remainders[c])

    order_down = sorted(range(k), key=lambda c: remainders[c])
    while sum(alloc) > total:
        for c in order_down:
            if sum(alloc) <= total:
                break
            if alloc[c] > 1:
                alloc[c] -= 1
                remainders[c] += 1.0
        order_down = sorted(range(k), key=lambda c: remainders[c])

    return alloc


def split_indices(
    labels: np.ndarray,
    fraction: float,
    seed: int,
    stratified: bool = True,
) -> Tuple[np.ndarray, np.ndarray]:
    """Index-level split returning sorted ``(keep, held_out)`` index arrays."""
    labels = np.asarray(labels, dtype=np.int64)
    n = labels.shape[0]
    rng = np.random.default_rng(seed)

    if stratified:
        classes = np.unique(labels)
        members = [np.flatnonzero(labels == c) for c in classes]
        alloc = stratified_allocation([m.size for m in members], fraction)
        held = np.concatenate([rng.permutation(m)[:a] for m, a in zip(members, alloc)])
    else:
        if not 0.0 < fraction < 1.0:
            raise DatasetError(f"split fraction must lie in (0, 1), got {fraction}")
        if n < 2:
            raise DatasetError("need at least 2 rows to split")
        total = min(max(int(math.floor(fraction * n + 0.5)), 1), n - 1)
        held = rng.permutation(n)[:total]

    mask = np.zeros(n, dtype=bool)
    mask[held] = True
    return np.flatnonzero(~mask), np.flatnonzero(mask)


def train_test_split(
    ds: TabularDataset,
    test_fraction: float,
    seed: int,
    stratified: bool = True,
) -> Tuple[TabularDataset, TabularDataset]:
    """Disjoint, exhaustive partition; row order within each side is preserved."""
    train_idx, test_idx = split_indices(ds.labels, test_fraction, seed, stratified)
    return subset(ds, train_idx), subset(ds, test_idx)


@dataclass(frozen=True)
class FoldPlan:
    """Fold id per row. A holdout plan validates on fold 0 only."""

    k: int
    assignments: Tuple[int, ...]
    holdout: bool = False

    def __post_init__(self) -> None:
        if self.k < 2:
            raise DatasetError(f"fold plans need k >= 2, got {self.k}")
        ids = np.asarray(self.assignments, dtype=np.int64)
        if ids.size and (ids.min() < 0 or ids.max() >= self.k):
            raise DatasetError("fold ids must lie in [0, k)")
        if np.unique(ids).size != self.k:
            raise DatasetError("every fold must be non-empty")

    @classmethod
    def holdout_plan(
        cls,
        ds: TabularDataset,
        validation_fraction: float = DEFAULT_VALIDATION_FRACTION,
        seed: int = 0,
    ) -> "FoldPlan":
        """Single stratified train/validation split expressed as a plan."""
        _, val_idx = split_indices(ds.labels, validation_fraction, seed, stratified=True)
        ids = np.ones(ds.n, dtype=np.int64)
        ids[val_idx] = 0
        return cls(k=2, assignments=tuple(int(i) for i in ids), holdout=True)

    def folds(self) -> Iterator[Tuple[np.ndarray, np.ndarray]]:
        """Yield ``(train_idx, validation_idx)`` per validation fold."""
        ids = np.asarray(self.assignments, dtype=np.int64)
        for fold in range(1 if self.holdout else self.k):
            yield np.flatnonzero(ids != fold), np.flatnonzero(ids == fold)

    def fold_sizes(self) -> List[int]:
        return np.bincount(np.asarray(self.assignments), minlength=self.k).tolist()


def stratified_kfold(ds: TabularDataset, k: int, seed: int) -> FoldPlan:
    """Round-robin stratified assignment over shuffled class members.

    The round-robin counter runs across classes, so fold sizes differ by
    at most one overall and per class.
    """
    if k < 2:
        raise DatasetError(f"k must be >= 2, got {k}")
    rng = np.random.default_rng(seed)
    ids = np.empty(ds.n, dtype=np.int64)
    counter = 0
    for c in range(len(ds.label_names)):
        members = np.flatnonzero(ds.labels == c)
        if members.size == 0:
            continue
        if members.size < k:
            raise DatasetError(
                f"class '{ds.label_names[c]}' has {members.size} members, fewer than k={k}"
            )
        for idx in rng.permutation(members):
            ids[idx] = counter % k
            counter += 1
    return FoldPlan(k=k, assignments=tuple(int(i) for i in ids))
