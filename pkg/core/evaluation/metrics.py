# -*- coding: utf-8 -*-
"""
core.evaluation.metrics

Confusion matrices, the threshold metrics and the rank-based ROC AUC.
A metric whose denominator is zero is reported as ``None`` (undefined),
never as 0.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Dict, Optional

import numpy as np
from scipy.stats import rankdata

from core.exceptions import ModelError

METRIC_NAMES = ("accuracy", "precision", "recall", "specificity", "npv", "f1")


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fp: int
    tn: int
    fn: int

    def __post_init__(self) -> None:
        if min(self.tp, self.fp, self.tn, self.fn) < 0:
            raise ModelError(f"confusion counts must be non-negative: {self}")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


@dataclass(frozen=True)
class MetricSet:
    accuracy: Optional[float]
    precision: Optional[float]
    recall: Optional[float]
    specificity: Optional[float]
    npv: Optional[float]
    f1: Optional[float]
    roc_auc: Optional[float] = None

    def get(self, name: str) -> Optional[float]:
        if name not in METRIC_NAMES + ("roc_auc",):
            raise ModelError(f"unknown metric '{name}'")
        return getattr(self, name)

    def with_auc(self, auc: Optional[float]) -> "MetricSet":
        return MetricSet(**{**asdict(self), "roc_auc": auc})

    def to_dict(self) -> Dict[str, Optional[float]]:
        return asdict(self)


def _check_scores(scores: np.ndarray, labels: np.ndarray):
    scores = np.asarray(scores, dtype=np.float64).reshape(-1)
    labels = np.asarray(labels).reshape(-1)
    if scores.shape != labels.shape:
        raise ModelError(f"{scores.size} scores but {labels.size} labels")
    if scores.size == 0:
        raise ModelError("no scores to evaluate")
    if not np.isin(labels, (0, 1)).all():
        raise ModelError("labels must be binary 0/1")
    return scores, labels.astype(np.int64)


def confusion_at(scores: np.ndarray, labels: np.ndarray, threshold: float) -> ConfusionMatrix:
    """Predicted positive iff ``score >= threshold``."""
    scores, labels = _check_scores(scores, labels)
    pred = scores >= threshold
    pos = labels == 1
    return ConfusionMatrix(
        tp=int(np.sum(pred & pos)),
        fp=int(np.sum(pred & ~pos)),
        tn=int(np.sum(~pred & ~pos)),
        fn=int(np.sum(~pred & pos)),
    )


def _ratio(num: int, den: int) -> Optional[float]:
    return num / den if den else None


def f1_from_precision_recall(precision: Optional[float], recall: Optional[float]) -> Optional[float]:
    if precision is None or recall is None or precision + recall == 0:
        return None
    return 2.0 * precision * recall / (precision + recall)


def metric_set(cm: ConfusionMatrix) -> MetricSet:
    tp, fp, tn, fn = cm.tp, cm.fp, cm.tn, cm.fn
    return MetricSet(
        accuracy=_ratio(tp + tn, cm.total),
        precision=_ratio(tp, tp + fp),
        recall=_ratio(tp, tp + fn),
        specificity=_ratio(tn, tn + fp),
        npv=_ratio(tn, tn + fn),
        f1=_ratio(2 * tp, 2 * tp + fp + fn),
    )


def roc_auc(scores: np.ndarray, labels: np.ndarray) -> float:
    """Mann-Whitney estimate: share of (positive, negative) pairs ranked
    correctly, ties counting one half."""
    scores, labels = _check_scores(scores, labels)
    n_pos = int(labels.sum())
    n_neg = labels.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ModelError("ROC AUC needs both classes")
    ranks = rankdata(scores, method="average")
    u = ranks[labels == 1].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))
