# -*- coding: utf-8 -*-
"""Threshold sweeps and their CSV curves."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Tuple

import numpy as np
import pandas as pd

from core.config import CSV_FLOAT_FORMAT, SWEEP_HI, SWEEP_LO, SWEEP_SELECT_IN, SWEEP_STEP
from core.evaluation.metrics import METRIC_NAMES, MetricSet, confusion_at, metric_set, roc_auc
from core.exceptions import ModelError

CURVE_COLUMNS = ("threshold",) + METRIC_NAMES


@dataclass(frozen=True)
class CurvePoint:
    threshold: float
    metrics: MetricSet


@dataclass(frozen=True)
class SweepResult:
    curve: List[CurvePoint]
    best_threshold: float
    best: MetricSet

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            [{"threshold": p.threshold, **{m: p.metrics.get(m) for m in METRIC_NAMES}} for p in self.curve],
            columns=list(CURVE_COLUMNS),
        )


def sweep_grid(lo: float, hi: float, step: float) -> np.ndarray:
    if step <= 0:
        raise ModelError(f"sweep step must be > 0, got {step}")
    n = int(np.floor((hi - lo) / step + 1e-9))
    # rounded so thresholds print exactly
    return np.round(lo + step * np.arange(n + 1), 10)


def threshold_sweep(
    scores: np.ndarray,
    labels: np.ndarray,
    lo: float = SWEEP_LO,
    hi: float = SWEEP_HI,
    step: float = SWEEP_STEP,
    select_in: Tuple[float, float] = SWEEP_SELECT_IN,
    by: str = "f1",
) -> SweepResult:
    """Metrics at every grid threshold; the best threshold maximizes
    ``by`` within ``select_in`` (undefined counts as -inf), lowest
    threshold first on ties. ROC AUC is attached when both classes occur."""
    labels = np.asarray(labels)
    curve = [CurvePoint(float(t), metric_set(confusion_at(scores, labels, t))) for t in sweep_grid(lo, hi, step)]
    eligible = [p for p in curve if select_in[0] - 1e-12 <= p.threshold <= select_in[1] + 1e-12] or curve

    def key(p: CurvePoint) -> float:
        v = p.metrics.get(by)
        return -np.inf if v is None else v

    best = eligible[0]
    for p in eligible[1:]:
        if key(p) > key(best):
            best = p
    auc: Optional[float] = roc_auc(scores, labels) if 0 < labels.sum() < labels.size else None
    return SweepResult(curve, best.threshold, best.metrics.with_auc(auc))


def _fmt(value: Optional[float]) -> str:
    return "" if value is None else CSV_FLOAT_FORMAT.format(value)


def write_curve_csv(result: SweepResult, path: str | Path) -> Path:
    """Fixed 6-decimal columns; undefined metrics are left empty."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = result.to_frame()
    frame = frame.apply(lambda col: col.map(lambda v: _fmt(None if pd.isna(v) else float(v))))
    frame.to_csv(path, index=False)
    return path
