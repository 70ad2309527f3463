"""Scenarios for confusion counts, derived metrics, ROC AUC and threshold sweeps."""
from __future__ import annotations

from typing import Any, List, Mapping, Tuple

import numpy as np
import pandas as pd
from sklearn.metrics import roc_auc_score

from core.evaluation import (
    CURVE_COLUMNS,
    ConfusionMatrix,
    confusion_at,
    f1_from_precision_recall,
    metric_set,
    roc_auc,
    sweep_grid,
    threshold_sweep,
    write_curve_csv,
)
from core.exceptions import ModelError
from diagnostic.environments._fixtures import brute_auc
from diagnostic.framework import ExecutionResult, ScenarioCase, verdict

GROUP = "evaluation"

SEPARATED = (np.array([0.1, 0.2, 0.7, 0.9]), np.array([0, 0, 1, 1]))


def _checks(result: ExecutionResult, inputs, context) -> Tuple[str, str]:
    return result.output


def _confusion_examples(inputs: Mapping[str, Any]) -> Tuple[str, str]:
    scores, labels = np.array([0.9, 0.1]), np.array([1, 0])
    half = confusion_at(scores, labels, 0.5)
    everything = confusion_at(scores, labels, 0.0)
    nothing = confusion_at(scores, labels, 1.01)
    boundary = confusion_at(np.array([0.5]), np.array([1]), 0.5)
    return verdict(
        [
            ((half.tp, half.fp, half.tn, half.fn) == (1, 0, 1, 0), f"t=0.5 gave {half}"),
            ((everything.tp, everything.fp) == (1, 1), f"t=0 gave {everything}"),
            ((nothing.tn, nothing.fn) == (1, 1), f"t>1 gave {nothing}"),
            (boundary.tp == 1, "score equal to the threshold must count as positive"),
            (half.total == 2, "counts do not add up"),
        ],
        "Predicted positive iff score >= threshold.",
    )


def _derived_metrics(inputs: Mapping[str, Any]) -> Tuple[str, str]:
    recall = metric_set(ConfusionMatrix(tp=3, fp=1, tn=4, fn=1))
    silent = metric_set(ConfusionMatrix(tp=0, fp=0, tn=5, fn=2))
    f1 = f1_from_precision_recall(0.98, 1.0)
    return verdict(
        [
            (recall.recall == 0.75, f"recall {recall.recall}"),
            (recall.precision == 0.75 and recall.specificity == 0.8, f"{recall}"),
            (abs(recall.accuracy - 7 / 9) < 1e-12, f"accuracy {recall.accuracy}"),
            (abs(recall.npv - 0.8) < 1e-12, f"npv {recall.npv}"),
            (abs(f1 - 0.98989898989899) < 1e-12, f"f1 {f1}"),
            (silent.precision is None, "precision with no positive predictions must be undefined"),
            (silent.recall == 0.0 and silent.f1 == 0.0, f"{silent}"),
            (f1_from_precision_recall(None, 1.0) is None, "f1 of an undefined precision"),
            (f1_from_precision_recall(0.0, 0.0) is None, "f1 of zero precision and recall"),
        ],
        "Ratios follow their definitions, zero denominators are undefined.",
    )


def _metric_f1_matches_formula(inputs: Mapping[str, Any]) -> Tuple[str, str]:
    rng = np.random.default_rng(6)
    bad = []
    for _ in range(200):
        tp, fp, tn, fn = (int(v) for v in rng.integers(0, 20, size=4))
        if tp == 0:
            tp = 1
        m = metric_set(ConfusionMatrix(tp, fp, tn, fn))
        f1 = f1_from_precision_recall(m.precision, m.recall)
        if abs(f1 - m.f1) > 1e-12:
            bad.append((tp, fp, tn, fn))
    return verdict([(not bad, f"f1 mismatch for {bad[:3]}")], "Count-based f1 agrees with the harmonic mean.")


def _auc_examples(inputs: Mapping[str, Any]) -> Tuple[str, str]:
    mixed = roc_auc(np.array([0.1, 0.35, 0.4, 0.8]), np.array([0, 1, 0, 1]))
    flat = roc_auc(np.full(6, 0.3), np.array([0, 1, 0, 1, 1, 0]))
    return verdict(
        [
            (roc_auc(*SEPARATED) == 1.0, "separated scores should give 1"),
            (roc_auc(1.0 - SEPARATED[0], SEPARATED[1]) == 0.0, "reversed scores should give 0"),
            (flat == 0.5, f"constant scores gave {flat}"),
            (mixed == 0.75, f"mixed example gave {mixed}"),
        ],
        "ROC AUC on hand-checked inputs.",
    )


def _auc_oracles(inputs: Mapping[str, Any]) -> Tuple[str, str]:
    rng = np.random.default_rng(11)
    worst_brute, worst_sklearn, worst_monotone = 0.0, 0.0, 0.0
    for _ in range(50):
        n = int(rng.integers(4, 60))
        labels = rng.integers(0, 2, size=n)
        labels[:2] = (0, 1)
        scores = np.round(rng.random(n), 1)
        auc = roc_auc(scores, labels)
        worst_brute = max(worst_brute, abs(auc - brute_auc(scores, labels)))
        worst_sklearn = max(worst_sklearn, abs(auc - roc_auc_score(labels, scores)))
        worst_monotone = max(worst_monotone, abs(auc - roc_auc(np.exp(3.0 * scores) - 2.0, labels)))
    return verdict(
        [
            (worst_brute < 1e-12, f"brute-force gap {worst_brute}"),
            (worst_sklearn < 1e-12, f"scikit-learn gap {worst_sklearn}"),
            (worst_monotone < 1e-12, f"monotone transform changed auc by {worst_monotone}"),
        ],
        "Rank AUC equals the pairwise count with ties at one half.",
    )


def _threshold_monotone(inputs: Mapping[str, Any]) -> Tuple[str, str]:
    rng = np.random.default_rng(2)
    scores, labels = rng.random(40), rng.integers(0, 2, size=40)
    counts = [confusion_at(scores, labels, t) for t in sweep_grid(0.0, 1.0, 0.05)]
    tp = [c.tp for c in counts]
    fp = [c.fp for c in counts]
    return verdict(
        [
            (all(a >= b for a, b in zip(tp, tp[1:])), f"tp not monotone {tp}"),
            (all(a >= b for a, b in zip(fp, fp[1:])), f"fp not monotone {fp}"),
        ],
        "Raising the threshold never adds positives.",
    )


def _sweep_separated(inputs: Mapping[str, Any]) -> Tuple[str, str]:
    result = threshold_sweep(*SEPARATED)
    thresholds = [p.threshold for p in result.curve]
    return verdict(
        [
            (len(result.curve) == 101, f"{len(result.curve)} curve points"),
            (thresholds[0] == 0.0 and thresholds[-1] == 1.0, "grid endpoints"),
            (result.best.accuracy == 1.0 and result.best.f1 == 1.0, f"best {result.best}"),
            (abs(result.best_threshold - 0.21) < 1e-9, f"best threshold {result.best_threshold}"),
            (result.best.roc_auc == 1.0, "auc not attached"),
        ],
        "Separated scores reach perfect accuracy at the lowest tied threshold.",
    )


def _sweep_selection_window(inputs: Mapping[str, Any]) -> Tuple[str, str]:
    scores, labels = np.array([0.05, 0.1, 0.15, 0.9]), np.array([1, 1, 0, 1])
    result = threshold_sweep(scores, labels, select_in=(0.2, 0.8), by="accuracy")
    single = threshold_sweep(np.array([0.4, 0.6]), np.array([1, 1]))
    return verdict(
        [
            (0.2 <= result.best_threshold <= 0.8, f"best threshold {result.best_threshold} outside the window"),
            (single.best.roc_auc is None, "auc must be absent for a single class"),
        ],
        "Best threshold is chosen inside the selection window.",
    )


def _curve_csv(inputs: Mapping[str, Any]) -> Tuple[str, str]:
    path = write_curve_csv(threshold_sweep(*SEPARATED), inputs["tmp_path"] / "out" / "curve.csv")
    lines = path.read_text(encoding="utf-8").splitlines()
    frame = pd.read_csv(path)
    return verdict(
        [
            (tuple(frame.columns) == CURVE_COLUMNS, f"columns {tuple(frame.columns)}"),
            (len(frame) == 101, f"{len(frame)} rows"),
            (lines[1] == "0.000000,0.500000,0.500000,1.000000,0.000000,,0.666667", f"first row {lines[1]}"),
            (lines[-1] == "1.000000,0.500000,,0.000000,1.000000,0.500000,0.000000", f"last row {lines[-1]}"),
        ],
        "Curve CSV has fixed columns, six decimals and blank undefined cells.",
    )


def _auc_single_class(inputs: Mapping[str, Any]) -> None:
    roc_auc(np.array([0.2, 0.4]), np.array([1, 1]))


def _length_mismatch(inputs: Mapping[str, Any]) -> None:
    confusion_at(np.array([0.2, 0.4]), np.array([1]), 0.5)


def _bad_step(inputs: Mapping[str, Any]) -> None:
    sweep_grid(0.0, 1.0, 0.0)


def _unknown_metric(inputs: Mapping[str, Any]) -> None:
    metric_set(ConfusionMatrix(1, 1, 1, 1)).get("youden")


def get_test_cases() -> List[ScenarioCase]:
    return [
        ScenarioCase("confusion counts at a threshold", GROUP, _confusion_examples, validator=_checks),
        ScenarioCase("derived metrics", GROUP, _derived_metrics, validator=_checks),
        ScenarioCase("f1 from counts and from ratios", GROUP, _metric_f1_matches_formula, validator=_checks),
        ScenarioCase("roc auc examples", GROUP, _auc_examples, validator=_checks),
        ScenarioCase("roc auc oracles", GROUP, _auc_oracles, validator=_checks),
        ScenarioCase("threshold monotonicity", GROUP, _threshold_monotone, validator=_checks),
        ScenarioCase("sweep on separated scores", GROUP, _sweep_separated, validator=_checks),
        ScenarioCase("sweep selection window", GROUP, _sweep_selection_window, validator=_checks),
        ScenarioCase("curve csv layout", GROUP, _curve_csv, validator=_checks),
        ScenarioCase("roc auc needs both classes", GROUP, _auc_single_class, expect_error=ModelError),
        ScenarioCase("scores and labels length mismatch", GROUP, _length_mismatch, expect_error=ModelError),
        ScenarioCase("sweep step must be positive", GROUP, _bad_step, expect_error=ModelError),
        ScenarioCase("unknown metric name", GROUP, _unknown_metric, expect_error=ModelError),
    ]
