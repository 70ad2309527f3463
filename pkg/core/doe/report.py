# -*- coding: utf-8 -*-
"""Seed-median summaries and the markdown report of a run directory."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from core.config import CSV_FLOAT_FORMAT
from core.doe.hpo_phase import PhaseRow
from core.doe.runner import ResultRow
from core.evaluation import METRIC_NAMES, MetricSet

REPORT_METRICS = ("accuracy", "precision", "recall", "f1", "roc_auc")
UNDEFINED_NOTE = "\\* undefined (0/0), shown as 0.00"


@dataclass(frozen=True)
class SummaryRow:
    dataset: str
    leakage_mode: str
    cell: str
    model: str
    n_seeds: int
    metrics: MetricSet
    threshold: float
    time_ms: float


def _median(values: Sequence[Optional[float]]) -> Optional[float]:
    defined = [v for v in values if v is not None]
    return float(np.median(defined)) if defined else None


def summarize(rows: Sequence[ResultRow]) -> List[SummaryRow]:
    """Median over seeds per (dataset, leakage mode, cell, model), in first-seen order.
    Undefined values are left out of the median."""
    groups: Dict[Tuple[str, str, str, str], List[ResultRow]] = {}
    for r in rows:
        groups.setdefault((r.dataset, r.leakage_mode, r.cell, r.model), []).append(r)
    out = []
    for (dataset, mode, cell, model), members in groups.items():
        metrics = MetricSet(
            **{m: _median([r.metrics.get(m) for r in members]) for m in METRIC_NAMES + ("roc_auc",)}
        )
        out.append(
            SummaryRow(
                dataset, mode, cell, model, len(members), metrics,
                float(np.median([r.threshold for r in members])),
                float(np.median([r.time_ms for r in members])),
            )
        )
    return out


def write_summary_csv(rows: Sequence[SummaryRow], path: str | Path) -> Path:
    def fmt(v: Optional[float]) -> str:
        return "" if v is None else CSV_FLOAT_FORMAT.format(v)

    records = [
        {
            "dataset": r.dataset,
            "leakage_mode": r.leakage_mode,
            "cell": r.cell,
            "model": r.model,
            "n_seeds": r.n_seeds,
            **{k: fmt(v) for k, v in r.metrics.to_dict().items()},
            "threshold": fmt(r.threshold),
            "time_ms": fmt(r.time_ms),
        }
        for r in rows
    ]
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    pd.DataFrame(records).to_csv(path, index=False)
    return path


def _cell(v: Optional[float]) -> Tuple[str, bool]:
    return ("0.00*", True) if v is None else (f"{v:.2f}", False)


def _table(header: Sequence[str], lines: List[List[str]]) -> List[str]:
    out = ["| " + " | ".join(header) + " |", "|" + "---|" * len(header)]
    out += ["| " + " | ".join(line) + " |" for line in lines]
    return out


def render_report(summary: Sequence[SummaryRow], phase2: Sequence[PhaseRow] = ()) -> str:
    """Markdown tables in the layout of the published DOE tables; undefined
    metrics render as ``0.00*`` with a footnote."""
    text: List[str] = []
    footnote = False
    by_table: Dict[Tuple[str, str], List[SummaryRow]] = {}
    for r in summary:
        by_table.setdefault((r.dataset, r.leakage_mode), []).append(r)

    for (dataset, mode), rows in by_table.items():
        text += [f"## {dataset} ({mode})", ""]
        lines = []
        for r in rows:
            cells = []
            for m in REPORT_METRICS:
                s, undefined = _cell(r.metrics.get(m))
                footnote |= undefined
                cells.append(s)
            lines.append([r.cell, r.model, *cells, f"{r.threshold:.2f}", f"{r.time_ms:.0f}"])
        text += _table(["Cell", "Model", "Accuracy", "Precision", "Recall", "F1", "ROC AUC", "Threshold", "Time (ms)"], lines)
        text.append("")

    if phase2:
        text += ["## Hyper-parameter optimization", ""]
        lines = []
        for r in phase2:
            cells = []
            for m in REPORT_METRICS:
                s, undefined = _cell(r.metrics.get(m))
                footnote |= undefined
                cells.append(s)
            cv = "" if r.cv_loss is None else f"{r.cv_loss:.4f}"
            lines.append([f"Phase {r.phase}", r.cell, r.model, *cells, f"{r.threshold:.2f}", cv])
        text += _table(["Phase", "Cell", "Model", "Accuracy", "Precision", "Recall", "F1", "ROC AUC", "Threshold", "CV loss"], lines)
        text.append("")

    if footnote:
        text.append(UNDEFINED_NOTE)
    return "\n".join(text).rstrip() + "\n"
