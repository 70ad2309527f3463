# -*- coding: utf-8 -*-
"""
core.doe.runner

Phase-1 runner: for every seed one shared train/test split, then every
grid cell is engineered and every roster learner trained, scored by a
threshold sweep on the test partition and timed.

Cells are independent jobs and may run in a process pool; results are
reassembled in (seed, cell, roster) order so output never depends on
scheduling. A failing cell or learner is recorded and the run continues.
"""

from __future__ import annotations

import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from core.config import CSV_FLOAT_FORMAT
from core.dataset import TabularDataset, train_test_split
from core.engineering import (
    PatientRecord,
    TransformRecipe,
    apply_recipe,
    apply_thermal_toggles,
    patient_split,
    records_to_arrays,
)
from core.evaluation import METRIC_NAMES, MetricSet, threshold_sweep, write_curve_csv
from core.doe.plan import Cell, ExperimentPlan
from core.learners.base import dataset_arrays, get_learner
from core.logger import logger
from decorators import log_events

RESULT_COLUMNS = (
    ("dataset", "leakage_mode", "cell", "model", "seed")
    + METRIC_NAMES
    + ("roc_auc", "threshold", "time_ms")
)
FAILURE_COLUMNS = ("dataset", "leakage_mode", "cell", "model", "seed", "error")

Data = Union[TabularDataset, Sequence[PatientRecord]]


@dataclass(frozen=True)
class ResultRow:
    dataset: str
    leakage_mode: str
    cell: str
    model: str
    seed: int
    metrics: MetricSet
    threshold: float
    time_ms: float

    def to_record(self) -> Dict[str, Any]:
        return {
            "dataset": self.dataset,
            "leakage_mode": self.leakage_mode,
            "cell": self.cell,
            "model": self.model,
            "seed": self.seed,
            **self.metrics.to_dict(),
            "threshold": self.threshold,
            "time_ms": self.time_ms,
        }


@dataclass(frozen=True)
class FailureRecord:
    dataset: str
    leakage_mode: str
    cell: str
    model: str
    seed: int
    error: str


@dataclass
class DoeResult:
    rows: List[ResultRow] = field(default_factory=list)
    failures: List[FailureRecord] = field(default_factory=list)

    def extend(self, other: "DoeResult") -> None:
        self.rows.extend(other.rows)
        self.failures.extend(other.failures)


@dataclass(frozen=True)
class _CellJob:
    plan: ExperimentPlan
    seed: int
    cell_index: int
    train: Data
    test: Data
    curves_dir: Optional[Path]


def _leakage(cell: Cell) -> str:
    return cell.leakage_mode.value if isinstance(cell, TransformRecipe) else "patient_split"


def _engineer(job: _CellJob, cell: Cell) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    if isinstance(cell, TransformRecipe):
        train, test = apply_recipe(job.train, job.test, cell, job.seed)
        return (*dataset_arrays(train), *dataset_arrays(test))
    s = job.plan.thermal
    train, test = apply_thermal_toggles(
        job.train, job.test, cell, s.size, job.seed, s.ops, s.degree, s.normalize_mode, s.bounds
    )
    X_train, y_train, _ = records_to_arrays(train)
    X_test, y_test, _ = records_to_arrays(test)
    return X_train, y_train, X_test, y_test


def _inputs_for(entry_inputs: str, X: np.ndarray) -> np.ndarray:
    # tabular learners see images unrolled into rows
    return X.reshape(X.shape[0], -1) if entry_inputs == "tabular" and X.ndim > 2 else X


def curve_name(cell: str, model: str, seed: Optional[int] = None) -> str:
    return f"{cell}_{model}" + (f"_s{seed}" if seed is not None else "") + ".csv"


def _run_cell(job: _CellJob) -> DoeResult:
    plan = job.plan
    cell = plan.grid[job.cell_index]
    label, mode = cell.label, _leakage(cell)
    out = DoeResult()

    def fail(model: str, exc: BaseException) -> None:
        logger.warning(f"[DOE] {label}/{model} seed={job.seed} failed: {type(exc).__name__}: {exc}")
        out.failures.append(FailureRecord(plan.dataset_id, mode, label, model, job.seed, f"{type(exc).__name__}: {exc}"))

    try:
        X_train, y_train, X_test, y_test = _engineer(job, cell)
    except Exception as exc:
        for entry in plan.roster:
            fail(entry.name, exc)
        return out

    for entry in plan.roster:
        try:
            learner = get_learner(entry.name)
            start = time.perf_counter()
            model = learner.train(_inputs_for(learner.metadata.inputs, X_train), y_train, seed=job.seed, **entry.params)
            scores = model.predict_scores(_inputs_for(learner.metadata.inputs, X_test))
            sweep = threshold_sweep(scores, y_test)
            elapsed = (time.perf_counter() - start) * 1000.0
        except Exception as exc:
            fail(entry.name, exc)
            continue
        out.rows.append(
            ResultRow(plan.dataset_id, mode, label, entry.name, job.seed, sweep.best, sweep.best_threshold, elapsed)
        )
        if job.curves_dir is not None:
            seed_tag = job.seed if len(plan.seeds) > 1 else None
            write_curve_csv(sweep, job.curves_dir / curve_name(label, entry.name, seed_tag))
        logger.debug(
            f"[DOE] {label}/{entry.name} seed={job.seed}: f1={sweep.best.f1} "
            f"acc={sweep.best.accuracy} t={sweep.best_threshold:.2f} ({elapsed:.0f} ms)"
        )
    return out


def _split(plan: ExperimentPlan, data: Data, seed: int) -> Tuple[Data, Data]:
    if plan.kind.is_image:
        return patient_split(list(data), plan.test_fraction, seed)
    return train_test_split(data, plan.test_fraction, seed, stratified=plan.stratified)


@log_events("run_doe")
def run_doe(
    plan: ExperimentPlan,
    data: Data,
    out_dir: Optional[str | Path] = None,
    jobs: int = 1,
    write_tables: bool = True,
    curves_subdir: Optional[str] = None,
) -> DoeResult:
    """Run every (seed, cell) job; ``jobs > 1`` uses a process pool and
    ``jobs <= 0`` one worker per logical core.

    With ``out_dir`` set, curves go to ``curves/[<curves_subdir>/]`` and,
    unless ``write_tables`` is off, phase1.csv and failures.csv are written.
    """
    curves_dir = None
    if out_dir is not None:
        curves_dir = Path(out_dir) / "curves"
        if curves_subdir:
            curves_dir = curves_dir / curves_subdir
    work: List[_CellJob] = []
    for seed in plan.seeds:
        train, test = _split(plan, data, seed)
        work.extend(_CellJob(plan, seed, i, train, test, curves_dir) for i in range(len(plan.grid)))

    workers = (os.cpu_count() or 1) if jobs <= 0 else jobs
    logger.info(
        f"[DOE] {plan.dataset_id}: {len(plan.grid)} cells x {len(plan.roster)} learners x "
        f"{len(plan.seeds)} seed(s) on {workers} worker(s)"
    )
    result = DoeResult()
    if workers == 1 or len(work) == 1:
        for job in work:
            result.extend(_run_cell(job))
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            # map preserves submission order
            for part in pool.map(_run_cell, work):
                result.extend(part)

    if out_dir is not None and write_tables:
        write_results_csv(result.rows, Path(out_dir) / "phase1.csv")
        if result.failures:
            write_failures_csv(result.failures, Path(out_dir) / "failures.csv")
    logger.info(f"[DOE] {len(result.rows)} rows, {len(result.failures)} failure(s)")
    return result


# ── CSV ─────────────────────────────────────────────────────────────


def _fmt(value: Any) -> Any:
    if value is None:
        return ""
    if isinstance(value, float):
        return CSV_FLOAT_FORMAT.format(value)
    return value


def write_results_csv(rows: Sequence[ResultRow], path: str | Path) -> Path:
    """Floats use fixed 6 decimals; undefined metrics are empty cells."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame([{k: _fmt(v) for k, v in r.to_record().items()} for r in rows], columns=list(RESULT_COLUMNS))
    frame.to_csv(path, index=False)
    return path


def read_results_csv(path: str | Path) -> List[ResultRow]:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(path)
    frame = pd.read_csv(path, dtype=str, keep_default_na=False)

    def num(v: str) -> Optional[float]:
        return float(v) if v != "" else None

    rows = []
    for rec in frame.to_dict(orient="records"):
        metrics = MetricSet(**{m: num(rec[m]) for m in METRIC_NAMES + ("roc_auc",)})
        rows.append(
            ResultRow(
                dataset=rec["dataset"],
                leakage_mode=rec["leakage_mode"],
                cell=rec["cell"],
                model=rec["model"],
                seed=int(rec["seed"]),
                metrics=metrics,
                threshold=float(rec["threshold"]),
                time_ms=float(rec["time_ms"]),
            )
        )
    return rows


def write_failures_csv(failures: Sequence[FailureRecord], path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    pd.DataFrame([f.__dict__ for f in failures], columns=list(FAILURE_COLUMNS)).to_csv(path, index=False)
    return path
