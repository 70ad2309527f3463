# -*- coding: utf-8 -*-
"""
core.doe.hpo_phase

Phase 2: tune each boosted-tree family on one engineered cell with a
cross-validated objective, retrain the best trial on the full training
partition and compare it on the test partition with the family's
default-parameter (Phase-1) row.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import pandas as pd

from core.config import CSV_FLOAT_FORMAT, DEFAULT_FOLDS, DEFAULT_HPO_ITERS, DEFAULT_TEST_FRACTION
from core.dataset import TabularDataset, save_csv, train_test_split
from core.engineering import TransformRecipe, apply_recipe
from core.evaluation import METRIC_NAMES, MetricSet, threshold_sweep
from core.exceptions import HpoError
from core.hpo import SPACES, SearchAlgo, SearchSpace, TrialHistory, cv_objective, optimize
from core.learners import save_model
from core.learners.base import dataset_arrays, get_learner
from core.logger import logger
from decorators import log_events

PHASE2_COLUMNS = (
    ("phase", "cell", "model", "seed")
    + METRIC_NAMES
    + ("roc_auc", "threshold", "time_ms", "cv_loss", "trials", "params")
)


@dataclass(frozen=True)
class PhaseRow:
    phase: int
    cell: str
    model: str
    seed: int
    metrics: MetricSet
    threshold: float
    time_ms: float
    cv_loss: Optional[float] = None
    trials: int = 0
    params: Dict[str, Any] = field(default_factory=dict)

    def to_record(self) -> Dict[str, Any]:
        def fmt(v: Optional[float]) -> str:
            return "" if v is None else CSV_FLOAT_FORMAT.format(v)

        return {
            "phase": self.phase,
            "cell": self.cell,
            "model": self.model,
            "seed": self.seed,
            **{k: fmt(v) for k, v in self.metrics.to_dict().items()},
            "threshold": fmt(self.threshold),
            "time_ms": fmt(self.time_ms),
            "cv_loss": fmt(self.cv_loss),
            "trials": self.trials,
            "params": json.dumps(self.params, sort_keys=True),
        }


def _fit_and_score(family: str, train: TabularDataset, test: TabularDataset, seed: int, params: Dict[str, Any]):
    learner = get_learner(family)
    X, y = dataset_arrays(train)
    X_test, y_test = dataset_arrays(test)
    start = time.perf_counter()
    model = learner.train(X, y, seed=seed, **params)
    sweep = threshold_sweep(model.predict_scores(X_test), y_test)
    return model, sweep, (time.perf_counter() - start) * 1000.0


@log_events("run_hpo_phase")
def run_hpo_phase(
    ds: TabularDataset,
    recipe: TransformRecipe,
    families: Sequence[str] = ("gbt_x", "gbt_l"),
    n_iters: int = DEFAULT_HPO_ITERS,
    seed: int = 0,
    test_fraction: float = DEFAULT_TEST_FRACTION,
    algo: SearchAlgo | str = SearchAlgo.TPE,
    folds: int | str = DEFAULT_FOLDS,
    metric: str = "accuracy",
    spaces: Optional[Dict[str, SearchSpace]] = None,
    out_dir: Optional[str | Path] = None,
    resume: bool = False,
    label_column: str = "label",
) -> List[PhaseRow]:
    """Phase-1 and Phase-2 rows per family, side by side.

    Uses the same shared split per seed as the Phase-1 grid. With
    ``out_dir`` each family's trials go to ``<family>_trials.jsonl``
    (continued when ``resume`` is set), the table to phase2.csv, both
    models per family under models/ and the engineered test partition to
    test.csv.
    """
    if n_iters < 1:
        raise HpoError(f"HPO budget must be >= 1, got {n_iters}")
    spaces = {**SPACES, **(spaces or {})}
    train, test = train_test_split(ds, test_fraction, seed)
    train, test = apply_recipe(train, test, recipe, seed)
    if out_dir is not None:
        save_csv(test, Path(out_dir) / "test.csv", label_column)
    rows: List[PhaseRow] = []

    for family in families:
        if family not in spaces:
            raise HpoError(f"no search space for learner '{family}'; known: {sorted(spaces)}")
        space = spaces[family]
        objective = cv_objective(family, train, folds, metric, seed)
        default_loss = objective({})
        model, sweep, elapsed = _fit_and_score(family, train, test, seed, {})
        if out_dir is not None:
            save_model(model, Path(out_dir) / "models" / f"{family}_phase1.json")
        rows.append(
            PhaseRow(1, recipe.label, family, seed, sweep.best, sweep.best_threshold, elapsed, cv_loss=default_loss)
        )

        history_path = Path(out_dir) / f"{family}_trials.jsonl" if out_dir is not None else None
        history: Optional[TrialHistory] = None
        if history_path is not None:
            if resume:
                history = TrialHistory.load(history_path, space, seed)
            elif history_path.exists():
                history_path.unlink()
        history = optimize(objective, space, n_iters, algo, seed, history=history, history_path=history_path)
        best = history.best()
        # defaults act as trial -1; ties keep them
        if best is None or default_loss <= best.loss:
            logger.info(f"[HPO] {family}: no trial beat the defaults (cv loss {default_loss:.4f}); keeping them")
            best_params, best_loss = {}, default_loss
        else:
            best_params, best_loss = dict(best.params), best.loss
            model, sweep, elapsed = _fit_and_score(family, train, test, seed, best_params)
        if out_dir is not None:
            save_model(model, Path(out_dir) / "models" / f"{family}_phase2.json")
        rows.append(
            PhaseRow(
                2, recipe.label, family, seed, sweep.best, sweep.best_threshold, elapsed,
                cv_loss=best_loss, trials=len(history), params=best_params,
            )
        )
        logger.info(
            f"[HPO] {family} on {recipe.label}: accuracy {rows[-2].metrics.accuracy} -> "
            f"{rows[-1].metrics.accuracy} (cv loss {best_loss:.4f}, {len(history)} trials)"
        )

    if out_dir is not None:
        write_phase2_csv(rows, Path(out_dir) / "phase2.csv")
    return rows


def write_phase2_csv(rows: Sequence[PhaseRow], path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    pd.DataFrame([r.to_record() for r in rows], columns=list(PHASE2_COLUMNS)).to_csv(path, index=False)
    return path


def read_phase2_csv(path: str | Path) -> List[PhaseRow]:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(path)
    frame = pd.read_csv(path, dtype=str, keep_default_na=False)

    def num(v: str) -> Optional[float]:
        return float(v) if v != "" else None

    return [
        PhaseRow(
            phase=int(rec["phase"]),
            cell=rec["cell"],
            model=rec["model"],
            seed=int(rec["seed"]),
            metrics=MetricSet(**{m: num(rec[m]) for m in METRIC_NAMES + ("roc_auc",)}),
            threshold=float(rec["threshold"]),
            time_ms=float(rec["time_ms"]),
            cv_loss=num(rec["cv_loss"]),
            trials=int(rec["trials"]),
            params=json.loads(rec["params"]),
        )
        for rec in frame.to_dict(orient="records")
    ]
