# -*- coding: utf-8 -*-
"""
core.hpo.search

The sequential suggest -> evaluate -> append loop and the cross-validated
objective that turns a learner family into a loss.
"""

from __future__ import annotations

import math
import time
from enum import Enum
from pathlib import Path
from typing import Any, Callable, Dict, Mapping, Optional

import numpy as np

from core.dataset import FoldPlan, TabularDataset, stratified_kfold
from core.evaluation import confusion_at, metric_set, roc_auc
from core.exceptions import HpoError
from core.hpo.history import Trial, TrialHistory, TrialStatus
from core.hpo.space import Params, SearchSpace, grid_size, suggest_grid, suggest_random
from core.hpo.tpe import TpeConfig, suggest_tpe
from core.learners.base import dataset_arrays, get_learner
from core.logger import logger
from decorators import log_events

Objective = Callable[[Params], float]


class SearchAlgo(str, Enum):
    RANDOM = "random"
    TPE = "tpe"
    GRID = "grid"


def _evaluate(objective: Objective, params: Params, index: int) -> Trial:
    start = time.perf_counter()
    try:
        loss = float(objective(params))
    except Exception as e:
        duration = (time.perf_counter() - start) * 1000
        logger.warning(f"[HPO] trial {index} failed: {type(e).__name__}: {e}")
        return Trial(index, params, None, TrialStatus.FAILED, duration, f"{type(e).__name__}: {e}")
    duration = (time.perf_counter() - start) * 1000
    if not math.isfinite(loss):
        logger.warning(f"[HPO] trial {index} returned non-finite loss {loss}")
        return Trial(index, params, None, TrialStatus.FAILED, duration, f"non-finite loss {loss}")
    return Trial(index, params, loss, TrialStatus.OK, duration)


@log_events("optimize")
def optimize(
    objective: Objective,
    space: SearchSpace,
    n_iters: int,
    algo: SearchAlgo | str = SearchAlgo.TPE,
    seed: int = 0,
    tpe: Optional[TpeConfig] = None,
    history: Optional[TrialHistory] = None,
    history_path: Optional[str | Path] = None,
    points_per_dim: int = 5,
) -> TrialHistory:
    """Run until the history holds ``n_iters`` trials.

    A resumed ``history`` keeps its trials and continues from its length;
    since every suggestion is seeded by ``(seed, trial index)`` a resumed
    run reproduces an uninterrupted one. Grid search stops early once the
    grid is exhausted.
    """
    algo = SearchAlgo(algo)
    if n_iters < 0:
        raise HpoError(f"n_iters must be >= 0, got {n_iters}")
    if history is None:
        history = TrialHistory(space, seed, path=Path(history_path) if history_path else None)
    tpe = TpeConfig(seed=seed) if tpe is None else TpeConfig(tpe.gamma, tpe.n_candidates, tpe.n_startup, seed)
    budget = n_iters
    if algo == SearchAlgo.GRID:
        budget = min(n_iters, grid_size(space, points_per_dim))

    while len(history) < budget:
        index = len(history)
        if algo == SearchAlgo.RANDOM:
            params = suggest_random(space, seed, index)
        elif algo == SearchAlgo.GRID:
            params = suggest_grid(space, index, points_per_dim)
        else:
            params = suggest_tpe(space, history, tpe)
        trial = _evaluate(objective, params, index)
        history.append(trial)
        best = history.best()
        logger.debug(
            f"[HPO] {algo.value} trial {index}: status={trial.status.value} loss={trial.loss} "
            f"best={best.loss if best else None}"
        )

    best = history.best()
    logger.info(
        f"[HPO] {algo.value} finished {len(history)} trials, "
        f"{len(history.ok_trials())} ok, best loss={best.loss if best else None}"
    )
    return history


def _fold_metric(metric: str, scores: np.ndarray, labels: np.ndarray, threshold: float) -> float:
    if metric == "roc_auc":
        if labels.min() == labels.max():
            return 0.0
        return roc_auc(scores, labels)
    value = metric_set(confusion_at(scores, labels, threshold)).get(metric)
    return 0.0 if value is None else float(value)


def cv_objective(
    family: str,
    ds: TabularDataset,
    folds: int | str = 3,
    metric: str = "accuracy",
    seed: int = 0,
    threshold: float = 0.5,
    fixed: Optional[Mapping[str, Any]] = None,
    validation_fraction: float = 0.2,
) -> Objective:
    """Loss = 1 - mean validation metric over stratified folds.

    ``folds="holdout"`` uses a single validation split of
    ``validation_fraction`` of the rows instead of k folds. An undefined
    fold metric counts as 0.
    """
    entry = get_learner(family)
    X, y = dataset_arrays(ds)
    if folds == "holdout":
        plan = FoldPlan.holdout_plan(ds, validation_fraction, seed)
    else:
        plan = stratified_kfold(ds, int(folds), seed)
    splits = list(plan.folds())
    base: Dict[str, Any] = dict(fixed or {})

    def objective(params: Params) -> float:
        values = []
        for train_idx, val_idx in splits:
            model = entry.train(X[train_idx], y[train_idx], seed=seed, **{**base, **params})
            values.append(_fold_metric(metric, model.predict_scores(X[val_idx]), y[val_idx], threshold))
        return 1.0 - float(np.mean(values))

    return objective
