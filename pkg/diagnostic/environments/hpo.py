"""Scenarios for search spaces, TPE, the optimize loop and trial histories."""
from __future__ import annotations

import math
from typing import Any, List, Mapping, Tuple

import numpy as np

from core.exceptions import HpoError
from core.hpo import (
    Choice,
    LogUniform,
    QUniform,
    SearchSpace,
    TpeConfig,
    Trial,
    TrialHistory,
    TrialStatus,
    Uniform,
    cv_objective,
    optimize,
    running_best,
    split_good_bad,
    suggest_random,
    suggest_tpe,
    top_k,
)
from diagnostic.environments._fixtures import two_blobs
from diagnostic.framework import ExecutionResult, ScenarioCase, verdict

GROUP = "hpo"

LINE = SearchSpace({"x": Uniform(-10.0, 10.0)})
PLANE = SearchSpace({"x": Uniform(-10.0, 10.0), "y": Uniform(-10.0, 10.0)})
BRANIN = SearchSpace({"x": Uniform(-5.0, 10.0), "y": Uniform(0.0, 15.0)})


def _checks(result: ExecutionResult, inputs, context) -> Tuple[str, str]:
    return result.output


def _history(losses: List[float | None]) -> TrialHistory:
    history = TrialHistory(LINE, seed=0)
    for i, loss in enumerate(losses):
        status = TrialStatus.OK if loss is not None else TrialStatus.FAILED
        history.append(Trial(i, {"x": float(i)}, loss, status))
    return history


def _priors(inputs: Mapping[str, Any]) -> Tuple[str, str]:
    rng = np.random.default_rng(0)
    uniform = np.array([Uniform(0.0, 1.0).sample(rng) for _ in range(10_000)])
    logs = np.log10([LogUniform(1e-4, 1e-1).sample(rng) for _ in range(10_000)])
    ints = {QUniform(1, 10, 1).sample(rng) for _ in range(2_000)}
    return verdict(
        [
            (abs(uniform.mean() - 0.5) < 0.02, f"uniform mean {uniform.mean():.4f}"),
            (logs.min() >= -4.0 and logs.max() <= -1.0, "loguniform draw out of range"),
            (abs(logs.mean() + 2.5) < 0.05, f"mean log10 {logs.mean():.3f}"),
            (ints == set(range(1, 11)) and all(isinstance(v, int) for v in ints), f"quniform values {sorted(ints)}"),
        ],
        "Prior draws follow their laws.",
    )


def _bad_dimension(inputs: Mapping[str, Any]) -> None:
    Uniform(1.0, 0.0)


def _startup_is_random(inputs: Mapping[str, Any]) -> bool:
    history = _history([1.0, 2.0, 0.5])
    config = TpeConfig(n_startup=20, seed=4)
    return suggest_tpe(PLANE, TrialHistory(PLANE, 4), config) == suggest_random(PLANE, 4, 0) and suggest_tpe(
        LINE, history, config
    ) == suggest_random(LINE, 4, 3)


def _tpe_line(inputs: Mapping[str, Any]) -> Tuple[str, str]:
    history = optimize(lambda p: (p["x"] - 2.0) ** 2, LINE, 200, "tpe", seed=1)
    best = history.best()
    return verdict(
        [
            (len(history) == 200, f"{len(history)} trials"),
            (abs(best.params["x"] - 2.0) < 0.1, f"best x {best.params['x']:.4f}"),
        ],
        "TPE homes in on the quadratic minimum.",
    )


def _branin(p) -> float:
    x, y = p["x"], p["y"]
    b, c, r, s, t = 5.1 / (4 * math.pi ** 2), 5 / math.pi, 6.0, 10.0, 1 / (8 * math.pi)
    return (y - b * x ** 2 + c * x - r) ** 2 + s * (1 - t) * math.cos(x) + s


def _tpe_beats_random(objective, space: SearchSpace, budget: int = 60, seeds: int = 20, min_wins: int = 14):
    def run(inputs: Mapping[str, Any]) -> Tuple[str, str]:
        wins = 0
        for seed in range(seeds):
            tpe_best = optimize(objective, space, budget, "tpe", seed=seed).best().loss
            random_best = optimize(objective, space, budget, "random", seed=seed).best().loss
            wins += tpe_best <= random_best
        return verdict(
            [(wins >= min_wins, f"TPE won {wins} of {seeds} paired runs")],
            f"TPE matched or beat random search in {wins} of {seeds} paired runs.",
        )

    return run


def _tpe_in_bounds(inputs: Mapping[str, Any]) -> Tuple[str, str]:
    rng = np.random.default_rng(2)
    escaped = []
    for case in range(15):
        low = float(rng.uniform(-5, 5))
        space = SearchSpace(
            {
                "u": Uniform(low, low + float(rng.uniform(0.1, 10))),
                "l": LogUniform(10 ** float(rng.uniform(-6, -2)), 10 ** float(rng.uniform(-1, 2))),
                "q": QUniform(1, int(rng.integers(2, 50)), 1),
                "c": Choice(("a", "b", "c")),
            }
        )
        history = optimize(lambda p: float(p["u"]) ** 2 + math.log(p["l"]) ** 2 + p["q"], space, 30, "tpe", seed=case,
                           tpe=TpeConfig(n_startup=10))
        for trial in history.trials:
            if not space.contains(trial.params):
                escaped.append((case, trial.index, trial.params))
    return verdict([(not escaped, f"out-of-space suggestions {escaped[:2]}")], "TPE suggestions stay inside their space.")


def _good_bad_sizes(inputs: Mapping[str, Any]) -> Tuple[str, str]:
    history = _history([5.0, 1.0, 4.0, 1.0, 3.0, 2.0, 9.0, 0.5, 7.0, 6.0])
    good, bad = split_good_bad(history.ok_trials(), 0.25)
    return verdict(
        [
            ((len(good), len(bad)) == (3, 7), f"sizes {(len(good), len(bad))}"),
            ([t.index for t in good] == [7, 1, 3], f"good indices {[t.index for t in good]}"),
        ],
        "Good set is the ceil(gamma n) lowest losses.",
    )


def _failed_trials(inputs: Mapping[str, Any]) -> Tuple[str, str]:
    def objective(p):
        if p["x"] > 5.0:
            raise ValueError("too large")
        return abs(p["x"])

    history = optimize(objective, LINE, 40, "random", seed=3)
    failed = [t for t in history.trials if not t.ok]
    return verdict(
        [
            (len(history) == 40, "failed trials must still count toward the budget"),
            (bool(failed) and all(t.loss is None and "ValueError" in t.error for t in failed), "failure not recorded"),
            (all(t.ok for t in history.trials if t.params["x"] <= 5.0), "a valid trial was marked failed"),
        ],
        "Failing objectives become failed trials without stopping the search.",
    )


def _trivial_runs(inputs: Mapping[str, Any]) -> Tuple[str, str]:
    empty = optimize(lambda p: 1.0, LINE, 0, "tpe")
    constant = optimize(lambda p: 0.25, LINE, 1, "random")
    return verdict(
        [(len(empty) == 0, "n_iters=0 produced trials"), (constant.best().loss == 0.25, "constant objective best")],
        "Zero budget and constant objectives.",
    )


def _negative_budget(inputs: Mapping[str, Any]) -> None:
    optimize(lambda p: 0.0, LINE, -1)


def _resume(inputs: Mapping[str, Any]) -> Tuple[str, str]:
    def objective(p):
        return (p["x"] - 1.0) ** 2 + abs(p["y"])

    path = inputs["tmp_path"] / "trials.jsonl"
    optimize(objective, PLANE, 25, "tpe", seed=9, history_path=path, tpe=TpeConfig(n_startup=10))
    resumed = optimize(objective, PLANE, 40, "tpe", seed=9, history=TrialHistory.load(path, PLANE, 9),
                       tpe=TpeConfig(n_startup=10))
    straight = optimize(objective, PLANE, 40, "tpe", seed=9, tpe=TpeConfig(n_startup=10))
    lines = path.read_text(encoding="utf-8").splitlines()
    return verdict(
        [
            ([t.params for t in resumed.trials] == [t.params for t in straight.trials], "resumed run diverged"),
            ([t.loss for t in resumed.trials] == [t.loss for t in straight.trials], "resumed losses differ"),
            (len(lines) == 40, f"log holds {len(lines)} lines"),
        ],
        "A resumed search reproduces the uninterrupted one.",
    )


def _grid(inputs: Mapping[str, Any]) -> Tuple[str, str]:
    space = SearchSpace({"a": Choice(("p", "q", "r")), "b": QUniform(1, 3, 1)})
    history = optimize(lambda p: float(p["b"]), space, 20, "grid")
    points = [(t.params["a"], t.params["b"]) for t in history.trials]
    return verdict(
        [
            (len(history) == 9, f"{len(history)} trials for a 3x3 grid"),
            (points[:4] == [("p", 1), ("p", 2), ("p", 3), ("q", 1)], f"order {points[:4]}"),
            (len(set(points)) == 9, "grid repeated a point"),
        ],
        "Grid search enumerates the full grid once, first dimension slowest.",
    )


def _top_k(inputs: Mapping[str, Any]) -> Tuple[str, str]:
    history = _history([3.0, 1.0, None, 2.0])
    twice = optimize(lambda p: 1.0, SearchSpace({"c": Choice(("only",))}), 2, "random")
    best = running_best(_history([3.0, None, 4.0, 1.0, 2.0]))
    return verdict(
        [
            ([t.loss for t in top_k(history, 2)] == [1.0, 2.0], "top 2 losses"),
            (len(top_k(history, 10)) == 3, "k larger than history should return every ok trial"),
            (len(twice) == 2 and twice.trials[0].params == twice.trials[1].params, "identical params not both logged"),
            (best == [3.0, 3.0, 3.0, 1.0, 1.0], f"running best {best}"),
        ],
        "top_k and running best over a mixed history.",
    )


def _top_k_zero(inputs: Mapping[str, Any]) -> None:
    top_k(_history([1.0]), 0)


def _top_k_empty(inputs: Mapping[str, Any]) -> None:
    top_k(_history([None, None]), 1)


def _cv_objective(inputs: Mapping[str, Any]) -> Tuple[str, str]:
    ds = two_blobs(15, 3, gap=4.0, seed=1)
    objective = cv_objective("knn", ds, folds=3, metric="accuracy", seed=0)
    holdout = cv_objective("knn", ds, folds="holdout", metric="roc_auc", seed=0)
    history = optimize(objective, SearchSpace({"k": QUniform(1, 9, 2)}), 5, "grid")
    return verdict(
        [
            (objective({"k": 1}) < 0.05, f"loss {objective({'k': 1})}"),
            (0.0 <= holdout({"k": 3}) <= 0.05, f"holdout loss {holdout({'k': 3})}"),
            (all(0.0 <= t.loss <= 1.0 for t in history.trials), "loss outside [0, 1]"),
        ],
        "Cross-validated loss is one minus the mean fold metric.",
    )


def get_test_cases() -> List[ScenarioCase]:
    return [
        ScenarioCase("prior draws", GROUP, _priors, validator=_checks),
        ScenarioCase("uniform bounds order", GROUP, _bad_dimension, expect_error=HpoError),
        ScenarioCase("tpe startup is random", GROUP, _startup_is_random),
        ScenarioCase("tpe one-dimensional quadratic", GROUP, _tpe_line, validator=_checks),
        ScenarioCase(
            "tpe versus random on a quadratic", GROUP, _tpe_beats_random(lambda p: (p["x"] - 2.0) ** 2, LINE),
            validator=_checks,
        ),
        ScenarioCase("tpe versus random on branin", GROUP, _tpe_beats_random(_branin, BRANIN), validator=_checks),
        ScenarioCase("tpe stays in bounds", GROUP, _tpe_in_bounds, validator=_checks),
        ScenarioCase("good and bad split sizes", GROUP, _good_bad_sizes, validator=_checks),
        ScenarioCase("failed trials", GROUP, _failed_trials, validator=_checks),
        ScenarioCase("zero and constant budgets", GROUP, _trivial_runs, validator=_checks),
        ScenarioCase("negative budget", GROUP, _negative_budget, expect_error=HpoError),
        ScenarioCase("resume from trial log", GROUP, _resume, validator=_checks),
        ScenarioCase("grid search", GROUP, _grid, validator=_checks),
        ScenarioCase("top k and running best", GROUP, _top_k, validator=_checks),
        ScenarioCase("top k needs k >= 1", GROUP, _top_k_zero, expect_error=HpoError),
        ScenarioCase("top k needs an ok trial", GROUP, _top_k_empty, expect_error=HpoError),
        ScenarioCase("cross-validated objective", GROUP, _cv_objective, validator=_checks),
    ]
