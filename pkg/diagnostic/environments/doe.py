"""Scenarios for experiment grids, the Phase-1 runner, Phase-2 tuning and reports."""
from __future__ import annotations

from typing import Any, List, Mapping, Tuple

import numpy as np

from core.doe import (
    DatasetKind,
    ExperimentPlan,
    RosterEntry,
    SummaryRow,
    ThermalSettings,
    curve_name,
    read_phase2_csv,
    read_results_csv,
    render_report,
    run_doe,
    run_hpo_phase,
    summarize,
    tabular_grid,
    thermal_grid,
    write_summary_csv,
)
from core.engineering import PatientRecord, Thermogram, ThermalToggles, TransformRecipe
from core.evaluation import MetricSet
from core.exceptions import ConfigError, HpoError
from core.hpo import Choice, QUniform, SearchSpace
from diagnostic.environments._fixtures import blood_like
from diagnostic.framework import ExecutionResult, ScenarioCase, verdict

GROUP = "doe"

FAST_ROSTER = (
    RosterEntry("linear"),
    RosterEntry("logistic", {"iters": 100}),
    RosterEntry("knn"),
    RosterEntry("svm", {"iters": 100}),
    RosterEntry("tree"),
    RosterEntry("forest", {"n_trees": 5}),
    RosterEntry("gbt_x", {"n_estimators": 5}),
    RosterEntry("gbt_l", {"n_estimators": 5}),
    RosterEntry("mlp", {"units": 8, "epochs": 5}),
)

SMALL_GBT_SPACE = SearchSpace({"n_estimators": QUniform(5, 15, 5), "max_depth": QUniform(1, 3, 1)})


def _checks(result: ExecutionResult, inputs, context) -> Tuple[str, str]:
    return result.output


def _tabular_plan(**kwargs: Any) -> ExperimentPlan:
    settings = {"dataset_id": "blood", "kind": DatasetKind.BLOOD, "grid": tabular_grid(), "roster": FAST_ROSTER}
    settings.update(kwargs)
    return ExperimentPlan(**settings)


def _key(row) -> Tuple:
    return row.cell, row.model, row.seed, tuple(row.metrics.to_dict().values()), row.threshold


def _grids(inputs: Mapping[str, Any]) -> Tuple[str, str]:
    tabular = tabular_grid()
    thermal = thermal_grid()
    labels = [c.label for c in tabular]
    return verdict(
        [
            (len(tabular) == 16 and len(set(labels)) == 16, f"{len(tabular)} tabular cells"),
            (labels[0] == "original", f"first cell {labels[0]}"),
            (labels[-1] == "scaled+augmented+expanded+polynomial", f"last cell {labels[-1]}"),
            (len(thermal) == 8 and len({c.label for c in thermal}) == 8, f"{len(thermal)} thermal cells"),
            (all(c.augment_degree == 4 for c in tabular), "default augmentation degree"),
        ],
        "Full factorial grids with stable labels.",
    )


def _empty_roster(inputs: Mapping[str, Any]) -> None:
    _tabular_plan(roster=())


def _wrong_cell_kind(inputs: Mapping[str, Any]) -> None:
    ExperimentPlan("thermal", DatasetKind.THERMAL, tabular_grid(), FAST_ROSTER)


def _full_tabular_grid(inputs: Mapping[str, Any]) -> Tuple[str, str]:
    out = inputs["tmp_path"] / "run"
    result = run_doe(_tabular_plan(), blood_like(10, seed=3), out_dir=out)
    rows = result.rows
    curves = sorted((out / "curves").glob("*.csv"))
    reread = read_results_csv(out / "phase1.csv")
    expected_order = [(c.label, e.name) for c in tabular_grid() for e in FAST_ROSTER]
    return verdict(
        [
            (not result.failures, f"failures {[(f.cell, f.model, f.error) for f in result.failures[:3]]}"),
            (len(rows) == 144, f"{len(rows)} result rows"),
            ([(r.cell, r.model) for r in rows] == expected_order, "rows out of (cell, model) order"),
            (len(curves) == 144, f"{len(curves)} curve files"),
            ((out / "curves" / curve_name("original", "knn")).is_file(), "curve file name"),
            (not (out / "failures.csv").exists(), "failures.csv written without failures"),
            (len(reread) == 144, f"phase1.csv holds {len(reread)} rows"),
            (
                all(abs(a.metrics.f1 - b.metrics.f1) < 1e-6 for a, b in zip(rows, reread) if a.metrics.f1 is not None),
                "phase1.csv values drifted",
            ),
            (all(r.time_ms >= 0.0 and 0.0 <= r.threshold <= 1.0 for r in rows), "timing or threshold out of range"),
        ],
        "Sixteen cells by nine learners give 144 scored rows.",
    )


def _runner_deterministic(inputs: Mapping[str, Any]) -> Tuple[str, str]:
    plan = _tabular_plan(grid=tabular_grid()[:4], roster=(RosterEntry("knn"), RosterEntry("tree")), seeds=(0, 1))
    ds = blood_like(12, seed=5)
    serial = run_doe(plan, ds)
    again = run_doe(plan, ds)
    pooled = run_doe(plan, ds, jobs=2)
    return verdict(
        [
            ([_key(r) for r in serial.rows] == [_key(r) for r in again.rows], "repeated run differs"),
            ([_key(r) for r in serial.rows] == [_key(r) for r in pooled.rows], "process pool changed the results"),
            ([r.seed for r in serial.rows[:8]] == [0] * 8, "rows are not grouped by seed"),
        ],
        "Same seed, same rows, whatever the worker count.",
    )


def _multi_seed_summary(inputs: Mapping[str, Any]) -> Tuple[str, str]:
    out = inputs["tmp_path"] / "seeds"
    plan = _tabular_plan(grid=tabular_grid()[:2], roster=(RosterEntry("knn"),), seeds=(0, 1, 2))
    result = run_doe(plan, blood_like(12, seed=1), out_dir=out)
    summary = summarize(result.rows)
    first = [r for r in result.rows if r.cell == "original"]
    median = float(np.median([r.metrics.accuracy for r in first]))
    path = write_summary_csv(summary, out / "summary.csv")
    return verdict(
        [
            (len(summary) == 2 and all(s.n_seeds == 3 for s in summary), f"summary {[(s.cell, s.n_seeds) for s in summary]}"),
            (summary[0].metrics.accuracy == median, f"median accuracy {summary[0].metrics.accuracy} vs {median}"),
            ((out / "curves" / curve_name("original", "knn", 2)).is_file(), "seed-tagged curve missing"),
            (len(path.read_text(encoding="utf-8").splitlines()) == 3, "summary.csv row count"),
        ],
        "Seeds collapse to their median per cell and learner.",
    )


def _failures_recorded(inputs: Mapping[str, Any]) -> Tuple[str, str]:
    out = inputs["tmp_path"] / "fail"
    plan = _tabular_plan(grid=tabular_grid()[:2], roster=(RosterEntry("knn", {"k": 1000}), RosterEntry("tree")))
    result = run_doe(plan, blood_like(8), out_dir=out)
    return verdict(
        [
            (len(result.failures) == 2, f"{len(result.failures)} failures"),
            (all(f.model == "knn" and "ModelError" in f.error for f in result.failures), "failure record"),
            ([r.model for r in result.rows] == ["tree", "tree"], "remaining learners did not run"),
            ((out / "failures.csv").is_file(), "failures.csv missing"),
        ],
        "A failing learner is recorded and the run carries on.",
    )


def _thermal_records(n_per_class: int = 4) -> List[PatientRecord]:
    rng = np.random.default_rng(8)
    records = []
    for p in range(2 * n_per_class):
        label = int(p >= n_per_class)
        pid = f"t{p:02d}"
        base = 30.0 + 2.0 * label
        images = tuple(Thermogram(base + rng.random((10, 12)), pid, label) for _ in range(2))
        records.append(PatientRecord(pid, label, images))
    return records


def _thermal_plan(inputs: Mapping[str, Any]) -> Tuple[str, str]:
    plan = ExperimentPlan(
        "synthetic",
        DatasetKind.SYNTHETIC,
        thermal_grid(),
        (RosterEntry("logistic", {"iters": 50}), RosterEntry("knn", {"k": 1})),
        thermal=ThermalSettings(size=(8, 8), degree=2),
    )
    result = run_doe(plan, _thermal_records())
    return verdict(
        [
            (not result.failures, f"failures {[(f.cell, f.model, f.error) for f in result.failures[:2]]}"),
            (len(result.rows) == 16, f"{len(result.rows)} rows"),
            ({r.leakage_mode for r in result.rows} == {"patient_split"}, "leakage mode column"),
            (result.rows[0].cell == ThermalToggles().label, f"first cell {result.rows[0].cell}"),
        ],
        "Eight thermal cells run on patient-level splits.",
    )


def _hpo_phase(inputs: Mapping[str, Any]) -> Tuple[str, str]:
    out = inputs["tmp_path"] / "hpo"
    rows = run_hpo_phase(
        blood_like(10, seed=2), TransformRecipe(scale=True), families=("gbt_x",), n_iters=3, folds=3,
        spaces={"gbt_x": SMALL_GBT_SPACE}, out_dir=out,
    )
    reread = read_phase2_csv(out / "phase2.csv")
    trials = (out / "gbt_x_trials.jsonl").read_text(encoding="utf-8").splitlines()
    return verdict(
        [
            ([r.phase for r in rows] == [1, 2], f"phases {[r.phase for r in rows]}"),
            (rows[1].trials == 3 and len(trials) == 3, "trial count"),
            (rows[1].params == {} or SMALL_GBT_SPACE.contains(rows[1].params), f"tuned params {rows[1].params}"),
            (rows[1].cv_loss <= rows[0].cv_loss, f"phase 2 cv loss {rows[1].cv_loss} above phase 1 {rows[0].cv_loss}"),
            (all(0.0 <= r.cv_loss <= 1.0 for r in rows), "cv loss outside [0, 1]"),
            (all(r.cell == "scaled" for r in rows), "cell label"),
            ([r.params for r in reread] == [r.params for r in rows], "phase2.csv params"),
            (all((out / "models" / f"gbt_x_phase{p}.json").is_file() for p in (1, 2)), "saved models missing"),
            ((out / "test.csv").is_file(), "test partition not written"),
        ],
        "Phase 2 tunes, retrains and reports next to the default row.",
    )


def _hpo_phase_keeps_defaults(inputs: Mapping[str, Any]) -> Tuple[str, str]:
    # learning_rate 2.0 is rejected, so every trial fails
    broken = SearchSpace({"learning_rate": Choice((2.0,))})
    rows = run_hpo_phase(
        blood_like(10, seed=5), TransformRecipe(), families=("gbt_x",), n_iters=3, folds=3,
        spaces={"gbt_x": broken}, out_dir=inputs["tmp_path"] / "hpo",
    )
    phase1, phase2 = rows
    return verdict(
        [
            (phase2.params == {}, f"params {phase2.params}"),
            (phase2.cv_loss == phase1.cv_loss, f"cv loss {phase2.cv_loss} vs {phase1.cv_loss}"),
            (phase2.trials == 3, f"{phase2.trials} trials"),
            (phase2.metrics == phase1.metrics, "phase 2 retrained away from the defaults"),
        ],
        "When no trial beats the defaults Phase 2 reports the default row.",
    )


def _hpo_phase_budget(inputs: Mapping[str, Any]) -> None:
    run_hpo_phase(blood_like(5), TransformRecipe(), n_iters=0)


def _report(inputs: Mapping[str, Any]) -> Tuple[str, str]:
    metrics = MetricSet(accuracy=0.5, precision=None, recall=0.0, specificity=1.0, npv=0.5, f1=0.0, roc_auc=0.61)
    summary = [
        SummaryRow("blood", "paper_faithful", "original", "knn", 1, metrics, 0.2, 3.0),
        SummaryRow("blood", "leak_free", "original", "knn", 1, metrics.with_auc(None), 0.5, 4.0),
    ]
    text = render_report(summary)
    lines = text.splitlines()
    return verdict(
        [
            ("## blood (paper_faithful)" in lines and "## blood (leak_free)" in lines, "one table per leakage mode"),
            ("| original | knn | 0.50 | 0.00* | 0.00 | 0.00 | 0.61 | 0.20 | 3 |" in lines, "row rendering"),
            (lines[-1].startswith("\\* undefined"), "footnote missing"),
            (text.endswith("\n"), "report must end with a newline"),
        ],
        "Markdown tables mark undefined metrics with a footnote.",
    )


def get_test_cases() -> List[ScenarioCase]:
    return [
        ScenarioCase("experiment grids", GROUP, _grids, validator=_checks),
        ScenarioCase("plan needs a roster", GROUP, _empty_roster, expect_error=ConfigError),
        ScenarioCase("plan cell kind matches dataset", GROUP, _wrong_cell_kind, expect_error=ConfigError),
        ScenarioCase("full tabular grid", GROUP, _full_tabular_grid, validator=_checks),
        ScenarioCase("runner determinism", GROUP, _runner_deterministic, validator=_checks),
        ScenarioCase("multi-seed summary", GROUP, _multi_seed_summary, validator=_checks),
        ScenarioCase("failed learners are recorded", GROUP, _failures_recorded, validator=_checks),
        ScenarioCase("thermal plan", GROUP, _thermal_plan, validator=_checks),
        ScenarioCase("phase two tuning", GROUP, _hpo_phase, validator=_checks),
        ScenarioCase("phase two keeps defaults", GROUP, _hpo_phase_keeps_defaults, validator=_checks),
        ScenarioCase("phase two needs a budget", GROUP, _hpo_phase_budget, expect_error=HpoError),
        ScenarioCase("markdown report", GROUP, _report, validator=_checks),
    ]
