"""Scenarios against the public blood and EIT exports, skipped when they are absent."""
from __future__ import annotations

from pathlib import Path
from typing import Any, List, Mapping, Tuple

import numpy as np

from core.config import DATA_DIR_ENV
from core.dataset import TabularDataset, class_counts, load_csv, relabel_eit, set_positive_label, train_test_split
from core.dataset.eit import EIT_FEATURES
from core.doe import DatasetKind, ExperimentPlan, RosterEntry, run_doe, run_hpo_phase, summarize
from core.engineering import TransformRecipe
from diagnostic.environments._fixtures import BLOOD_FEATURES, public_csv
from diagnostic.framework import ExecutionResult, PreparedEnv, ScenarioCase, verdict

GROUP = "public"

SEEDS = tuple(range(42, 52))
BLOOD_CELL = TransformRecipe(augment=True, expand=True)
EIT_CELL = TransformRecipe(scale=True, expand=True)
TOLERANCE = 0.05
MIN_TPE_GAIN = 0.02


def _checks(result: ExecutionResult, inputs, context) -> Tuple[str, str]:
    return result.output


def _locate(name: str):
    def prepare(tmp_path: Path) -> PreparedEnv:
        path = public_csv(name)
        if path is None:
            return PreparedEnv(skip_reason=f"{name} not found; set {DATA_DIR_ENV} to the folder holding it")
        return PreparedEnv(inputs={"path": path})

    return prepare


def _blood_dataset(path: Path) -> TabularDataset:
    return set_positive_label(load_csv(path, "Classification"), "2")


def _eit_dataset(path: Path) -> TabularDataset:
    """Carcinoma against the rest, on the nine impedance features only."""
    ds = set_positive_label(relabel_eit(load_csv(path, "Class"), "two"), "car")
    cols = [ds.feature_names.index(f) for f in EIT_FEATURES]
    return TabularDataset(tuple(EIT_FEATURES), ds.rows[:, cols], ds.labels, ds.label_names)


def _gbt_median(ds: TabularDataset, dataset_id: str, kind: DatasetKind, cell: TransformRecipe):
    plan = ExperimentPlan(dataset_id, kind, (cell,), (RosterEntry("gbt_x"),), seeds=SEEDS)
    result = run_doe(plan, ds)
    return summarize(result.rows)[0], result


def _near(value, target: float) -> bool:
    return value is not None and abs(value - target) <= TOLERANCE


def _fmt(value) -> str:
    return "undefined" if value is None else f"{value:.3f}"


def _blood(inputs: Mapping[str, Any]) -> Tuple[str, str]:
    ds = load_csv(inputs["path"], "Classification")
    counts = class_counts(ds)
    train, test = train_test_split(ds, 0.3, seed=42)
    return verdict(
        [
            ((ds.n, ds.d) == (116, 9), f"shape {(ds.n, ds.d)}"),
            (ds.feature_names == BLOOD_FEATURES, f"features {ds.feature_names}"),
            (counts == {"1": 52, "2": 64}, f"class counts {counts}"),
            ((train.n, test.n) == (81, 35), f"split sizes {(train.n, test.n)}"),
            (class_counts(test) == {"1": 16, "2": 19}, f"test class counts {class_counts(test)}"),
        ],
        "Blood export: 116 rows, nine biomarkers, 52 healthy and 64 patients.",
    )


def _eit(inputs: Mapping[str, Any]) -> Tuple[str, str]:
    ds = load_csv(inputs["path"], "Class")
    six = {k.strip().lower(): v for k, v in class_counts(ds).items()}
    two = relabel_eit(ds, "two")
    three = relabel_eit(ds, "three")
    dropped = relabel_eit(ds, "two", drop_con_adi=True)
    return verdict(
        [
            (ds.n == 106, f"{ds.n} rows"),
            (set(EIT_FEATURES) <= set(ds.feature_names), f"features {ds.feature_names}"),
            (six == {"car": 21, "fad": 15, "mas": 18, "gla": 16, "con": 14, "adi": 22}, f"tissue counts {six}"),
            (np.bincount(two.labels).tolist() == [85, 21], f"two-class counts {np.bincount(two.labels).tolist()}"),
            (np.bincount(three.labels).tolist() == [36, 49, 21], f"three-class counts {np.bincount(three.labels).tolist()}"),
            (dropped.n == 70 and dropped.label_names == ("fad_mas_gla", "car"), f"dropped n={dropped.n}"),
        ],
        "EIT export: 106 rows over six tissue classes and their groupings.",
    )


def _blood_gbt(inputs: Mapping[str, Any]) -> Tuple[str, str]:
    row, result = _gbt_median(_blood_dataset(inputs["path"]), "blood", DatasetKind.BLOOD, BLOOD_CELL)
    m = row.metrics
    return verdict(
        [
            (not result.failures, f"failures {result.failures}"),
            (row.cell == "augmented+expanded" and row.n_seeds == len(SEEDS), f"row {row.cell} x{row.n_seeds}"),
            (_near(m.accuracy, 0.93), f"median accuracy {m.accuracy}"),
            (_near(m.precision, 0.96), f"median precision {m.precision}"),
        ],
        f"Blood GBT on augmented+expanded: accuracy {_fmt(m.accuracy)}, precision {_fmt(m.precision)}.",
    )


def _eit_gbt(inputs: Mapping[str, Any]) -> Tuple[str, str]:
    row, result = _gbt_median(_eit_dataset(inputs["path"]), "eit", DatasetKind.EIT, EIT_CELL)
    m = row.metrics
    return verdict(
        [
            (not result.failures, f"failures {result.failures}"),
            (row.cell == "scaled+expanded", f"cell {row.cell}"),
            (_near(m.accuracy, 0.94), f"median accuracy {m.accuracy}"),
        ],
        f"EIT GBT on scaled+expanded: accuracy {_fmt(m.accuracy)}.",
    )


def _tpe_gain(load, cell: TransformRecipe):
    def run(inputs: Mapping[str, Any]) -> Tuple[str, str]:
        default, tuned = run_hpo_phase(load(inputs["path"]), cell, families=("gbt_x",), n_iters=200, seed=42)
        gain = default.cv_loss - tuned.cv_loss
        return verdict(
            [
                (tuned.trials == 200, f"{tuned.trials} trials"),
                (gain >= MIN_TPE_GAIN, f"cv accuracy gain {gain:.4f} below {MIN_TPE_GAIN}"),
            ],
            f"TPE lifts cv accuracy on {cell.label} by {gain:.4f}.",
        )

    return run


def get_test_cases() -> List[ScenarioCase]:
    blood, eit = _locate("blood.csv"), _locate("eit.csv")
    return [
        ScenarioCase("public blood export", GROUP, _blood, prepare=blood, validator=_checks),
        ScenarioCase("public eit export", GROUP, _eit, prepare=eit, validator=_checks),
        ScenarioCase("public blood gbt reproduction", GROUP, _blood_gbt, prepare=blood, validator=_checks),
        ScenarioCase("public eit gbt reproduction", GROUP, _eit_gbt, prepare=eit, validator=_checks),
        ScenarioCase(
            "public blood tpe gain", GROUP, _tpe_gain(_blood_dataset, BLOOD_CELL), prepare=blood, validator=_checks
        ),
        ScenarioCase("public eit tpe gain", GROUP, _tpe_gain(_eit_dataset, EIT_CELL), prepare=eit, validator=_checks),
    ]
