"""Scenarios for loading, splitting, folding and relabelling tabular data."""
from __future__ import annotations

from pathlib import Path
from typing import Any, List, Mapping, Tuple

import numpy as np

from core.dataset import (
    TabularDataset,
    class_counts,
    load_csv,
    relabel_eit,
    save_csv,
    stratified_allocation,
    stratified_kfold,
    train_test_split,
)
from core.dataset.splits import FoldPlan
from core.exceptions import DatasetError
from diagnostic.environments._fixtures import two_blobs, write_text
from diagnostic.framework import ExecutionResult, PreparedEnv, ScenarioCase, verdict

GROUP = "dataset"


def _toy_csv(tmp_path: Path) -> PreparedEnv:
    path = write_text(tmp_path / "toy.csv", "a,b,y\n1.5,2,pos\n3,4.25,neg\n-1,0,pos\n")
    return PreparedEnv(inputs={"path": path})


def _load_toy(inputs: Mapping[str, Any]) -> TabularDataset:
    return load_csv(inputs["path"], "y")


def _validate_toy(result: ExecutionResult, inputs, context) -> Tuple[str, str]:
    ds: TabularDataset = result.output
    return verdict(
        [
            ((ds.n, ds.d) == (3, 2), f"shape {(ds.n, ds.d)}"),
            (ds.label_names == ("pos", "neg"), f"label names {ds.label_names}"),
            (ds.labels.tolist() == [0, 1, 0], f"labels {ds.labels.tolist()}"),
            (ds.rows[0, 0] == 1.5 and ds.rows[1, 1] == 4.25, "values misread"),
        ],
        "First-appearance label encoding and values are correct.",
    )


def _bad_cell(tmp_path: Path) -> PreparedEnv:
    return PreparedEnv(inputs={"path": write_text(tmp_path / "bad.csv", "a,b,y\n1,2,x\n3,oops,z\n")})


def _validate_bad_cell(result: ExecutionResult, inputs, context) -> Tuple[str, str]:
    exc: DatasetError = result.exception
    return verdict(
        [(exc.row == 3, f"row {exc.row}"), (exc.column == "b", f"column {exc.column}")],
        "Unparsable cell reported with file line and column.",
    )


def _round_trip(inputs: Mapping[str, Any]) -> bool:
    rng = np.random.default_rng(3)
    ds = TabularDataset(("x", "y z"), rng.normal(size=(25, 2)) * 1e3, rng.integers(0, 3, 25), ("a", "b", "c"))
    path = save_csv(ds, inputs["tmp_path"] / "rt.csv", "label")
    back = load_csv(path, "label")
    # first-appearance order may differ from ds.label_names
    names = [back.label_names[i] for i in back.labels]
    return (
        back.feature_names == ds.feature_names
        and back.rows.tobytes() == ds.rows.tobytes()
        and names == [ds.label_names[i] for i in ds.labels]
    )


def _split_small(inputs: Mapping[str, Any]) -> Tuple[TabularDataset, TabularDataset]:
    ds = two_blobs(5, 2)
    return train_test_split(ds, 0.3, seed=7)


def _validate_split_small(result: ExecutionResult, inputs, context) -> Tuple[str, str]:
    train, test = result.output
    again = train_test_split(two_blobs(5, 2), 0.3, seed=7)
    combined = np.sort(np.vstack([train.rows, test.rows]), axis=0)
    original = np.sort(two_blobs(5, 2).rows, axis=0)
    return verdict(
        [
            (test.n == 3, f"test size {test.n}"),
            (set(test.labels.tolist()) == {0, 1}, "a class is missing from the test side"),
            (train.n + test.n == 10, "partition not exhaustive"),
            (np.array_equal(combined, original), "partition is not a permutation of the input"),
            (again[1].rows.tobytes() == test.rows.tobytes(), "same seed gave a different split"),
        ],
        "Stratified 70/30 split is exhaustive, balanced and deterministic.",
    )


def _blood_sized_split(inputs: Mapping[str, Any]) -> int:
    ds = two_blobs(58, 3)
    return train_test_split(ds, 0.3, seed=1)[1].n


def _allocation_shares(inputs: Mapping[str, Any]) -> List[int]:
    return stratified_allocation([52, 64], 0.3)


def _kfold_forced(inputs: Mapping[str, Any]) -> FoldPlan:
    rows = np.arange(18, dtype=float).reshape(9, 2)
    ds = TabularDataset(("a", "b"), rows, [0, 0, 0, 1, 1, 1, 2, 2, 2], ("x", "y", "z"))
    return stratified_kfold(ds, 3, seed=5)


def _validate_kfold_forced(result: ExecutionResult, inputs, context) -> Tuple[str, str]:
    plan: FoldPlan = result.output
    ids = np.asarray(plan.assignments)
    per_fold = [sorted(np.flatnonzero(ids == f) // 3) for f in range(3)]
    covered = sorted(np.concatenate([v for _, v in plan.folds()]).tolist())
    return verdict(
        [
            (all(p == [0, 1, 2] for p in per_fold), f"fold class members {per_fold}"),
            (covered == list(range(9)), "validation folds do not cover every index once"),
        ],
        "Each fold holds exactly one member of each class.",
    )


def _kfold_eit_sizes(inputs: Mapping[str, Any]) -> List[int]:
    counts = [21, 15, 18, 16, 14, 22]
    labels = np.repeat(np.arange(6), counts)
    ds = TabularDataset(("v",), np.arange(106, dtype=float)[:, None], labels, tuple("abcdef"))
    return sorted(stratified_kfold(ds, 3, seed=0).fold_sizes(), reverse=True)


def _kfold_too_small(inputs: Mapping[str, Any]) -> None:
    ds = TabularDataset(("a",), [[1.0], [2.0], [3.0], [4.0]], [0, 0, 1, 1], ("x", "y"))
    stratified_kfold(ds, 3, seed=0)


def _eit(labels: List[str]) -> TabularDataset:
    names = ("car", "fad", "mas", "gla", "con", "adi")
    return TabularDataset(("I0",), np.arange(len(labels), dtype=float)[:, None], [names.index(l) for l in labels], names)


def _relabel_two(inputs: Mapping[str, Any]) -> List[int]:
    return relabel_eit(_eit(["car", "fad", "adi"]), "two").labels.tolist()


def _relabel_three(inputs: Mapping[str, Any]) -> dict:
    labels = ["car"] * 21 + ["fad"] * 15 + ["mas"] * 18 + ["gla"] * 16 + ["con"] * 14 + ["adi"] * 22
    return class_counts(relabel_eit(_eit(labels), "three"))


def _relabel_six(inputs: Mapping[str, Any]) -> bool:
    ds = _eit(["gla", "car", "con"])
    return relabel_eit(ds, "six").labels.tolist() == ds.labels.tolist()


def _relabel_unknown(inputs: Mapping[str, Any]) -> None:
    ds = TabularDataset(("I0",), [[1.0], [2.0]], [0, 1], ("car", "tumour"))
    relabel_eit(ds, "two")


def _equals(expected: Any):
    def validate(result: ExecutionResult, inputs, context) -> Tuple[str, str]:
        if result.output == expected:
            return "passed", f"Got {expected!r}."
        return "incorrect result", f"expected {expected!r}, got {result.output!r}"

    return validate


def get_test_cases() -> List[ScenarioCase]:
    return [
        ScenarioCase("load csv first-appearance labels", GROUP, _load_toy, _toy_csv, _validate_toy),
        ScenarioCase("load csv unparsable cell", GROUP, _load_toy, _bad_cell, _validate_bad_cell, expect_error=DatasetError),
        ScenarioCase(
            "load csv missing file",
            GROUP,
            lambda inputs: load_csv(inputs["tmp_path"] / "absent.csv", "y"),
            expect_error=FileNotFoundError,
        ),
        ScenarioCase(
            "load csv unknown label column",
            GROUP,
            lambda inputs: load_csv(inputs["path"], "label"),
            _toy_csv,
            expect_error=DatasetError,
        ),
        ScenarioCase("save csv round trip is exact", GROUP, _round_trip),
        ScenarioCase("split 5/5 stratified 70/30", GROUP, _split_small, validator=_validate_split_small),
        ScenarioCase("split 116 rows holds out 35", GROUP, _blood_sized_split, validator=_equals(35)),
        ScenarioCase("stratified allocation per class", GROUP, _allocation_shares, validator=_equals([16, 19])),
        ScenarioCase("kfold one member per class per fold", GROUP, _kfold_forced, validator=_validate_kfold_forced),
        ScenarioCase("kfold eit fold sizes", GROUP, _kfold_eit_sizes, validator=_equals([36, 35, 35])),
        ScenarioCase("kfold class smaller than k", GROUP, _kfold_too_small, expect_error=DatasetError),
        ScenarioCase("relabel eit two classes", GROUP, _relabel_two, validator=_equals([1, 0, 0])),
        ScenarioCase(
            "relabel eit three classes",
            GROUP,
            _relabel_three,
            validator=_equals({"con_adi": 36, "fad_mas_gla": 49, "car": 21}),
        ),
        ScenarioCase("relabel eit six is identity", GROUP, _relabel_six),
        ScenarioCase("relabel eit unknown label", GROUP, _relabel_unknown, expect_error=DatasetError),
    ]
