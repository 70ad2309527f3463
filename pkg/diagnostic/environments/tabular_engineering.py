"""Scenarios for scale / augment / expand / polynomial and recipe composition."""
from __future__ import annotations

from typing import Any, List, Mapping, Tuple

import numpy as np

from core.dataset import TabularDataset, train_test_split
from core.engineering import (
    LeakageMode,
    TransformRecipe,
    apply_recipe,
    augment,
    expand,
    fit_scaler,
    polynomial,
    polynomial_feature_count,
    scale,
)
from core.exceptions import AugmentationError
from diagnostic.environments._fixtures import blood_like, two_blobs
from diagnostic.framework import ExecutionResult, ScenarioCase, verdict

GROUP = "engineering"


def _one_column(values, labels=None) -> TabularDataset:
    labels = labels if labels is not None else [0, 1] * (len(values) // 2) + [0] * (len(values) % 2)
    return TabularDataset(("x",), np.asarray(values, dtype=float)[:, None], labels, ("a", "b"))


def _scale_closed_form(inputs: Mapping[str, Any]) -> Tuple[str, str]:
    train = TabularDataset(("x", "c"), [[1.0, 5.0], [2.0, 5.0], [3.0, 5.0]], [0, 1, 0], ("a", "b"))
    test = TabularDataset(("x", "c"), [[4.0, 7.0]], [1], ("a", "b"))
    s_train, s_test, scaler = scale(train, test)
    expected = np.array([-1.0, 0.0, 1.0]) * np.sqrt(1.5)
    return verdict(
        [
            (np.allclose(s_train.rows[:, 0], expected, atol=1e-12), f"scaled column {s_train.rows[:, 0]}"),
            (np.all(s_train.rows[:, 1] == 0.0), "constant column not centered to 0"),
            (scaler.zero_variance.tolist() == [False, True], "zero-variance flag missing"),
            (abs(s_test.rows[0, 0] - 2.0 * np.sqrt(1.5)) < 1e-12, "test row not scaled with train statistics"),
            (s_test.rows[0, 1] == 2.0, "constant column of test not centered with train mean"),
        ],
        "Population-std scaling with train statistics.",
    )


def _scale_moments(inputs: Mapping[str, Any]) -> Tuple[str, str]:
    train, test = train_test_split(blood_like(30, seed=4), 0.3, seed=4)
    s_train, _, scaler = scale(train, test)
    back = scaler.inverse_transform(s_train)
    return verdict(
        [
            (np.all(np.abs(s_train.rows.mean(axis=0)) < 1e-9), "train column means not 0"),
            (np.all(np.abs(s_train.rows.std(axis=0) - 1.0) < 1e-9), "train column stds not 1"),
            (np.max(np.abs(back.rows - train.rows)) < 1e-12 * np.max(np.abs(train.rows)) + 1e-12, "inverse drifted"),
        ],
        "Scaled train columns are standardized and invert exactly.",
    )


def _augment_degree_four(inputs: Mapping[str, Any]) -> Tuple[str, str]:
    ds = blood_like(10, seed=2)
    out = augment(ds, 4, seed=0)
    unique = np.unique(out.rows, axis=0).shape[0]
    marginal_ok = all(
        set(out.rows[out.labels == c][:, j].tolist()) <= set(ds.rows[ds.labels == c][:, j].tolist())
        for c in (0, 1)
        for j in range(ds.d)
    )
    return verdict(
        [
            (out.n == 80, f"n={out.n}"),
            (np.array_equal(out.rows[:20], ds.rows), "original rows are not first"),
            (np.bincount(out.labels).tolist() == [40, 40], f"class counts {np.bincount(out.labels).tolist()}"),
            (unique == out.n, "duplicate rows in output"),
            (marginal_ok, "a synthetic value does not come from its class column"),
        ],
        "Degree 4 quadruples n with unique donor-copy rows.",
    )


def _augment_donor_product(inputs: Mapping[str, Any]) -> Tuple[str, str]:
    ds = TabularDataset(("u", "v"), [[1, 2], [3, 4], [10, 20], [30, 40]], [0, 0, 1, 1], ("a", "b"))
    out = augment(ds, 2, seed=11)
    synth0 = {tuple(r) for r in out.rows[4:][out.labels[4:] == 0].tolist()}
    synth1 = {tuple(r) for r in out.rows[4:][out.labels[4:] == 1].tolist()}
    return verdict(
        [
            (synth0 == {(1.0, 4.0), (3.0, 2.0)}, f"class a synthetic rows {synth0}"),
            (synth1 == {(10.0, 40.0), (30.0, 20.0)}, f"class b synthetic rows {synth1}"),
        ],
        "Synthetic rows are exactly the unused donor products.",
    )


def _augment_impossible(inputs: Mapping[str, Any]) -> None:
    ds = TabularDataset(("u", "v"), [[1, 1], [1, 1.5], [2, 2], [3, 3]], [0, 0, 1, 1], ("a", "b"))
    augment(ds, 4, seed=0)


def _expand_sequence(inputs: Mapping[str, Any]) -> Tuple[str, str]:
    row = np.arange(1.0, 10.0)
    ds = TabularDataset(tuple(f"f{i}" for i in range(9)), np.vstack([row, np.full(9, 4.0)]), [0, 1], ("a", "b"))
    out = expand(ds)
    stats = dict(zip(out.feature_names[9:], out.rows[0, 9:]))
    flat = dict(zip(out.feature_names[9:], out.rows[1, 9:]))
    return verdict(
        [
            (out.d == 16, f"d'={out.d}"),
            ((stats["min"], stats["max"], stats["mean"], stats["median"]) == (1.0, 9.0, 5.0, 5.0), f"stats {stats}"),
            (abs(stats["std"] - np.sqrt(60.0 / 9.0)) < 1e-12, f"std {stats['std']}"),
            (abs(stats["skewness"]) < 1e-12, f"skewness {stats['skewness']}"),
            (abs(stats["kurtosis"] - (-1.23)) < 1e-12, f"kurtosis {stats['kurtosis']}"),
            ((flat["std"], flat["skewness"], flat["kurtosis"]) == (0.0, 0.0, 0.0), f"constant row {flat}"),
        ],
        "Seven row statistics with the zero-variance rule.",
    )


def _expand_row_local(inputs: Mapping[str, Any]) -> bool:
    ds = two_blobs(6, 5, seed=9)
    perm = np.random.default_rng(1).permutation(ds.n)
    permuted = TabularDataset(ds.feature_names, ds.rows[perm], ds.labels[perm], ds.label_names)
    return np.array_equal(expand(ds).rows[perm], expand(permuted).rows)


def _polynomial_pair(inputs: Mapping[str, Any]) -> Tuple[str, str]:
    ds = TabularDataset(("a", "b"), [[2.0, 3.0], [0.0, 0.0]], [0, 1], ("n", "p"))
    out = polynomial(ds)
    return verdict(
        [
            (out.feature_names == ("a", "b", "a*b", "a*a", "b*b"), f"names {out.feature_names}"),
            (out.rows[0].tolist() == [2.0, 3.0, 6.0, 4.0, 9.0], f"row {out.rows[0].tolist()}"),
            (not out.rows[1].any(), "zero row produced non-zero features"),
        ],
        "(a, b) -> (a, b, ab, a^2, b^2).",
    )


def _polynomial_counts(inputs: Mapping[str, Any]) -> Tuple[str, str]:
    mismatches = []
    for d in range(1, 21):
        ds = TabularDataset(tuple(f"f{i}" for i in range(d)), np.ones((2, d)), [0, 1], ("n", "p"))
        brute = d + sum(1 for i in range(d) for j in range(d) if i <= j)
        got = polynomial(ds).d
        if not got == brute == polynomial_feature_count(d):
            mismatches.append((d, got, brute))
    nine = polynomial(blood_like(3)).d
    return verdict(
        [(not mismatches, f"count mismatches {mismatches}"), (nine == 54, f"d=9 gives {nine}")],
        "Column count 2d + d(d-1)/2 for d in 1..20; 54 for nine features.",
    )


def _recipe_identity(inputs: Mapping[str, Any]) -> bool:
    train, test = train_test_split(blood_like(10), 0.3, seed=0)
    a, b = apply_recipe(train, test, TransformRecipe(), seed=0)
    return a.equals(train) and b.equals(test)


def _recipe_expand_augment(inputs: Mapping[str, Any]) -> Tuple[str, str]:
    train, test = train_test_split(blood_like(20, seed=1), 0.3, seed=3)
    recipe = TransformRecipe(expand=True, augment=True, augment_degree=4, leakage_mode=LeakageMode.LEAK_FREE)
    a, b = apply_recipe(train, test, recipe, seed=3)
    pooled_a, pooled_b = apply_recipe(train, test, TransformRecipe(expand=True, augment=True), seed=3)
    return verdict(
        [
            ((a.d, b.d) == (16, 16), f"d'={(a.d, b.d)}"),
            (a.n == 4 * train.n, f"train n'={a.n}"),
            (b.n == test.n, "leak-free mode touched the test partition"),
            (pooled_a.n + pooled_b.n == 4 * (train.n + test.n), "paper-faithful pool size is wrong"),
            (pooled_b.n == 4 * test.n, f"paper-faithful test n'={pooled_b.n}"),
        ],
        "expand+augment gives 16 columns and 4x rows in both leakage modes.",
    )


def _recipe_deterministic(inputs: Mapping[str, Any]) -> bool:
    train, test = train_test_split(blood_like(15), 0.3, seed=2)
    recipe = TransformRecipe(scale=True, augment=True, expand=True, polynomial=True)
    first = apply_recipe(train, test, recipe, seed=5)
    second = apply_recipe(train, test, recipe, seed=5)
    return first[0].equals(second[0]) and first[1].equals(second[1])


def _recipe_labels(inputs: Mapping[str, Any]) -> List[str]:
    return [
        TransformRecipe().label,
        TransformRecipe(scale=True, expand=True).label,
        TransformRecipe(scale=True, augment=True, expand=True, polynomial=True).label,
    ]


def _unused_scaler(inputs: Mapping[str, Any]) -> bool:
    ds = blood_like(4)
    return fit_scaler(ds).transform(ds).d == ds.d


def get_test_cases() -> List[ScenarioCase]:
    def passthrough(result: ExecutionResult, inputs, context) -> Tuple[str, str]:
        return result.output

    return [
        ScenarioCase("scale closed form and constant column", GROUP, _scale_closed_form, validator=passthrough),
        ScenarioCase("scale train moments and inverse", GROUP, _scale_moments, validator=passthrough),
        ScenarioCase("scaler keeps width", GROUP, _unused_scaler),
        ScenarioCase("augment degree four", GROUP, _augment_degree_four, validator=passthrough),
        ScenarioCase("augment donor product", GROUP, _augment_donor_product, validator=passthrough),
        ScenarioCase("augment uniqueness unattainable", GROUP, _augment_impossible, expect_error=AugmentationError),
        ScenarioCase("expand row statistics", GROUP, _expand_sequence, validator=passthrough),
        ScenarioCase("expand commutes with row permutation", GROUP, _expand_row_local),
        ScenarioCase("polynomial of two features", GROUP, _polynomial_pair, validator=passthrough),
        ScenarioCase("polynomial column counts", GROUP, _polynomial_counts, validator=passthrough),
        ScenarioCase("recipe all-false is identity", GROUP, _recipe_identity),
        ScenarioCase("recipe expand and augment", GROUP, _recipe_expand_augment, validator=passthrough),
        ScenarioCase("recipe deterministic per seed", GROUP, _recipe_deterministic),
        ScenarioCase(
            "recipe cell labels",
            GROUP,
            _recipe_labels,
            validator=lambda r, i, c: verdict(
                [(r.output == ["original", "scaled+expanded", "scaled+augmented+expanded+polynomial"], f"{r.output}")],
                "Cell labels are stable.",
            ),
        ),
    ]
