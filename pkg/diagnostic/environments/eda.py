"""Scenarios for correlation matrices, PCA projections and pair tables."""
from __future__ import annotations

from typing import Any, List, Mapping, Tuple

import numpy as np
import pandas as pd
from sklearn.decomposition import PCA

from core.dataset import TabularDataset
from core.eda import (
    pair_grid,
    pca_2d,
    pearson_matrix,
    principal_components,
    reconstruction_error,
    standardize,
    write_correlation_csv,
    write_pair_grid_csv,
    write_projection_csv,
)
from core.exceptions import DatasetError
from diagnostic.environments._fixtures import blood_like
from diagnostic.framework import ExecutionResult, ScenarioCase, verdict

GROUP = "eda"


def _checks(result: ExecutionResult, inputs, context) -> Tuple[str, str]:
    return result.output


def _mixed(n: int = 60, d: int = 5, seed: int = 0) -> TabularDataset:
    rng = np.random.default_rng(seed)
    latent = rng.normal(size=(n, d)) * np.array([3.0, 2.0, 1.0, 0.5, 0.25])[:d]
    rows = latent @ rng.normal(size=(d, d))
    return TabularDataset(tuple(f"f{i}" for i in range(d)), rows, [0, 1] * (n // 2), ("neg", "pos"))


def _pearson_examples(inputs: Mapping[str, Any]) -> Tuple[str, str]:
    x = np.arange(10.0)
    ds = TabularDataset(("x", "up", "down", "flat"), np.column_stack([x, 2 * x + 1, -x, np.full(10, 3.0)]), [0, 1] * 5, ("a", "b"))
    cm = pearson_matrix(ds)
    return verdict(
        [
            (abs(cm.get("x", "up") - 1.0) < 1e-12, f"r(x, 2x+1) = {cm.get('x', 'up')}"),
            (abs(cm.get("x", "down") + 1.0) < 1e-12, f"r(x, -x) = {cm.get('x', 'down')}"),
            (np.isnan(cm.get("x", "flat")) and np.isnan(cm.get("flat", "flat")), "constant column must be undefined"),
            (cm.undefined == ("flat",), f"undefined {cm.undefined}"),
        ],
        "Perfect correlations and the constant-column rule.",
    )


def _pearson_oracle(inputs: Mapping[str, Any]) -> Tuple[str, str]:
    ds = _mixed(seed=3)
    cm = pearson_matrix(ds, include_label=True)
    expected = np.corrcoef(np.column_stack([ds.rows, ds.labels]), rowvar=False)
    return verdict(
        [
            (cm.names[-1] == "label" and cm.values.shape == (6, 6), f"names {cm.names}"),
            (np.max(np.abs(cm.values - expected)) < 1e-10, "differs from numpy corrcoef"),
            (np.array_equal(cm.values, cm.values.T), "matrix is not symmetric"),
        ],
        "Correlation agrees with numpy and is symmetric.",
    )


def _pca_line(inputs: Mapping[str, Any]) -> Tuple[str, str]:
    t = np.linspace(-1.0, 1.0, 12)
    ds = TabularDataset(("a", "b"), np.column_stack([t, 2.0 * t + 5.0]), [0, 1] * 6, ("n", "p"))
    proj = pca_2d(ds)
    return verdict(
        [
            (abs(proj.explained[0] - 1.0) < 1e-9, f"explained {proj.explained}"),
            (proj.rank_deficient, "collinear data not flagged"),
            (np.allclose(np.abs(proj.components[0]), np.sqrt(0.5)), f"first component {proj.components[0]}"),
        ],
        "Collinear data puts all variance on the first component.",
    )


def _pca_isotropic(inputs: Mapping[str, Any]) -> Tuple[str, str]:
    ds = TabularDataset(("a", "b"), [[1, 0], [-1, 0], [0, 1], [0, -1]], [0, 1, 0, 1], ("n", "p"))
    proj = pca_2d(ds)
    return verdict(
        [
            (np.allclose(proj.explained, (0.5, 0.5)), f"explained {proj.explained}"),
            (abs(float(proj.components[0] @ proj.components[1])) < 1e-12, "components not orthogonal"),
            (not proj.rank_deficient, "full-rank data flagged"),
        ],
        "Isotropic data splits variance evenly.",
    )


def _pca_oracle(inputs: Mapping[str, Any]) -> Tuple[str, str]:
    ds = _mixed(seed=5)
    proj = pca_2d(ds)
    reference = PCA(n_components=2).fit(standardize(ds.rows))
    alignment = np.abs(np.sum(proj.components * reference.components_, axis=1))
    return verdict(
        [
            (np.allclose(proj.explained, reference.explained_variance_ratio_, atol=1e-6), f"explained {proj.explained}"),
            (np.all(alignment > 1 - 1e-6), f"component alignment {alignment}"),
            (np.all(np.abs(proj.coords.mean(axis=0)) < 1e-9), "projected coordinates are not centered"),
            (all(c[np.argmax(np.abs(c))] > 0 for c in proj.components), "sign convention"),
        ],
        "Power iteration matches scikit-learn PCA.",
    )


def _reconstruction(inputs: Mapping[str, Any]) -> Tuple[str, str]:
    ds = _mixed(seed=7)
    errors = [reconstruction_error(ds, k) for k in range(1, ds.d + 1)]
    values, _ = principal_components(standardize(ds.rows), ds.d)
    return verdict(
        [
            (all(a >= b - 1e-9 for a, b in zip(errors, errors[1:])), f"errors {errors}"),
            (errors[-1] < 1e-8, f"full-rank residual {errors[-1]}"),
            (bool(np.all(np.diff(values) <= 1e-9)), f"eigenvalues not descending {values}"),
        ],
        "More components never reconstruct worse.",
    )


def _pca_too_narrow(inputs: Mapping[str, Any]) -> None:
    pca_2d(TabularDataset(("a",), [[1.0], [2.0], [3.0]], [0, 1, 0], ("n", "p")))


def _pair_table(inputs: Mapping[str, Any]) -> Tuple[str, str]:
    ds = blood_like(5)
    frame = pair_grid(ds, ["Age", "BMI", "Glucose"])
    out = inputs["tmp_path"] / "eda"
    written = [
        write_pair_grid_csv(frame, out / "pairs.csv"),
        write_correlation_csv(pearson_matrix(ds), out / "correlation.csv"),
        write_projection_csv(pca_2d(ds), ds, out / "pca.csv"),
    ]
    pca = pd.read_csv(out / "pca.csv")
    return verdict(
        [
            (len(frame) == 3 * ds.n, f"{len(frame)} pair rows"),
            (list(frame.columns) == ["row", "label", "x_feature", "y_feature", "x", "y"], "pair columns"),
            (frame.iloc[0][["x_feature", "y_feature"]].tolist() == ["Age", "BMI"], "pair order"),
            (all(p.is_file() for p in written), "a csv was not written"),
            (list(pca.columns) == ["pc1", "pc2", "label"] and len(pca) == ds.n, "projection csv layout"),
        ],
        "Pair table and CSV exports.",
    )


def _pair_unknown(inputs: Mapping[str, Any]) -> None:
    pair_grid(blood_like(3), ["Age", "Height"])


def get_test_cases() -> List[ScenarioCase]:
    return [
        ScenarioCase("pearson examples", GROUP, _pearson_examples, validator=_checks),
        ScenarioCase("pearson versus numpy", GROUP, _pearson_oracle, validator=_checks),
        ScenarioCase("pca of a line", GROUP, _pca_line, validator=_checks),
        ScenarioCase("pca of isotropic data", GROUP, _pca_isotropic, validator=_checks),
        ScenarioCase("pca versus scikit-learn", GROUP, _pca_oracle, validator=_checks),
        ScenarioCase("reconstruction error", GROUP, _reconstruction, validator=_checks),
        ScenarioCase("pca needs two features", GROUP, _pca_too_narrow, expect_error=DatasetError),
        ScenarioCase("pair table and exports", GROUP, _pair_table, validator=_checks),
        ScenarioCase("pair table unknown feature", GROUP, _pair_unknown, expect_error=DatasetError),
    ]
