"""Scenarios for the learner families, the registry and model files."""
from __future__ import annotations

from typing import Any, List, Mapping, Optional, Tuple

import numpy as np
from scipy.special import expit
from sklearn.linear_model import LogisticRegression

from core.bioheat import SyntheticParams, generate_synthetic_set
from core.engineering import ThermalToggles, apply_thermal_toggles, patient_split, records_to_arrays
from core.exceptions import ModelError
from core.learners import (
    GbtParams,
    NetworkSpec,
    OptimizerSpec,
    best_gini_split,
    cnn_experiment,
    fit_forest,
    fit_gbt_params,
    fit_knn,
    fit_linear,
    fit_linear_svm,
    fit_logistic,
    fit_tree,
    get_learner,
    load_model,
    mlp,
    nn_gradient_check,
    registry_instance,
    save_model,
)
from core.learners.network import (
    BatchNormSpec,
    Conv2dSpec,
    DenseSpec,
    DropoutSpec,
    FlattenSpec,
    GlobalAvgPoolSpec,
    MaxPoolSpec,
)
from core.learners.tree import midpoint
from diagnostic.environments._fixtures import two_blobs, write_text
from diagnostic.framework import ExecutionResult, ScenarioCase, verdict

GROUP = "learners"


def _checks(result: ExecutionResult, inputs, context) -> Tuple[str, str]:
    return result.output


def _accuracy(scores: np.ndarray, y: np.ndarray) -> float:
    return float(np.mean((np.asarray(scores) >= 0.5).astype(int) == y))


def _blobs(n: int = 30, d: int = 4, gap: float = 3.0, seed: int = 0) -> Tuple[np.ndarray, np.ndarray]:
    ds = two_blobs(n, d, gap, seed)
    return ds.rows, ds.labels


def _linear_closed_form(inputs: Mapping[str, Any]) -> Tuple[str, str]:
    X, y = _blobs(20, 3, gap=1.0, seed=1)
    model = fit_linear(X, y)
    design = np.hstack([np.ones((X.shape[0], 1)), X])
    coef = np.linalg.lstsq(design, y.astype(float), rcond=None)[0]
    ridge = fit_linear(X, y, l2=2.5)
    Xc, yc = X - X.mean(axis=0), y - y.mean()
    ridge_w = np.linalg.solve(Xc.T @ Xc + 2.5 * np.eye(3), Xc.T @ yc)
    return verdict(
        [
            (abs(model.bias - coef[0]) < 1e-9, f"bias {model.bias} vs {coef[0]}"),
            (np.allclose(model.weights, coef[1:], atol=1e-9), "least-squares weights differ"),
            (np.allclose(ridge.weights, ridge_w, atol=1e-9), "ridge weights differ"),
            (np.all((model.predict_scores(X) >= 0) & (model.predict_scores(X) <= 1)), "scores leave [0, 1]"),
        ],
        "Least squares and ridge match their normal equations.",
    )


def _logistic_reference(inputs: Mapping[str, Any]) -> Tuple[str, str]:
    X, y = _blobs(40, 3, gap=1.0, seed=2)
    l2 = 0.1
    model = fit_logistic(X, y, lr=1.0, iters=5000, l2=l2)
    ref = LogisticRegression(C=1.0 / (l2 * X.shape[0]), tol=1e-10, max_iter=10000).fit(X, y)
    history = np.asarray(model.loss_history)
    return verdict(
        [
            (bool(np.all(np.diff(history) <= 1e-15)), "recorded loss increased"),
            (np.allclose(model.weights, ref.coef_[0], atol=1e-3), f"weights {model.weights} vs {ref.coef_[0]}"),
            (abs(model.bias - ref.intercept_[0]) < 1e-3, f"bias {model.bias} vs {ref.intercept_[0]}"),
        ],
        "Gradient descent reaches the regularized log-loss optimum.",
    )


def _svm_separable(inputs: Mapping[str, Any]) -> Tuple[str, str]:
    X, y = _blobs(25, 2, gap=6.0, seed=3)
    model = fit_linear_svm(X, y, C=10.0, iters=2000)
    margins = model.margin(X)
    scores = model.predict_scores(X)
    return verdict(
        [
            (_accuracy(scores, y) >= 0.96, f"train accuracy {_accuracy(scores, y)}"),
            (float(np.mean((margins > 0) == (y == 1))) >= 0.96, "margin sign disagrees with the label"),
            (model.platt_a > 0, f"Platt slope {model.platt_a}"),
        ],
        "Linear SVM separates well-separated blobs.",
    )


def _knn_oracle(inputs: Mapping[str, Any]) -> Tuple[str, str]:
    X, y = _blobs(15, 3, gap=1.0, seed=4)
    queries = np.random.default_rng(5).normal(1.0, 1.5, size=(10, 3))
    model = fit_knn(X, y, k=3)
    brute = []
    for q in queries:
        dist = np.sqrt(((X - q) ** 2).sum(axis=1))
        brute.append(y[np.argsort(dist, kind="stable")[:3]].mean())
    tie = fit_knn(np.array([[0.0], [2.0]]), np.array([1, 0]), k=1)
    own = fit_knn(X, y, k=1).predict_scores(X)
    return verdict(
        [
            (np.allclose(model.predict_scores(queries), brute), "scores differ from brute force"),
            (tie.predict(np.array([1.0])) == 1.0, "equidistant neighbours not resolved to the lower index"),
            (np.array_equal(own, y), "k=1 does not reproduce the training labels"),
        ],
        "kNN scores are neighbour label shares.",
    )


def _knn_bad_k(inputs: Mapping[str, Any]) -> None:
    X, y = _blobs(3, 2)
    fit_knn(X, y, k=7)


def _brute_gini(X: np.ndarray, y: np.ndarray) -> Optional[Tuple[float, int, float]]:
    def gini(labels: np.ndarray) -> float:
        p = labels.mean()
        return 1.0 - p * p - (1.0 - p) * (1.0 - p)

    n = y.size
    parent = gini(y)
    best = None
    for f in range(X.shape[1]):
        values = np.unique(X[:, f])
        for a, b in zip(values[:-1], values[1:]):
            thr = midpoint(float(a), float(b))
            left = X[:, f] <= thr
            gain = parent - (left.sum() * gini(y[left]) + (~left).sum() * gini(y[~left])) / n
            if best is None or gain > best[0] + 1e-12:
                best = (gain, f, thr)
    return best


def _gini_oracle(inputs: Mapping[str, Any]) -> Tuple[str, str]:
    mismatches = []
    for seed in range(20):
        rng = np.random.default_rng(seed)
        X = rng.normal(size=(25, 3))
        y = rng.integers(0, 2, 25)
        if y.min() == y.max():
            continue
        ours, brute = best_gini_split(X, y, range(3)), _brute_gini(X, y)
        if ours[1:] != brute[1:] or abs(ours[0] - brute[0]) > 1e-12:
            mismatches.append((seed, ours, brute))
    return verdict([(not mismatches, f"split mismatches {mismatches[:2]}")], "Best split equals exhaustive search.")


def _tree_fits(inputs: Mapping[str, Any]) -> Tuple[str, str]:
    X = np.array([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]] * 5) + np.repeat(np.arange(5), 4)[:, None] * 1e-3
    y = np.array([0, 0, 0, 1] * 5)
    deep = fit_tree(X, y, max_depth=2)
    stump = fit_tree(X, y, max_depth=1)
    single = fit_tree(X, np.zeros(20, dtype=int) + np.eye(20, dtype=int)[0], min_samples_leaf=10)
    return verdict(
        [
            (_accuracy(deep.predict_scores(X), y) == 1.0, "depth-2 tree does not fit AND"),
            (deep.tree.depth() <= 2 and stump.tree.depth() <= 1, "max_depth not respected"),
            (single.tree.n_leaves <= 2, "min_samples_leaf not respected"),
        ],
        "Gini tree fits AND at depth two.",
    )


def _forest_cases(inputs: Mapping[str, Any]) -> Tuple[str, str]:
    X, y = _blobs(30, 4, seed=6)
    first = fit_forest(X, y, n_trees=15, seed=3)
    second = fit_forest(X, y, n_trees=15, seed=3)
    mean_of_trees = np.mean([t.predict_values(X) for t in first.trees], axis=0)
    return verdict(
        [
            (np.array_equal(first.predict_scores(X), second.predict_scores(X)), "same seed gave a different forest"),
            (np.allclose(first.predict_scores(X), mean_of_trees), "forest score is not the mean of its trees"),
            (_accuracy(first.predict_scores(X), y) >= 0.95, "forest does not fit separable blobs"),
            (len(first.trees) == 15, "wrong number of trees"),
        ],
        "Bagged forest is reproducible and averages its trees.",
    )


def _gbt_stump_oracle(inputs: Mapping[str, Any]) -> Tuple[str, str]:
    rng = np.random.default_rng(7)
    X = rng.normal(size=(30, 2))
    y = (X[:, 0] + 0.5 * rng.normal(size=30) > 0).astype(int)
    lam = 1.0
    model = fit_gbt_params(X, y, GbtParams(n_estimators=1, learning_rate=1.0, max_depth=1, reg_lambda=lam))

    base = np.log(y.mean() / (1 - y.mean()))
    p = expit(base)
    g, h = p - y, np.full(30, p * (1 - p))
    G, H = g.sum(), h.sum()
    best = None
    for f in range(2):
        values = np.unique(X[:, f])
        for a, b in zip(values[:-1], values[1:]):
            left = X[:, f] <= midpoint(float(a), float(b))
            gl, hl = g[left].sum(), h[left].sum()
            gain = 0.5 * (gl**2 / (hl + lam) + (G - gl) ** 2 / (H - hl + lam) - G**2 / (H + lam))
            if best is None or gain > best[0] + 1e-12:
                best = (gain, left)
    left = best[1]
    expected = np.where(left, -g[left].sum() / (h[left].sum() + lam), -g[~left].sum() / (h[~left].sum() + lam)) + base
    return verdict(
        [
            (abs(model.base_score - base) < 1e-12, f"base score {model.base_score} vs {base}"),
            (np.allclose(model.raw(X), expected, atol=1e-10), "stump predictions differ from the Newton step"),
            (model.trees[0].n_leaves == 2, "not a stump"),
        ],
        "One boosted stump equals the second-order oracle.",
    )


def _gbt_styles(inputs: Mapping[str, Any]) -> Tuple[str, str]:
    X, y = _blobs(40, 4, gap=1.5, seed=8)
    depth_wise = get_learner("gbt_x").train(X, y, seed=0, n_estimators=30)
    leaf_wise = get_learner("gbt_l").train(X, y, seed=0, n_estimators=30, num_leaves=4)
    empty = fit_gbt_params(X, y, GbtParams(n_estimators=0))
    return verdict(
        [
            (depth_wise.train_loss[-1] < depth_wise.train_loss[0], "depth-wise training loss did not drop"),
            (leaf_wise.train_loss[-1] < leaf_wise.train_loss[0], "leaf-wise training loss did not drop"),
            (all(t.n_leaves <= 4 for t in leaf_wise.trees), "num_leaves limit exceeded"),
            (all(t.depth() <= 6 for t in depth_wise.trees), "max_depth limit exceeded"),
            (np.allclose(empty.predict_scores(X), y.mean()), "zero trees should score the base rate"),
            (_accuracy(depth_wise.predict_scores(X), y) >= 0.9, "depth-wise fit is poor"),
        ],
        "Both boosting styles reduce the training loss within their limits.",
    )


def _gbt_bad_param(inputs: Mapping[str, Any]) -> None:
    GbtParams.from_mapping({"n_estimators": 10, "eta": 0.1})


def _small_cnn() -> NetworkSpec:
    layers = (
        Conv2dSpec(2, 3, "tanh"),
        BatchNormSpec(),
        MaxPoolSpec(),
        Conv2dSpec(2, 3, "elu"),
        GlobalAvgPoolSpec(),
        DenseSpec(3, "tanh"),
        DropoutSpec(0.5),
        DenseSpec(1, "sigmoid"),
    )
    return NetworkSpec((1, 6, 6), layers, OptimizerSpec("adam", 1e-3)).validate()


def _gradient_checks(inputs: Mapping[str, Any]) -> Tuple[str, str]:
    rng = np.random.default_rng(9)
    dense = NetworkSpec((4,), (DenseSpec(5, "tanh"), BatchNormSpec(), DenseSpec(3, "sigmoid"), DenseSpec(1, "sigmoid")))
    dense_err = nn_gradient_check(dense, rng.normal(size=(6, 4)), np.array([0, 1, 0, 1, 1, 0]), seed=1)
    conv_err = nn_gradient_check(_small_cnn(), rng.normal(size=(4, 1, 6, 6)), np.array([0, 1, 1, 0]), seed=2)
    flat = NetworkSpec((1, 3, 3), (FlattenSpec(), DenseSpec(2, "elu"), DenseSpec(1, "sigmoid")))
    flat_err = nn_gradient_check(flat, rng.normal(size=(3, 1, 3, 3)), np.array([1, 0, 1]), seed=3)
    return verdict(
        [
            (dense_err < 1e-4, f"dense relative error {dense_err:.2e}"),
            (conv_err < 1e-4, f"conv relative error {conv_err:.2e}"),
            (flat_err < 1e-4, f"flatten relative error {flat_err:.2e}"),
        ],
        "Analytic gradients agree with central differences.",
    )


def _mlp_training(inputs: Mapping[str, Any]) -> Tuple[str, str]:
    X, y = _blobs(30, 4, seed=10)
    model = get_learner("mlp").train(X, y, seed=0, units=8, lr=0.01, epochs=100, validation_fraction=0.0)
    again = get_learner("mlp").train(X, y, seed=0, units=8, lr=0.01, epochs=100, validation_fraction=0.0)
    losses = [r["loss"] for r in model.history]
    return verdict(
        [
            (_accuracy(model.predict_scores(X), y) >= 0.95, f"accuracy {_accuracy(model.predict_scores(X), y)}"),
            (losses[-1] < losses[0], "training loss did not drop"),
            (np.array_equal(model.predict_scores(X), again.predict_scores(X)), "same seed trained differently"),
        ],
        "Dense network learns separable blobs reproducibly.",
    )


def _cnn_training(inputs: Mapping[str, Any]) -> Tuple[str, str]:
    rng = np.random.default_rng(11)
    y = np.repeat([0, 1], 20)
    X = rng.normal(0.0, 0.1, size=(40, 1, 8, 8)) + y[:, None, None, None]
    model = get_learner("cnn").train(X, y, seed=0, epochs=40, lr=0.01, validation_fraction=0.0)
    return verdict(
        [
            (_accuracy(model.predict_scores(X), y) >= 0.9, f"accuracy {_accuracy(model.predict_scores(X), y)}"),
            (model.input_shape == (1, 8, 8), f"input shape {model.input_shape}"),
        ],
        "Default CNN separates bright from dark images.",
    )


def _cnn_on_synthetic_patients(inputs: Mapping[str, Any]) -> Tuple[str, str]:
    params = SyntheticParams(resolution=0.002, width=0.04, out_size=(16, 16), images_per_patient=2)
    records = generate_synthetic_set(20, 20, params=params, seed=7)
    train, test = patient_split(records, 0.3, seed=7)
    train, test = apply_thermal_toggles(train, test, ThermalToggles(normalize=True), size=(16, 16), seed=7)
    X, y, train_ids = records_to_arrays(train)
    X_test, y_test, test_ids = records_to_arrays(test)
    model = get_learner("cnn").train(X, y, seed=0, epochs=40, batch_size=16, lr=0.01, validation_fraction=0.0)
    accuracy = _accuracy(model.predict_scores(X_test), y_test)
    return verdict(
        [
            (not set(train_ids) & set(test_ids), "a patient sits on both sides of the split"),
            (len(set(test_ids)) == 12 and sorted(set(y_test.tolist())) == [0, 1], f"test patients {sorted(set(test_ids))}"),
            (accuracy >= 0.9, f"held-out accuracy {accuracy:.3f}"),
        ],
        f"CNN reaches {accuracy:.3f} on held-out synthetic patients.",
    )


def _early_stopping(inputs: Mapping[str, Any]) -> bool:
    rng = np.random.default_rng(12)
    X, y = rng.normal(size=(60, 4)), np.repeat([0, 1], 30)
    model = get_learner("mlp").train(X, y, seed=0, epochs=200, patience=3, lr=0.05)
    return len(model.history) < 200 and all("val_loss" in r for r in model.history)


def _presets(inputs: Mapping[str, Any]) -> Tuple[str, str]:
    convs = {n: sum(isinstance(s, Conv2dSpec) for s in cnn_experiment(n).layers) for n in range(1, 5)}
    pools = {n: sum(isinstance(s, MaxPoolSpec) for s in cnn_experiment(n).layers) for n in range(1, 5)}
    return verdict(
        [
            (convs == {1: 6, 2: 12, 3: 14, 4: 8}, f"conv counts {convs}"),
            (set(pools.values()) == {2}, f"pool counts {pools}"),
            (mlp((9,)).layers[-1] == DenseSpec(1, "sigmoid"), "mlp output is not dense(1, sigmoid)"),
        ],
        "Experiment presets keep their layer layout.",
    )


def _bad_output_layer(inputs: Mapping[str, Any]) -> None:
    NetworkSpec((4,), (DenseSpec(3, "relu"),)).validate()


def _conv_on_rows(inputs: Mapping[str, Any]) -> None:
    NetworkSpec((4,), (Conv2dSpec(2), DenseSpec(1, "sigmoid"))).validate()


def _unknown_preset(inputs: Mapping[str, Any]) -> None:
    cnn_experiment(5)


def _registry(inputs: Mapping[str, Any]) -> Tuple[str, str]:
    names = set(registry_instance.names())
    expected = {"linear", "logistic", "svm", "knn", "tree", "forest", "gbt_x", "gbt_l", "cnn", "mlp"}
    return verdict(
        [
            (expected <= names, f"missing learners {sorted(expected - names)}"),
            (registry_instance.names("image") == ["cnn"], f"image learners {registry_instance.names('image')}"),
            (get_learner("gbt_l").metadata.family == "gbt", "gbt_l family"),
        ],
        "All families are registered.",
    )


def _non_binary_labels(inputs: Mapping[str, Any]) -> None:
    fit_logistic(np.ones((3, 2)), np.array([0, 1, 2]))


def _serialization(inputs: Mapping[str, Any]) -> Tuple[str, str]:
    X, y = _blobs(15, 3, seed=13)
    models = {
        "linear": get_learner("linear").train(X, y),
        "logistic": get_learner("logistic").train(X, y),
        "svm": get_learner("svm").train(X, y, iters=200),
        "knn": get_learner("knn").train(X, y),
        "tree": get_learner("tree").train(X, y),
        "forest": get_learner("forest").train(X, y, n_trees=5),
        "gbt": get_learner("gbt_x").train(X, y, n_estimators=5),
        "network": get_learner("mlp").train(X, y, units=4, epochs=3),
    }
    failures = []
    for name, model in models.items():
        back = load_model(save_model(model, inputs["tmp_path"] / name / "model.json"))
        if back.family != model.family or not np.allclose(back.predict_scores(X), model.predict_scores(X), atol=1e-5):
            failures.append(name)
    return verdict([(not failures, f"scores changed after reload: {failures}")], "Every family reloads its scores.")


def _corrupt_model(inputs: Mapping[str, Any]) -> None:
    load_model(write_text(inputs["tmp_path"] / "bad.json", '{"format": "other"}'))


def get_test_cases() -> List[ScenarioCase]:
    return [
        ScenarioCase("linear closed form", GROUP, _linear_closed_form, validator=_checks),
        ScenarioCase("logistic matches reference", GROUP, _logistic_reference, validator=_checks),
        ScenarioCase("svm separable", GROUP, _svm_separable, validator=_checks),
        ScenarioCase("knn brute force", GROUP, _knn_oracle, validator=_checks),
        ScenarioCase("knn k larger than n", GROUP, _knn_bad_k, expect_error=ModelError),
        ScenarioCase("gini split exhaustive", GROUP, _gini_oracle, validator=_checks),
        ScenarioCase("tree and", GROUP, _tree_fits, validator=_checks),
        ScenarioCase("forest", GROUP, _forest_cases, validator=_checks),
        ScenarioCase("boosted stump oracle", GROUP, _gbt_stump_oracle, validator=_checks),
        ScenarioCase("boosting styles", GROUP, _gbt_styles, validator=_checks),
        ScenarioCase("boosting unknown parameter", GROUP, _gbt_bad_param, expect_error=ModelError),
        ScenarioCase("network gradient checks", GROUP, _gradient_checks, validator=_checks),
        ScenarioCase("mlp training", GROUP, _mlp_training, validator=_checks),
        ScenarioCase("cnn training", GROUP, _cnn_training, validator=_checks),
        ScenarioCase("cnn on synthetic patients", GROUP, _cnn_on_synthetic_patients, validator=_checks),
        ScenarioCase("network early stopping", GROUP, _early_stopping),
        ScenarioCase("cnn presets", GROUP, _presets, validator=_checks),
        ScenarioCase("network output layer", GROUP, _bad_output_layer, expect_error=ModelError),
        ScenarioCase("conv on row input", GROUP, _conv_on_rows, expect_error=ModelError),
        ScenarioCase("unknown cnn preset", GROUP, _unknown_preset, expect_error=ModelError),
        ScenarioCase("learner registry", GROUP, _registry, validator=_checks),
        ScenarioCase("binary labels required", GROUP, _non_binary_labels, expect_error=ModelError),
        ScenarioCase("model files", GROUP, _serialization, validator=_checks),
        ScenarioCase("corrupt model file", GROUP, _corrupt_model, expect_error=ModelError),
    ]
