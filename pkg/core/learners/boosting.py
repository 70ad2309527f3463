# -*- coding: utf-8 -*-
"""
core.learners.boosting

Gradient-boosted regression trees on the logistic loss, second-order
formulation:

    leaf weight  w = -T(G) / (H + lambda),  T = soft-threshold by alpha
    split gain     = 1/2 [T(GL)²/(HL+lambda) + T(GR)²/(HR+lambda) - T(G)²/(H+lambda)] - gamma

Trees grow best-first, limited by ``num_leaves`` and ``max_depth``
(0 disables either limit), which covers both the depth-wise and the
leaf-wise boosting styles.
"""

from __future__ import annotations

import heapq
from dataclasses import asdict, dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import expit

from core.dataset import TabularDataset
from core.exceptions import ModelError
from core.learners.base import Model, check_xy, dataset_arrays, learner
from core.learners.tree import GAIN_TIE_TOLERANCE, LEAF, TreeStructure, midpoint

BASE_RATE_CLIP = 1e-6


@dataclass(frozen=True)
class GbtParams:
    n_estimators: int = 100
    learning_rate: float = 0.3
    max_depth: int = 6
    num_leaves: int = 0
    reg_lambda: float = 1.0
    reg_alpha: float = 0.0
    gamma: float = 0.0
    subsample: float = 1.0
    subsample_freq: int = 1
    colsample_bytree: float = 1.0
    min_child_samples: int = 1
    seed: int = 0

    def __post_init__(self) -> None:
        for name in ("learning_rate", "subsample", "colsample_bytree"):
            value = getattr(self, name)
            if not 0.0 < value <= 1.0:
                raise ModelError(f"{name} must lie in (0, 1], got {value}")
        if self.n_estimators < 0:
            raise ModelError(f"n_estimators must be >= 0, got {self.n_estimators}")
        if self.max_depth < 0 or self.num_leaves < 0 or self.num_leaves == 1:
            raise ModelError("max_depth must be >= 0 and num_leaves 0 or >= 2")
        if self.reg_lambda < 0 or self.reg_alpha < 0 or self.gamma < 0:
            raise ModelError("reg_lambda, reg_alpha and gamma must be >= 0")
        if self.min_child_samples < 1 or self.subsample_freq < 1:
            raise ModelError("min_child_samples and subsample_freq must be >= 1")

    @classmethod
    def from_mapping(cls, params: Dict[str, Any]) -> "GbtParams":
        """Coerce sampled hyper-parameters (floats from quniform) to field types."""
        ints = {"n_estimators", "max_depth", "num_leaves", "subsample_freq", "min_child_samples", "seed"}
        unknown = set(params) - set(cls.__dataclass_fields__)
        if unknown:
            raise ModelError(f"unknown GBT parameter(s): {sorted(unknown)}")
        return cls(**{k: int(round(v)) if k in ints else float(v) for k, v in params.items()})

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def soft_threshold(g: float, alpha: float) -> float:
    return float(np.sign(g) * max(abs(g) - alpha, 0.0))


def _score_term(g: np.ndarray, h: np.ndarray, alpha: float, lam: float) -> np.ndarray:
    t = np.sign(g) * np.maximum(np.abs(g) - alpha, 0.0)
    return t * t / (h + lam)


@dataclass
class _Candidate:
    gain: float
    feature: int
    threshold: float


def _best_split(
    X: np.ndarray,
    g: np.ndarray,
    h: np.ndarray,
    idx: np.ndarray,
    features: Sequence[int],
    p: GbtParams,
) -> Optional[_Candidate]:
    n = idx.size
    if n < 2 * p.min_child_samples:
        return None
    G, H = float(g[idx].sum()), float(h[idx].sum())
    parent = float(_score_term(np.array(G), np.array(H), p.reg_alpha, p.reg_lambda))
    best: Optional[_Candidate] = None
    for f in features:
        xs_all = X[idx, f]
        order = np.argsort(xs_all, kind="stable")
        xs = xs_all[order]
        GL = np.cumsum(g[idx][order])[:-1]
        HL = np.cumsum(h[idx][order])[:-1]
        n_left = np.arange(1, n)
        valid = (xs[:-1] < xs[1:]) & (n_left >= p.min_child_samples) & (n - n_left >= p.min_child_samples)
        if not valid.any():
            continue
        gain = 0.5 * (
            _score_term(GL, HL, p.reg_alpha, p.reg_lambda)
            + _score_term(G - GL, H - HL, p.reg_alpha, p.reg_lambda)
            - parent
        ) - p.gamma
        gain = np.where(valid, gain, -np.inf)
        top = gain.max()
        i = int(np.flatnonzero(gain >= top - GAIN_TIE_TOLERANCE)[0])
        if best is None or gain[i] > best.gain + GAIN_TIE_TOLERANCE:
            best = _Candidate(float(gain[i]), int(f), midpoint(float(xs[i]), float(xs[i + 1])))
    if best is None or best.gain <= 0.0:
        return None
    return best


def _leaf_weight(g: np.ndarray, h: np.ndarray, idx: np.ndarray, p: GbtParams) -> float:
    return -soft_threshold(float(g[idx].sum()), p.reg_alpha) / (float(h[idx].sum()) + p.reg_lambda)


def build_boosted_tree(
    X: np.ndarray,
    g: np.ndarray,
    h: np.ndarray,
    rows: np.ndarray,
    features: Sequence[int],
    p: GbtParams,
) -> TreeStructure:
    """Best-first growth: always split the open leaf with the largest gain."""
    nodes: List[list] = [[LEAF, 0.0, LEAF, LEAF, _leaf_weight(g, h, rows, p)]]
    members: Dict[int, np.ndarray] = {0: rows}
    depth: Dict[int, int] = {0: 0}
    heap: List[Tuple[float, int, _Candidate]] = []

    def consider(node: int) -> None:
        if p.max_depth and depth[node] >= p.max_depth:
            return
        cand = _best_split(X, g, h, members[node], features, p)
        if cand is not None:
            # ties go to the earlier node
            heapq.heappush(heap, (-cand.gain, node, cand))

    consider(0)
    n_leaves = 1
    while heap and (not p.num_leaves or n_leaves < p.num_leaves):
        _, node, cand = heapq.heappop(heap)
        idx = members.pop(node)
        go_left = X[idx, cand.feature] <= cand.threshold
        children = []
        for side in (idx[go_left], idx[~go_left]):
            child = len(nodes)
            nodes.append([LEAF, 0.0, LEAF, LEAF, _leaf_weight(g, h, side, p)])
            members[child] = side
            depth[child] = depth[node] + 1
            children.append(child)
        nodes[node][:4] = [cand.feature, cand.threshold, children[0], children[1]]
        n_leaves += 1
        for child in children:
            consider(child)

    return TreeStructure.from_nodes([tuple(n) for n in nodes])


class GbtModel(Model):
    family = "gbt"

    def __init__(self, base_score: float, trees: Sequence[TreeStructure], learning_rate: float, n_features: int,
                 params: Optional[GbtParams] = None, train_loss: Optional[List[float]] = None):
        self.base_score = float(base_score)
        self.trees = list(trees)
        self.learning_rate = float(learning_rate)
        self.input_shape = (int(n_features),)
        self.params = params
        self.train_loss = list(train_loss or [])

    def raw(self, X: np.ndarray) -> np.ndarray:
        X = self._check(X)
        out = np.full(X.shape[0], self.base_score)
        for tree in self.trees:
            out += self.learning_rate * tree.predict_values(X)
        return out

    def _scores(self, X: np.ndarray) -> np.ndarray:
        return expit(self.raw(X))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "base_score": self.base_score,
            "learning_rate": self.learning_rate,
            "n_features": self.input_shape[0],
            "trees": [t.to_dict() for t in self.trees],
            "params": self.params.to_dict() if self.params else None,
        }


def _logistic_loss(raw: np.ndarray, y: np.ndarray) -> float:
    return float(np.mean(np.logaddexp(0.0, raw) - y * raw))


def fit_gbt_params(X: np.ndarray, y: np.ndarray, params: GbtParams) -> GbtModel:
    X, y = check_xy(X, y)
    n, d = X.shape
    rate = float(np.clip(y.mean(), BASE_RATE_CLIP, 1.0 - BASE_RATE_CLIP))
    base = float(np.log(rate / (1.0 - rate)))
    raw = np.full(n, base)
    rng = np.random.default_rng(params.seed)
    n_rows = max(1, int(round(params.subsample * n)))
    n_cols = max(1, int(round(params.colsample_bytree * d)))

    trees: List[TreeStructure] = []
    losses = [_logistic_loss(raw, y)]
    rows = np.arange(n)
    for t in range(params.n_estimators):
        prob = expit(raw)
        g = prob - y
        h = prob * (1.0 - prob)
        if n_rows < n and t % params.subsample_freq == 0:
            rows = np.sort(rng.choice(n, size=n_rows, replace=False))
        features = np.arange(d) if n_cols >= d else np.sort(rng.choice(d, size=n_cols, replace=False))
        tree = build_boosted_tree(X, g, h, rows, features, params)
        trees.append(tree)
        raw = raw + params.learning_rate * tree.predict_values(X)
        losses.append(_logistic_loss(raw, y))

    return GbtModel(base, trees, params.learning_rate, d, params, losses)


def _fit_gbt(X: np.ndarray, y: np.ndarray, *, seed: int = 0, **params: Any) -> GbtModel:
    params.setdefault("seed", seed)
    return fit_gbt_params(X, y, GbtParams.from_mapping(params))


# depth-wise style
fit_gbt_x = learner(
    "gbt_x",
    family="gbt",
    description="boosted trees, depth-limited growth",
    defaults={"n_estimators": 100, "learning_rate": 0.3, "max_depth": 6, "num_leaves": 0, "reg_lambda": 1.0},
)(_fit_gbt)

# leaf-wise style
fit_gbt_l = learner(
    "gbt_l",
    family="gbt",
    description="boosted trees, leaf-limited best-first growth",
    defaults={
        "n_estimators": 100,
        "learning_rate": 0.1,
        "max_depth": 0,
        "num_leaves": 31,
        "reg_lambda": 0.0,
        "min_child_samples": 5,
    },
)(_fit_gbt)


def train_gbt(ds: TabularDataset, params: GbtParams = GbtParams()) -> GbtModel:
    return fit_gbt_params(*dataset_arrays(ds), params)
