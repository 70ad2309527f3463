# -*- coding: utf-8 -*-
"""
core.hpo.tpe

Tree-structured Parzen Estimator.

Ok trials are split at the gamma-quantile of their losses into a good set
(``ceil(gamma * n_ok)`` lowest losses) and a bad set. Each continuous
dimension gets two mixtures of truncated Gaussians, l(x) over the good
observations and g(x) over the bad ones, each with one extra component
for the prior. Choice dimensions use add-one smoothed counts. Candidates
are drawn from l and the one maximizing l(x) / g(x), summed in log space
over dimensions, is returned.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Dict, List, Sequence, Tuple

import numpy as np
from scipy.special import logsumexp
from scipy.stats import truncnorm

from core.config import TPE_GAMMA, TPE_N_CANDIDATES, TPE_N_STARTUP
from core.exceptions import HpoError
from core.hpo.history import Trial, TrialHistory
from core.hpo.space import Choice, Params, SearchSpace, suggest_random

MAX_BANDWIDTH_DIVISOR = 100


@dataclass(frozen=True)
class TpeConfig:
    gamma: float = TPE_GAMMA
    n_candidates: int = TPE_N_CANDIDATES
    n_startup: int = TPE_N_STARTUP
    seed: int = 0

    def __post_init__(self) -> None:
        if not 0.0 < self.gamma < 1.0:
            raise HpoError(f"gamma must lie in (0, 1), got {self.gamma}")
        if self.n_candidates < 1 or self.n_startup < 0:
            raise HpoError("n_candidates must be >= 1 and n_startup >= 0")


def split_good_bad(trials: Sequence[Trial], gamma: float) -> Tuple[List[Trial], List[Trial]]:
    """Lowest ``ceil(gamma * n)`` losses are good; ties keep history order."""
    ranked = sorted(trials, key=lambda t: (t.loss, t.index))
    n_good = math.ceil(gamma * len(ranked))
    return ranked[:n_good], ranked[n_good:]


@dataclass(frozen=True)
class ParzenMixture:
    """Equal-weight truncated Gaussians on [low, high]."""

    mus: np.ndarray
    sigmas: np.ndarray
    low: float
    high: float

    @classmethod
    def fit(cls, observations: Sequence[float], low: float, high: float) -> "ParzenMixture":
        obs = np.sort(np.asarray(observations, dtype=np.float64))
        width = high - low
        prior_mu, prior_sigma = 0.5 * (low + high), width
        if obs.size == 0:
            return cls(np.array([prior_mu]), np.array([prior_sigma]), low, high)
        # the domain bounds act as outer neighbours
        padded = np.concatenate([[low], obs, [high]])
        sigmas = np.maximum(padded[1:-1] - padded[:-2], padded[2:] - padded[1:-1])
        floor = width / min(MAX_BANDWIDTH_DIVISOR, obs.size)
        sigmas = np.clip(sigmas, floor, width)
        return cls(np.append(obs, prior_mu), np.append(sigmas, prior_sigma), low, high)

    def _ab(self) -> Tuple[np.ndarray, np.ndarray]:
        return (self.low - self.mus) / self.sigmas, (self.high - self.mus) / self.sigmas

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        comp = rng.integers(self.mus.size, size=size)
        a, b = self._ab()
        draws = truncnorm.rvs(a[comp], b[comp], loc=self.mus[comp], scale=self.sigmas[comp], random_state=rng)
        return np.clip(np.atleast_1d(draws), self.low, self.high)

    def log_pdf(self, x: np.ndarray) -> np.ndarray:
        a, b = self._ab()
        x = np.asarray(x, dtype=np.float64)[:, None]
        comp = truncnorm.logpdf(x, a[None, :], b[None, :], loc=self.mus[None, :], scale=self.sigmas[None, :])
        return logsumexp(comp, axis=1) - math.log(self.mus.size)


def _categorical_log_probs(dim: Choice, values: Sequence[Any]) -> np.ndarray:
    counts = np.ones(len(dim.values))
    for v in values:
        counts[dim.index_of(v)] += 1.0
    return np.log(counts / counts.sum())


def suggest_tpe(space: SearchSpace, history: TrialHistory, config: TpeConfig = TpeConfig()) -> Params:
    index = len(history)
    ok = history.ok_trials()
    if len(ok) < max(config.n_startup, 1):
        return suggest_random(space, config.seed, index)

    rng = np.random.default_rng([config.seed, index])
    good, bad = split_good_bad(ok, config.gamma)
    n = config.n_candidates
    score = np.zeros(n)
    columns: Dict[str, List[Any]] = {}

    for name, dim in space.dims.items():
        if isinstance(dim, Choice):
            log_l = _categorical_log_probs(dim, [t.params[name] for t in good])
            log_g = _categorical_log_probs(dim, [t.params[name] for t in bad])
            probs = np.exp(log_l)
            picks = rng.choice(len(dim.values), size=n, p=probs / probs.sum())
            score += log_l[picks] - log_g[picks]
            columns[name] = [dim.values[i] for i in picks]
            continue
        low, high = dim.bounds()
        l_mix = ParzenMixture.fit([dim.to_internal(t.params[name]) for t in good], low, high)
        g_mix = ParzenMixture.fit([dim.to_internal(t.params[name]) for t in bad], low, high)
        draws = l_mix.sample(rng, n)
        score += l_mix.log_pdf(draws) - g_mix.log_pdf(draws)
        columns[name] = [dim.emit(x) for x in draws]

    best = int(np.argmax(score))
    return {name: columns[name][best] for name in space.dims}
