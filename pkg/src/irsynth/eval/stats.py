"""Leaderboard agreement statistics: Spearman rho, p-values, resampling."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
from scipy import stats as sps

from ..errors import ConfigError, UnsupportedInputError


def _check_ranks(name: str, r: Sequence[int]) -> np.ndarray:
    a = np.asarray(r)
    n = len(a)
    if a.ndim != 1 or not np.issubdtype(a.dtype, np.integer):
        raise UnsupportedInputError(f"{name} must be a 1-d integer rank vector")
    if sorted(a.tolist()) != list(range(1, n + 1)):
        raise UnsupportedInputError(f"{name} must be a tie-free permutation of 1..{n}")
    return a


def spearman(ranks_a: Sequence[int], ranks_b: Sequence[int]) -> tuple[float, float]:
    """Spearman's rho for tie-free ranks, with a two-sided t-approximation p-value.

    ``rho = 1 - 6 sum(d^2) / (n (n^2 - 1))``; the p-value uses
    ``t = rho sqrt((n-2)/(1-rho^2))`` on ``n-2`` degrees of freedom and is 0
    when ``|rho| = 1``.
    """
    if len(ranks_a) != len(ranks_b):
        raise ConfigError(f"rank vectors differ in length: {len(ranks_a)} vs {len(ranks_b)}")
    n = len(ranks_a)
    if n < 3:
        raise ConfigError("spearman needs at least 3 items")
    a = _check_ranks("ranks_a", ranks_a)
    b = _check_ranks("ranks_b", ranks_b)
    d2 = int(((a - b) ** 2).sum())
    rho = 1.0 - 6.0 * d2 / (n * (n * n - 1))
    if abs(rho) >= 1.0:
        return rho, 0.0
    t = rho * math.sqrt((n - 2) / (1.0 - rho * rho))
    p = 2.0 * sps.t.sf(abs(t), n - 2)
    return rho, float(min(1.0, p))


def spearman_permutation_pvalue(ranks_a: Sequence[int], ranks_b: Sequence[int],
                                n_resamples: int = 10_000, seed: int = 0) -> float:
    """Two-sided permutation p-value for rho, for cross-checking small n.

    Uses the ``(hits + 1) / (n_resamples + 1)`` estimator so the result is
    never exactly zero.
    """
    rho, _ = spearman(ranks_a, ranks_b)
    a = np.asarray(ranks_a, dtype=float)
    b = np.asarray(ranks_b, dtype=float)
    n = len(a)
    rng = np.random.default_rng(seed)
    perms = np.argsort(rng.random((n_resamples, n)), axis=1)
    d2 = ((a[None, :] - b[perms]) ** 2).sum(axis=1)
    rhos = 1.0 - 6.0 * d2 / (n * (n * n - 1))
    hits = int((np.abs(rhos) >= abs(rho) - 1e-12).sum())
    return (hits + 1) / (n_resamples + 1)


def rank_by_score(scores: Mapping[str, float]) -> dict[str, int]:
    """1-based ranks, best score first; equal scores ordered by model id."""
    order = sorted(scores, key=lambda m: (-scores[m], m))
    return {m: i + 1 for i, m in enumerate(order)}


@dataclass(frozen=True)
class ConsistencyReport:
    model_ids: tuple[str, ...]
    ranks_a: tuple[int, ...]
    ranks_b: tuple[int, ...]
    rho: float
    p_value: float


def consistency_analysis(scores_a: Mapping[str, float], scores_b: Mapping[str, float]
                         ) -> ConsistencyReport:
    """Rank models by each score map and correlate the two rankings."""
    if set(scores_a) != set(scores_b):
        diff = sorted(set(scores_a) ^ set(scores_b))
        raise ConfigError(f"model sets differ: {diff}")
    if len(scores_a) < 3:
        raise ConfigError("need at least 3 models")
    models = tuple(sorted(scores_a))
    ra, rb = rank_by_score(scores_a), rank_by_score(scores_b)
    va = tuple(ra[m] for m in models)
    vb = tuple(rb[m] for m in models)
    rho, p = spearman(va, vb)
    return ConsistencyReport(models, va, vb, rho, p)


@dataclass(frozen=True)
class ResampleResult:
    trials: tuple[tuple[float, float], ...]
    full_rho: float

    @property
    def rhos(self) -> np.ndarray:
        return np.array([r for r, _ in self.trials])

    @property
    def mean_rho(self) -> float:
        return float(self.rhos.mean())

    @property
    def std_rho(self) -> float:
        return float(self.rhos.std())


def robustness_resample(per_query_scores: Mapping[str, Mapping[str, float]],
                        reference_scores: Mapping[str, float], sample_size: int = 2000,
                        trials: int = 30, rng_seed: int = 0) -> ResampleResult:
    """Repeat the consistency analysis on random query subsets.

    Each trial draws ``sample_size`` queries without replacement from the
    shared query universe, averages every model's per-query metric over the
    subset, and correlates the resulting ranking with ``reference_scores``.
    """
    models = sorted(per_query_scores)
    if set(models) != set(reference_scores):
        raise ConfigError("per-query models and reference models differ")
    universe = sorted(per_query_scores[models[0]])
    for m in models[1:]:
        if set(per_query_scores[m]) != set(universe):
            raise ConfigError(f"model {m!r} is scored on a different query set")
    if not 1 <= sample_size <= len(universe):
        raise ConfigError(f"sample_size {sample_size} outside [1, {len(universe)}]")
    mat = np.array([[per_query_scores[m][q] for q in universe] for m in models], dtype=float)
    full = consistency_analysis(reference_scores, dict(zip(models, mat.mean(axis=1)))).rho
    rng = np.random.default_rng([rng_seed & 0xFFFFFFFFFFFFFFFF])
    out = []
    for _ in range(trials):
        idx = rng.choice(len(universe), size=sample_size, replace=False)
        idx.sort()
        means = mat[:, idx].mean(axis=1)
        rep = consistency_analysis(reference_scores, dict(zip(models, means.tolist())))
        out.append((rep.rho, rep.p_value))
    return ResampleResult(tuple(out), full)
