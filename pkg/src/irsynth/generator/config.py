from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass, field
from functools import cached_property
from itertools import accumulate

import numpy as np

from ..errors import ConfigError
from ..records import (
    InfoType,
    LengthBucket,
    QueryAttributes,
    QueryType,
    Style,
    Task,
)

LENGTHS = tuple(LengthBucket)
TYPES = tuple(QueryType)
INFOS = tuple(InfoType)
STYLES = tuple(Style)
CLAIM_LENGTHS = (LengthBucket.FROM_10_TO_20, LengthBucket.OVER_20)

DEFAULT_LENGTH_RATIO = (1, 4, 2, 1)
DEFAULT_TYPE_RATIO_QA = (3, 1, 1)
# Long-doc drops "problem" and keeps the question:claim proportion.
DEFAULT_TYPE_RATIO_LONG_DOC = (3, 0, 1)
DEFAULT_INFO_RATIO = (1, 1)
DEFAULT_STYLE_RATIO = (5, 3, 3, 1, 1, 1, 1)
DEFAULT_HARD_NEGATIVES = (3, 7)


def _check_weights(name, w, n):
    if len(w) != n:
        raise ConfigError(f"{name} needs {n} weights, got {len(w)}")
    if any(x < 0 for x in w) or sum(w) <= 0:
        raise ConfigError(f"{name} weights must be nonnegative with positive sum: {w}")


def _cdf(w) -> list[float]:
    total = float(sum(w))
    c = [x / total for x in accumulate(w)]
    c[-1] = 1.0
    return c


def _pick(cdf: list[float], u: float) -> int:
    # first index whose cumulative mass exceeds u; zero-weight slots are never chosen
    return bisect_right(cdf, u)


@dataclass(frozen=True)
class GenerationConfig:
    task: Task = Task.QA
    n_queries: int = 10
    length_ratio: tuple[float, ...] = DEFAULT_LENGTH_RATIO
    type_ratio: tuple[float, ...] | None = None
    info_ratio: tuple[float, ...] = DEFAULT_INFO_RATIO
    style_ratio: tuple[float, ...] = DEFAULT_STYLE_RATIO
    hard_negative_range: tuple[int, int] | None = None
    rewrite_max_iters: int = 3
    rewrite_overlap_threshold: float = 0.6
    rng_seed: int = 0
    temperature: float = 0.8
    query_id_prefix: str = "q"
    extra: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        task = Task(self.task)
        object.__setattr__(self, "task", task)
        if self.type_ratio is None:
            tr = DEFAULT_TYPE_RATIO_QA if task is Task.QA else DEFAULT_TYPE_RATIO_LONG_DOC
            object.__setattr__(self, "type_ratio", tr)
        if task is Task.LONG_DOC:
            object.__setattr__(self, "hard_negative_range", (0, 0))
        elif self.hard_negative_range is None:
            object.__setattr__(self, "hard_negative_range", DEFAULT_HARD_NEGATIVES)
        for name in ("length_ratio", "type_ratio", "info_ratio", "style_ratio"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        object.__setattr__(self, "hard_negative_range", tuple(self.hard_negative_range))

        if self.n_queries < 1:
            raise ConfigError("n_queries must be >= 1")
        _check_weights("length_ratio", self.length_ratio, len(LENGTHS))
        _check_weights("type_ratio", self.type_ratio, len(TYPES))
        _check_weights("info_ratio", self.info_ratio, len(INFOS))
        _check_weights("style_ratio", self.style_ratio, len(STYLES))
        if task is Task.LONG_DOC and self.type_ratio[TYPES.index(QueryType.PROBLEM)] > 0:
            raise ConfigError("long-doc generation only uses question and claim queries")
        claim_w = [self.length_ratio[LENGTHS.index(b)] for b in CLAIM_LENGTHS]
        if self.type_ratio[TYPES.index(QueryType.CLAIM)] > 0 and sum(claim_w) <= 0:
            raise ConfigError("claim queries need positive weight on the two long length buckets")
        lo, hi = self.hard_negative_range
        if lo < 0 or lo > hi:
            raise ConfigError(f"invalid hard_negative_range {self.hard_negative_range}")
        if self.rewrite_max_iters < 1:
            raise ConfigError("rewrite_max_iters must be >= 1")
        if not 0.0 <= self.rewrite_overlap_threshold <= 1.0:
            raise ConfigError("rewrite_overlap_threshold must lie in [0, 1]")

    @cached_property
    def _cdfs(self):
        claim_w = [self.length_ratio[LENGTHS.index(b)] for b in CLAIM_LENGTHS]
        return {
            "length": _cdf(self.length_ratio),
            "type": _cdf(self.type_ratio),
            "info": _cdf(self.info_ratio),
            "style": _cdf(self.style_ratio),
            "claim_length": _cdf(claim_w) if sum(claim_w) > 0 else None,
        }

    def to_dict(self) -> dict:
        return {
            "task": self.task.value,
            "n_queries": self.n_queries,
            "length_ratio": list(self.length_ratio),
            "type_ratio": list(self.type_ratio),
            "info_ratio": list(self.info_ratio),
            "style_ratio": list(self.style_ratio),
            "hard_negative_range": list(self.hard_negative_range),
            "rewrite_max_iters": self.rewrite_max_iters,
            "rewrite_overlap_threshold": self.rewrite_overlap_threshold,
            "rng_seed": self.rng_seed,
            "temperature": self.temperature,
            "query_id_prefix": self.query_id_prefix,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GenerationConfig":
        kw = dict(d)
        if "task" in kw:
            kw["task"] = Task(kw["task"])
        for k in ("length_ratio", "type_ratio", "info_ratio", "style_ratio", "hard_negative_range"):
            if kw.get(k) is not None:
                kw[k] = tuple(kw[k])
        return cls(**kw)


def sample_attributes(config: GenerationConfig, rng: np.random.Generator) -> QueryAttributes:
    """Draw one attribute tuple.

    Length, type, info-type and style are drawn independently; a claim
    then has its length redrawn from the two long buckets with their
    weights renormalized.
    """
    c = config._cdfs
    length = LENGTHS[_pick(c["length"], rng.random())]
    qtype = TYPES[_pick(c["type"], rng.random())]
    info = INFOS[_pick(c["info"], rng.random())]
    style = STYLES[_pick(c["style"], rng.random())]
    if qtype is QueryType.CLAIM:
        length = CLAIM_LENGTHS[_pick(c["claim_length"], rng.random())]
    return QueryAttributes(length, qtype, info, style)


def attribute_probabilities(config: GenerationConfig) -> dict[str, dict[str, float]]:
    """Exact marginal probability of every category under ``config``."""
    def norm(w):
        s = float(sum(w))
        return [x / s for x in w]

    pl, pt, pi, ps = map(norm, (config.length_ratio, config.type_ratio, config.info_ratio,
                                config.style_ratio))
    p_claim = pt[TYPES.index(QueryType.CLAIM)]
    claim_w = norm([config.length_ratio[LENGTHS.index(b)] for b in CLAIM_LENGTHS]) if p_claim else [0, 0]
    length = {b.value: (1 - p_claim) * p for b, p in zip(LENGTHS, pl)}
    for b, p in zip(CLAIM_LENGTHS, claim_w):
        length[b.value] += p_claim * p
    return {
        "length": length,
        "type": {t.value: p for t, p in zip(TYPES, pt)},
        "info": {t.value: p for t, p in zip(INFOS, pi)},
        "style": {t.value: p for t, p in zip(STYLES, ps)},
    }


def iteration_rng(seed: int, index: int, stream: int = 0) -> np.random.Generator:
    """Independent random stream for loop iteration ``index``."""
    return np.random.default_rng([seed & 0xFFFFFFFFFFFFFFFF, index, stream])
