"""Iterative importance-diversity selection.

The core loop: pick the current argmax score (lowest index on ties), then
suppress remaining scores by exp(-gamma * d^2) times the picked score,
where d is cosine distance to the picked token. Picked scores become -inf
so they can never be reselected; updates skip those sentinel entries.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .baselines import maxmin_select, random_select, topk_select
from .errors import ValidationError
from .importance import NORM_EPS, ImportanceSource, resolve_importance
from .tensor_io import Case


class TieRule(enum.Enum):
    LOWEST_INDEX = "lowest_index"


class Method(enum.Enum):
    ID = "id"
    TOPK = "topk"
    MAXMIN = "maxmin"
    RANDOM = "random"


@dataclass(frozen=True)
class SelectionConfig:
    budget: int
    gamma: float = 20.0
    tie_rule: TieRule = TieRule.LOWEST_INDEX
    clamp_negative_source: bool = False
    trace: bool = False

    def validate(self) -> None:
        if self.budget < 1:
            raise ValidationError("budget must be >= 1")
        if not (self.gamma > 0):
            raise ValidationError("gamma must be > 0")


@dataclass(frozen=True)
class StepRecord:
    picked: int
    score: float  # score at pick time, before suppression/sentinel
    suppressed_below_zero: int
    negative_source: bool


@dataclass
class SelectionResult:
    picked: list[int]
    retained: list[int] = field(default_factory=list)
    trace: list[StepRecord] | None = None

    def __post_init__(self):
        if not self.retained:
            self.retained = sorted(self.picked)


def cosine_distance(u, v) -> float:
    """1 - cos(u, v); in [0, 2]."""
    a = np.asarray(u, dtype=np.float64)
    b = np.asarray(v, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise ValidationError(f"shape mismatch: {a.shape} vs {b.shape}")
    na, nb = float(np.linalg.norm(a)), float(np.linalg.norm(b))
    if na <= NORM_EPS or nb <= NORM_EPS:
        raise ValidationError("cosine distance undefined for zero-norm input")
    return 1.0 - float(a @ b) / (na * nb)


def suppression_weight(dist: float, gamma: float) -> float:
    """exp(-gamma * dist^2); 1 at dist 0, decaying with distance."""
    if dist < 0:
        raise ValidationError("distance must be >= 0")
    return math.exp(-gamma * dist * dist)


def _token_norms(tokens64: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(tokens64, axis=1)
    bad = np.flatnonzero(norms <= NORM_EPS)
    if bad.size:
        raise ValidationError(f"token row {bad[0]} has zero norm")
    return norms


def update_scores(scores, picked: int, tokens, gamma: float,
                  clamp_negative_source: bool = False) -> np.ndarray:
    """One suppression step; returns a new float64 score array.

    Entries already at -inf are sentinels for previously selected tokens
    and are left untouched; scores[picked] becomes -inf.
    """
    s = np.asarray(scores, dtype=np.float64).copy()
    tokens64 = np.asarray(tokens, dtype=np.float64)
    n = tokens64.shape[0]
    if not (0 <= picked < n):
        raise ValidationError(f"picked index {picked} out of range [0, {n})")
    if not math.isfinite(s[picked]):
        raise ValidationError("picked score must be finite")
    norms = _token_norms(tokens64)
    src = s[picked]
    if clamp_negative_source:
        src = max(src, 0.0)
    dist = 1.0 - (tokens64 @ tokens64[picked]) / (norms * norms[picked])
    w = np.exp(-gamma * dist * dist)
    active = np.isfinite(s)
    active[picked] = False
    s[active] -= w[active] * src
    s[picked] = -np.inf
    return s


def id_select(tokens, scores, config: SelectionConfig) -> SelectionResult:
    """Importance-diversity selection over N tokens, budget min(T, N)."""
    config.validate()
    tokens64 = np.asarray(tokens, dtype=np.float64)
    if tokens64.ndim != 2 or tokens64.shape[0] < 1:
        raise ValidationError(f"tokens must be a non-empty 2-D matrix, got {tokens64.shape}")
    n = tokens64.shape[0]
    s = np.asarray(scores, dtype=np.float64).copy()
    if s.shape != (n,):
        raise ValidationError(f"scores shape {s.shape} does not match {n} tokens")
    if not np.isfinite(s).all():
        raise ValidationError("initial scores must be finite")
    norms = _token_norms(tokens64)

    budget = min(config.budget, n)
    gamma = config.gamma
    picked: list[int] = []
    trace: list[StepRecord] | None = [] if config.trace else None

    for _ in range(budget):
        i = int(np.argmax(s))  # first occurrence wins: lowest-index ties
        pre = float(s[i])
        src = max(pre, 0.0) if config.clamp_negative_source else pre
        dist = 1.0 - (tokens64 @ tokens64[i]) / (norms * norms[i])
        w = np.exp(-gamma * dist * dist)
        active = np.isfinite(s)
        active[i] = False
        old = s[active]
        new = old - w[active] * src
        if trace is not None:
            crossed = int(np.count_nonzero((old >= 0) & (new < 0)))
            trace.append(StepRecord(i, pre, crossed, pre < 0))
        s[active] = new
        s[i] = -np.inf
        picked.append(i)

    return SelectionResult(picked=picked, trace=trace)


def select(case: Case, source: ImportanceSource, config: SelectionConfig,
           method: Method, seed: int | None = None,
           external_scores=None) -> SelectionResult:
    """Dispatch a case to ID selection or one of the baseline rules."""
    config.validate()
    if method is Method.RANDOM:
        return random_select(case.n_tokens, config.budget,
                             0 if seed is None else seed)
    if method is Method.MAXMIN:
        # ARGMAX_SCORE init when the source is resolvable, for
        # comparability with the first ID pick; INDEX_ZERO otherwise.
        try:
            scores = resolve_importance(case, source, external=external_scores)
        except ValidationError:
            return maxmin_select(case.tokens, config.budget, init="index_zero")
        return maxmin_select(case.tokens, config.budget,
                             init="argmax_score", scores=scores)
    scores = resolve_importance(case, source, external=external_scores)
    if method is Method.TOPK:
        return topk_select(scores, config.budget)
    if method is Method.ID:
        return id_select(case.tokens, scores, config)
    raise ValidationError(f"unknown method {method!r}")
