"""Baseline selection rules: top-k by score, greedy max-min diversity,
and seeded random selection."""

from __future__ import annotations

import numpy as np

from .errors import ValidationError
from .tensor_io import make_rng


def topk_select(scores, budget: int):
    """Indices of the min(T, N) largest scores, descending, lowest index on ties."""
    from .selection import SelectionResult

    s = np.asarray(scores, dtype=np.float64)
    if s.ndim != 1 or s.shape[0] < 1:
        raise ValidationError("scores must be a non-empty 1-D vector")
    if budget < 1:
        raise ValidationError("budget must be >= 1")
    t = min(budget, s.shape[0])
    # stable sort on negated scores keeps lowest index first among ties
    order = np.argsort(-s, kind="stable")
    return SelectionResult(picked=[int(i) for i in order[:t]])


def maxmin_select(tokens, budget: int, init: str = "index_zero", scores=None):
    """Greedy farthest-point selection under cosine distance.

    Starts from index 0 or the score argmax, then repeatedly adds the
    candidate with the largest minimum distance to the selected set
    (lowest index on ties).
    """
    from .selection import SelectionResult

    x = np.asarray(tokens, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 1:
        raise ValidationError(f"tokens must be a non-empty 2-D matrix, got {x.shape}")
    if budget < 1:
        raise ValidationError("budget must be >= 1")
    n = x.shape[0]
    norms = np.linalg.norm(x, axis=1)
    bad = np.flatnonzero(norms <= 1e-12)
    if bad.size:
        raise ValidationError(f"token row {bad[0]} has zero norm")
    unit = x / norms[:, None]

    if init == "argmax_score":
        if scores is None:
            raise ValidationError("init 'argmax_score' requires scores")
        s = np.asarray(scores, dtype=np.float64)
        if s.shape != (n,):
            raise ValidationError(f"scores shape {s.shape} does not match {n} tokens")
        first = int(np.argmax(s))
    elif init == "index_zero":
        first = 0
    else:
        raise ValidationError(f"unknown init {init!r}")

    picked = [first]
    min_dist = 1.0 - unit @ unit[first]
    min_dist[first] = -np.inf  # never reselect
    while len(picked) < min(budget, n):
        nxt = int(np.argmax(min_dist))
        picked.append(nxt)
        dist = 1.0 - unit @ unit[nxt]
        np.minimum(min_dist, dist, out=min_dist)
        min_dist[nxt] = -np.inf
    return SelectionResult(picked=picked)


def random_select(n: int, budget: int, seed: int):
    """min(T, n) distinct indices from the pinned generator."""
    from .selection import SelectionResult

    if n < 1:
        raise ValidationError("need at least one token")
    if budget < 1:
        raise ValidationError("budget must be >= 1")
    rng = make_rng(seed)
    picked = rng.permutation(n)[: min(budget, n)]
    return SelectionResult(picked=[int(i) for i in picked])
