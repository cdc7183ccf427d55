"""Selection-quality metrics: diversity, importance retention, coverage,
redundancy. Computed naively; budgets are small."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError


@dataclass(frozen=True)
class MetricsReport:
    min_pairwise_distance: float
    mean_pairwise_similarity: float
    importance_retention: float | None
    mean_nearest_selected_distance: float
    n_selected: int


def _unit_rows(tokens) -> np.ndarray:
    x = np.asarray(tokens, dtype=np.float64)
    norms = np.linalg.norm(x, axis=1)
    bad = np.flatnonzero(norms <= 1e-12)
    if bad.size:
        raise ValidationError(f"token row {bad[0]} has zero norm")
    return x / norms[:, None]


def _indices(selection) -> list[int]:
    return list(selection.retained if hasattr(selection, "retained") else selection)


def min_pairwise_distance(tokens, selection) -> float:
    """Minimum cosine distance over selected pairs."""
    idx = _indices(selection)
    if len(idx) < 2:
        raise ValidationError("need at least 2 selected tokens")
    unit = _unit_rows(tokens)[idx]
    sim = unit @ unit.T
    iu = np.triu_indices(len(idx), k=1)
    return float((1.0 - sim[iu]).min())


def mean_pairwise_similarity(tokens, selection) -> float:
    """Mean cosine similarity over unordered selected pairs."""
    idx = _indices(selection)
    if len(idx) < 2:
        raise ValidationError("need at least 2 selected tokens")
    unit = _unit_rows(tokens)[idx]
    sim = unit @ unit.T
    iu = np.triu_indices(len(idx), k=1)
    return float(sim[iu].mean())


def importance_retention(initial_scores, selection) -> float:
    """Selected score mass over the best achievable (top-k) mass."""
    s = np.asarray(initial_scores, dtype=np.float64)
    idx = _indices(selection)
    if not idx:
        raise ValidationError("empty selection")
    if s.size and float(s.min()) < 0:
        raise ValidationError("importance_retention undefined for negative scores")
    k = len(idx)
    top = np.sort(s)[::-1][:k]
    denom = float(top.sum())
    if denom <= 0:
        raise ValidationError("top-k score mass is zero")
    return float(s[idx].sum()) / denom


def mean_nearest_selected_distance(tokens, selection) -> float:
    """Mean over all tokens of cosine distance to the nearest selected token."""
    idx = _indices(selection)
    if not idx:
        raise ValidationError("empty selection")
    unit = _unit_rows(tokens)
    dist = 1.0 - unit @ unit[idx].T  # N x |sel|
    nearest = dist.min(axis=1)
    nearest[idx] = 0.0  # selected tokens cover themselves exactly
    return float(nearest.mean())


def compute_report(tokens, initial_scores, selection,
                   skip_retention: bool = False) -> MetricsReport:
    idx = _indices(selection)
    retention = None
    if not skip_retention:
        retention = importance_retention(initial_scores, selection)
    if len(idx) >= 2:
        mpd = min_pairwise_distance(tokens, selection)
        mps = mean_pairwise_similarity(tokens, selection)
    else:
        mpd = float("nan")
        mps = float("nan")
    return MetricsReport(
        min_pairwise_distance=mpd,
        mean_pairwise_similarity=mps,
        importance_retention=retention,
        mean_nearest_selected_distance=mean_nearest_selected_distance(tokens, selection),
        n_selected=len(idx),
    )
