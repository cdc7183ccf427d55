"""Importance estimators: saliency pass-through, cross-modal attention,
instruction relevance, and the unified score.

All reductions run in float64; score vectors are float64 in memory.
"""

from __future__ import annotations

import enum
import math

import numpy as np

from .errors import ValidationError
from .tensor_io import Case

NORM_EPS = 1e-12


class ImportanceSource(enum.Enum):
    CLS = "cls"
    CROSS = "cross"
    UNIFIED = "unified"
    EXTERNAL = "external"


def _as_f64(a) -> np.ndarray:
    return np.asarray(a, dtype=np.float64)


def _softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max()
    exp = np.exp(shifted)
    return exp / exp.sum()


def scaled_softmax_attention(query, keys) -> np.ndarray:
    """softmax_j(query . keys[j] / sqrt(d)); a distribution over the N keys."""
    q = _as_f64(query)
    k = _as_f64(keys)
    if q.ndim != 1 or k.ndim != 2 or k.shape[1] != q.shape[0]:
        raise ValidationError(
            f"query shape {q.shape} incompatible with keys shape {k.shape}"
        )
    if q.shape[0] < 1 or k.shape[0] < 1:
        raise ValidationError("query dim and key count must be >= 1")
    logits = k @ q / math.sqrt(q.shape[0])
    return _softmax(logits)


def multi_head_cross_attention(q_heads, k_heads) -> np.ndarray:
    """Mean over heads of per-head scaled softmax attention (scale sqrt(d_h))."""
    q = _as_f64(q_heads)
    k = _as_f64(k_heads)
    if q.ndim != 2 or k.ndim != 3 or k.shape[0] != q.shape[0] or k.shape[2] != q.shape[1]:
        raise ValidationError(
            f"q_heads shape {q.shape} incompatible with k_heads shape {k.shape}"
        )
    per_head = [scaled_softmax_attention(q[h], k[h]) for h in range(q.shape[0])]
    return np.mean(per_head, axis=0)


def instruction_relevance(vision_embeddings, text_feature) -> np.ndarray:
    """Cosine similarity of each embedding row against the instruction feature."""
    v = _as_f64(vision_embeddings)
    t = _as_f64(text_feature)
    if v.ndim != 2 or t.ndim != 1 or v.shape[1] != t.shape[0]:
        raise ValidationError(
            f"vision_embeddings shape {v.shape} incompatible with "
            f"text_feature shape {t.shape}"
        )
    t_norm = float(np.linalg.norm(t))
    if t_norm <= NORM_EPS:
        raise ValidationError("text feature has zero norm")
    row_norms = np.linalg.norm(v, axis=1)
    bad = np.flatnonzero(row_norms <= NORM_EPS)
    if bad.size:
        raise ValidationError(f"vision embedding row {bad[0]} has zero norm")
    return (v @ t) / (row_norms * t_norm)


def min_max_normalize(scores) -> np.ndarray:
    """(s - min) / (max - min); a constant vector maps to all ones."""
    s = _as_f64(scores)
    if s.ndim != 1 or s.shape[0] < 1:
        raise ValidationError("scores must be a non-empty 1-D vector")
    lo, hi = float(s.min()), float(s.max())
    if hi == lo:
        # Constant relevance carries no information; keep saliency intact.
        return np.ones_like(s)
    return (s - lo) / (hi - lo)


def unified_score(relevance_norm, cls_saliency) -> np.ndarray:
    """Elementwise product of normalized relevance and saliency."""
    r = _as_f64(relevance_norm)
    c = _as_f64(cls_saliency)
    if r.shape != c.shape:
        raise ValidationError(
            f"length mismatch: relevance {r.shape} vs saliency {c.shape}"
        )
    return r * c


def resolve_importance(case: Case, source: ImportanceSource, external=None) -> np.ndarray:
    """Produce the initial score vector for a case under the given source."""
    n = case.n_tokens
    if source is ImportanceSource.CLS:
        if case.cls_attention is None:
            raise ValidationError("source 'cls' requires field cls_attention")
        return _as_f64(case.cls_attention)
    if source is ImportanceSource.CROSS:
        if case.cross_query is None:
            raise ValidationError("source 'cross' requires field cross_query")
        if case.cross_keys is None:
            raise ValidationError("source 'cross' requires field cross_keys")
        if case.cross_query.ndim == 1:
            out = scaled_softmax_attention(case.cross_query, case.cross_keys)
        else:
            out = multi_head_cross_attention(case.cross_query, case.cross_keys)
        if out.shape[0] != n:
            raise ValidationError(
                f"cross attention yields {out.shape[0]} scores for {n} tokens"
            )
        return out
    if source is ImportanceSource.UNIFIED:
        for field in ("text_feature", "vision_embeddings", "cls_attention"):
            if getattr(case, field) is None:
                raise ValidationError(f"source 'unified' requires field {field}")
        relevance = instruction_relevance(case.vision_embeddings, case.text_feature)
        return unified_score(min_max_normalize(relevance), _as_f64(case.cls_attention))
    if source is ImportanceSource.EXTERNAL:
        if external is None:
            raise ValidationError("source 'external' requires a caller-supplied score vector")
        s = _as_f64(external)
        if s.ndim != 1 or s.shape[0] != n:
            raise ValidationError(
                f"external scores have shape {s.shape}, expected ({n},)"
            )
        if not np.isfinite(s).all():
            raise ValidationError("external scores contain non-finite entries")
        return s
    raise ValidationError(f"unknown importance source {source!r}")
