import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from idselect import (
    ImportanceSource,
    Method,
    SelectionConfig,
    SynthSpec,
    ValidationError,
    cluster_labels,
    cosine_distance,
    id_select,
    select,
    suppression_weight,
    synth_case,
    topk_select,
    update_scores,
)

from reference import id_select_reference


def unit_at(angle_deg):
    a = math.radians(angle_deg)
    return [math.cos(a), math.sin(a)]


ANGLE_TOKENS = np.array(
    [unit_at(0), unit_at(5), unit_at(90), unit_at(95)], dtype=np.float32
)
ANGLE_SCORES = np.array([1.0, 0.9, 0.5, 0.4])


def test_cosine_distance_basics():
    u = np.array([1.0, 0.0])
    assert cosine_distance(u, u) == pytest.approx(0.0, abs=1e-6)
    assert cosine_distance(u, np.array([0.0, 1.0])) == pytest.approx(1.0)
    assert cosine_distance(u, np.array([-1.0, 0.0])) == pytest.approx(2.0)
    assert cosine_distance(u, np.array([0.0, 2.0])) == cosine_distance(
        np.array([0.0, 2.0]), u
    )
    with pytest.raises(ValidationError):
        cosine_distance(u, np.zeros(2))


def test_suppression_weight_values():
    assert suppression_weight(0.0, 20.0) == 1.0
    assert suppression_weight(1.0, 20.0) == pytest.approx(math.exp(-20.0), rel=1e-12)
    assert suppression_weight(0.5, 20.0) == pytest.approx(math.exp(-5.0), rel=1e-12)
    # strictly decreasing
    ds = np.linspace(0, 2, 50)
    ws = [suppression_weight(d, 3.0) for d in ds]
    assert all(a > b for a, b in zip(ws, ws[1:]))


def test_update_scores_duplicate_token():
    tokens = np.array([[1.0, 0.0], [1.0, 0.0]])
    out = update_scores(np.array([1.0, 0.8]), 0, tokens, gamma=20.0)
    assert out[0] == -np.inf
    assert out[1] == pytest.approx(-0.2, abs=1e-12)


def test_update_scores_antipodal_negligible():
    tokens = np.array([[1.0, 0.0], [-1.0, 0.0]])
    out = update_scores(np.array([1.0, 0.8]), 0, tokens, gamma=20.0)
    assert abs(out[1] - 0.8) < 1e-30  # exp(-80) * 1.0


def test_update_scores_large_gamma_noop():
    rng = np.random.Generator(np.random.PCG64(1))
    tokens = rng.normal(size=(6, 4))
    scores = rng.normal(size=6)
    out = update_scores(scores, 2, tokens, gamma=1e12)
    mask = np.arange(6) != 2
    assert np.abs(out[mask] - scores[mask]).max() <= 1e-6


def test_update_scores_skips_sentinels():
    tokens = np.tile(np.array([[1.0, 0.0]]), (3, 1))
    s = np.array([-np.inf, 1.0, 0.5])
    out = update_scores(s, 1, tokens, gamma=20.0)
    assert out[0] == -np.inf and out[1] == -np.inf
    assert out[2] == pytest.approx(-0.5, abs=1e-12)


def test_update_scores_clamp_negative_source():
    tokens = np.tile(np.array([[1.0, 0.0]]), (2, 1))
    raw = update_scores(np.array([-0.5, 0.3]), 0, tokens, gamma=20.0)
    assert raw[1] == pytest.approx(0.8)  # verbatim: subtracting negative raises
    clamped = update_scores(np.array([-0.5, 0.3]), 0, tokens, gamma=20.0,
                            clamp_negative_source=True)
    assert clamped[1] == pytest.approx(0.3)


def test_update_scores_index_out_of_range():
    with pytest.raises(ValidationError):
        update_scores(np.ones(2), 5, np.ones((2, 2)), gamma=1.0)


def test_id_select_budget_equals_n():
    r = id_select(ANGLE_TOKENS, ANGLE_SCORES, SelectionConfig(budget=4))
    assert sorted(r.picked) == [0, 1, 2, 3]
    assert r.retained == [0, 1, 2, 3]


def test_id_select_budget_one_is_argmax():
    r = id_select(ANGLE_TOKENS, np.array([0.3, 0.9, 0.9, 0.1]),
                  SelectionConfig(budget=1))
    assert r.picked == [1]  # lowest-index tie break


def test_id_select_angle_case():
    r = id_select(ANGLE_TOKENS, ANGLE_SCORES, SelectionConfig(budget=2, gamma=20.0))
    assert r.picked == [0, 2]


def test_id_select_trace_records():
    r = id_select(ANGLE_TOKENS, ANGLE_SCORES,
                  SelectionConfig(budget=2, gamma=20.0, trace=True))
    assert len(r.trace) == 2
    assert r.trace[0].picked == 0
    assert r.trace[0].score == pytest.approx(1.0)
    assert r.trace[0].suppressed_below_zero == 1  # token 1 driven to ~-0.0997
    assert not r.trace[0].negative_source


def test_id_select_input_validation():
    with pytest.raises(ValidationError):
        id_select(np.zeros((0, 2)), np.zeros(0), SelectionConfig(budget=1))
    with pytest.raises(ValidationError):
        id_select(np.array([[1.0, 0.0], [0.0, 0.0]]), np.ones(2),
                  SelectionConfig(budget=1))
    with pytest.raises(ValidationError):
        id_select(np.eye(2), np.array([1.0, np.nan]), SelectionConfig(budget=1))
    with pytest.raises(ValidationError):
        id_select(np.eye(2), np.ones(2), SelectionConfig(budget=0))
    with pytest.raises(ValidationError):
        id_select(np.eye(2), np.ones(2), SelectionConfig(budget=1, gamma=0.0))


def test_id_select_budget_clamped_to_n():
    r = id_select(ANGLE_TOKENS, ANGLE_SCORES, SelectionConfig(budget=99))
    assert len(r.picked) == 4


def _random_instance(seed, max_n=32, max_d=8):
    rng = np.random.Generator(np.random.PCG64(seed))
    n = int(rng.integers(1, max_n + 1))
    d = int(rng.integers(1, max_d + 1))
    t = int(rng.integers(1, n + 1))
    tokens = rng.normal(size=(n, d)).astype(np.float32)
    tokens[np.linalg.norm(tokens, axis=1) <= 1e-12] = 1.0
    scores = rng.normal(size=n)
    return tokens, scores, t


@settings(max_examples=80, deadline=None)
@given(seed=st.integers(0, 2**31), gamma=st.sampled_from([1.0, 20.0, 100.0]))
def test_matches_scalar_reference(seed, gamma):
    tokens, scores, t = _random_instance(seed)
    got = id_select(tokens, scores, SelectionConfig(budget=t, gamma=gamma)).picked
    assert got == id_select_reference(tokens.tolist(), scores.tolist(), t, gamma)


@settings(max_examples=80, deadline=None)
@given(seed=st.integers(0, 2**31))
def test_first_pick_and_budget_invariants(seed):
    tokens, scores, t = _random_instance(seed)
    r = id_select(tokens, scores, SelectionConfig(budget=t))
    assert r.picked[0] == int(np.argmax(scores))
    assert len(r.picked) == min(t, tokens.shape[0])
    assert len(set(r.picked)) == len(r.picked)
    assert r.retained == sorted(r.picked)


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**31))
def test_permutation_equivariance(seed):
    tokens, scores, t = _random_instance(seed)
    # distinct scores avoid tie ambiguity under permutation
    scores = scores + np.arange(len(scores)) * 1e-6
    rng = np.random.Generator(np.random.PCG64(seed + 1))
    perm = rng.permutation(tokens.shape[0])
    base = id_select(tokens, scores, SelectionConfig(budget=t)).picked
    permuted = id_select(tokens[perm], scores[perm], SelectionConfig(budget=t)).picked
    inv = np.empty_like(perm)
    inv[perm] = np.arange(len(perm))
    assert [int(inv[i]) for i in base] == permuted


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**31), c=st.floats(1e-3, 1e3))
def test_positive_scale_invariance(seed, c):
    tokens, scores, t = _random_instance(seed)
    base = id_select(tokens, scores, SelectionConfig(budget=t)).picked
    scaled = id_select(tokens, c * scores, SelectionConfig(budget=t)).picked
    assert base == scaled


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**31))
def test_duplicate_deprioritization(seed):
    rng = np.random.Generator(np.random.PCG64(seed))
    n, d = 8, 4
    tokens = rng.normal(size=(n, d)).astype(np.float32)
    tokens[3] = tokens[0]  # bitwise duplicate
    scores = np.abs(rng.normal(size=n)) + 0.1
    scores[0] = scores.max() + 1.0
    scores[3] = min(scores[3], scores[0])
    out = update_scores(scores, 0, tokens, gamma=20.0)
    assert out[3] <= 0


def test_gamma_limit_matches_topk():
    rng = np.random.Generator(np.random.PCG64(42))
    tokens = rng.normal(size=(20, 16)).astype(np.float32)
    scores = rng.normal(size=20)
    got = id_select(tokens, scores, SelectionConfig(budget=8, gamma=1e6)).picked
    assert got == topk_select(scores, 8).picked


def test_select_dispatch_topk_exhaustive():
    case = synth_case(SynthSpec(n_tokens=10, dim=4, n_clusters=2, seed=1))
    r = select(case, ImportanceSource.CLS, SelectionConfig(budget=10), Method.TOPK)
    assert r.retained == list(range(10))


def test_select_dispatch_id_separates_clusters():
    case = synth_case(SynthSpec(n_tokens=12, dim=16, n_clusters=3,
                                cluster_spread=0.0, seed=9))
    r = select(case, ImportanceSource.CLS, SelectionConfig(budget=3), Method.ID)
    labels = cluster_labels(12, 3)
    assert sorted(labels[i] for i in r.picked) == [0, 1, 2]


def test_select_dispatch_random_deterministic():
    case = synth_case(SynthSpec(n_tokens=30, dim=4, n_clusters=3, seed=2))
    cfg = SelectionConfig(budget=5)
    a = select(case, ImportanceSource.CLS, cfg, Method.RANDOM, seed=11)
    b = select(case, ImportanceSource.CLS, cfg, Method.RANDOM, seed=11)
    assert a.picked == b.picked
