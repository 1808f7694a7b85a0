import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from diffpolytope.errors import InvalidInput, Undefined
from diffpolytope.graphs import diffusion_operator, random_geometric
from diffpolytope.metrics import (diff_simple, diff_sparse, edge_score, edge_score_at, mepre, repre,
                                  repre_search)


def brute_force_best_f(t, t_hat):
    iu = np.triu_indices(t.shape[0])
    truth = t[iu] > 0
    scores = t_hat[iu]
    best = 0.0
    for thr in [-np.inf, *np.unique(scores), np.inf]:
        ret = scores > thr
        tp = np.sum(ret & truth)
        p = tp / ret.sum() if ret.sum() else 0.0
        r = tp / truth.sum() if truth.sum() else 0.0
        best = max(best, 2 * p * r / (p + r) if p + r else 0.0)
    return best


@pytest.fixture
def op():
    return diffusion_operator(random_geometric(10, 0.6, np.random.default_rng(1)))


def test_mepre_examples(op):
    assert mepre(op.t, op.t) == 0.0
    assert mepre(op.t, 2 * op.t) == pytest.approx(0.0, abs=1e-16)
    with pytest.raises(Undefined):
        mepre(op.t, np.zeros((10, 10)))
    with pytest.raises(InvalidInput):
        mepre(op.t, np.eye(3))


@given(st.integers(0, 2**32 - 1), st.floats(1e-3, 1e3), st.floats(1e-3, 1e3))
def test_mepre_symmetric_and_scale_invariant(seed, sa, sb):
    rng = np.random.default_rng(seed)
    a, b = rng.normal(size=(6, 6)), rng.normal(size=(6, 6))
    assert mepre(a, b) == pytest.approx(mepre(b, a), abs=1e-15)
    assert mepre(sa * a, sb * b) == pytest.approx(mepre(a, b), abs=1e-12)
    assert 0 <= mepre(a, b) <= 2 / 6 + 1e-12


def test_repre_examples():
    lam = np.array([1.0, 0.3, -0.2])
    assert repre(lam, lam) == pytest.approx(0.0, abs=1e-12)
    res = repre_search(np.array([1.0, 0.5]), np.array([1.0, 0.25]))
    assert res.value == pytest.approx(0.0, abs=1e-12)
    assert res.integer_power == 2
    with pytest.raises(Undefined):
        repre(np.zeros(3), lam)


@given(st.lists(st.floats(0.0, 1.0), min_size=1, max_size=9), st.integers(1, 5))
def test_repre_recovers_integer_powers(rest, k):
    lam = np.array([1.0, *rest])
    assert repre(lam, lam**k) == pytest.approx(0.0, abs=1e-9)


def test_repre_real_power_family():
    lam = np.array([1.0, 0.5, -0.4])
    target = np.sign(lam) * np.abs(lam) ** 2.5
    res = repre_search(lam, target)
    assert res.value == pytest.approx(0.0, abs=1e-7)
    assert res.real_power == pytest.approx(2.5, abs=1e-4)
    assert res.integer_value > 1e-3


def test_edge_score_perfect(op):
    binary = (op.t > 0).astype(float)
    score = edge_score(binary, binary)
    assert score.f_measure == 1.0
    assert 0 <= score.threshold < 1
    for thr in (0.1, 0.5, 0.9):
        assert edge_score_at(binary, binary, thr)[2] == 1.0
    noisy = op.t + 1e-3 * np.random.default_rng(0).random((10, 10)) * (op.t == 0)
    assert edge_score(op.t, noisy).f_measure == 1.0


def test_edge_score_nothing_retrieved():
    t = np.eye(3)
    assert edge_score_at(t, -np.ones((3, 3)), 0.0) == (0.0, 0.0, 0.0)


@given(st.integers(0, 2**32 - 1), st.integers(2, 12))
def test_edge_score_is_exhaustive(seed, n):
    rng = np.random.default_rng(seed)
    t = rng.random((n, n)) * (rng.random((n, n)) < 0.4)
    t = t + t.T
    t_hat = np.round(rng.normal(size=(n, n)), 1)  # rounding creates ties
    t_hat = t_hat + t_hat.T
    score = edge_score(t, t_hat)
    assert score.f_measure == pytest.approx(brute_force_best_f(t, t_hat), abs=1e-15)
    p, r, f = edge_score_at(t, t_hat, score.threshold)
    assert (p, r, f) == pytest.approx((score.precision, score.recall, score.f_measure))
    if p + r > 0:
        assert f == pytest.approx(2 * p * r / (p + r))
    fpr = [pt[1] for pt in score.roc]
    tpr = [pt[2] for pt in score.roc]
    assert np.all(np.diff(fpr) >= 0) and np.all(np.diff(tpr) >= 0)
    if 0 < (t[np.triu_indices(n)] > 0).sum() < n * (n + 1) // 2:
        assert score.roc[0][1:] == (0.0, 0.0) and score.roc[-1][1:] == (1.0, 1.0)


def test_diffs(op):
    assert diff_simple(op.t, op.t) == 0.0 and diff_sparse(op.t, op.t) == 0.0
    t_hat = op.t + np.diag(np.full(10, 0.1))
    assert diff_simple(op.t, t_hat) == pytest.approx(np.trace(t_hat) / 10)
    assert diff_sparse(op.t, t_hat) == pytest.approx(1.0 / 100)
    assert math.isclose(diff_simple(op.t, np.zeros((10, 10))), -np.trace(op.t) / 10, abs_tol=1e-15)
