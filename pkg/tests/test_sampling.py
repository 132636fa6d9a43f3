import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from hareplan.sampling import (EllipsoidSampler, InformedSet, InformedSetEmpty,
                               SamplingExhausted, from_scaled, heuristic, heuristic_many,
                               sample_informed, to_scaled)

from oracles import admissibility_violations, pruning_violations


def make_set(c_best, qmax=(1.0, 1.0), lo=None, hi=None, start=(0.0, 0.0), goal=(1.0, 0.0)):
    return InformedSet(np.array(start), np.array(goal), c_best, np.array(qmax),
                       None if lo is None else np.array(lo), None if hi is None else np.array(hi))


def test_heuristic_endpoints_and_segment():
    s = make_set(5.0, qmax=(1.0, 2.0), goal=(3.0, 4.0))
    c_min = math.hypot(3.0, 2.0)
    assert heuristic(s.q_start, s) == pytest.approx(c_min)
    assert heuristic([1.5, 2.0], s) == pytest.approx(c_min)
    assert s.c_min == pytest.approx(c_min)


def test_scaling_helpers():
    np.testing.assert_array_equal(to_scaled([3.0, -1.0], [1.0, 1.0]), [3.0, -1.0])
    np.testing.assert_array_equal(to_scaled([2.0, 4.0], [2.0, 4.0]), [1.0, 1.0])


@settings(max_examples=100)
@given(st.lists(st.floats(-10, 10), min_size=3, max_size=3),
       st.lists(st.floats(0.1, 5), min_size=3, max_size=3))
def test_scaling_round_trip(q, w):
    np.testing.assert_allclose(from_scaled(to_scaled(q, w), w), q, rtol=1e-12, atol=1e-12)


def test_admissibility_random_paths(rng):
    assert admissibility_violations(rng, 1000) == 0


def test_samples_inside_informed_set(rng):
    s = InformedSet(np.zeros(6), np.full(6, 1.0), 4.0, np.linspace(0.4, 1.2, 6))
    Q = sample_informed(s, rng, 100_000)
    assert Q.shape == (100_000, 6)
    assert np.all(heuristic_many(Q, s) < s.c_best)


def test_unbounded_set_is_uniform_over_box():
    # p-values over 200 seeds were checked to be uniform; any single seed
    # fails a 1% test with probability ~3% over the three axes
    rng = np.random.default_rng(2024)
    lo, hi = np.array([-2.0, 0.0, -1.0]), np.array([2.0, 1.0, 3.0])
    s = InformedSet(np.zeros(3), np.ones(3) * 0.5, math.inf, np.ones(3), lo, hi)
    Q = sample_informed(s, rng, 20_000)
    for k in range(3):
        counts, _ = np.histogram(Q[:, k], bins=20, range=(lo[k], hi[k]))
        assert stats.chisquare(counts).pvalue > 0.01


def test_ellipse_axes_match_analytic(rng):
    c_best = 1.05
    s = make_set(c_best)
    Q = sample_informed(s, rng, 100_000)
    # a uniform ellipse has variance r^2 / 4 along each principal axis
    a = math.sqrt(4 * Q[:, 0].var())
    b = math.sqrt(4 * Q[:, 1].var())
    assert a == pytest.approx(c_best / 2, rel=0.02)
    assert b == pytest.approx(math.sqrt(c_best ** 2 - 1.0) / 2, rel=0.02)
    np.testing.assert_allclose(Q.mean(axis=0), [0.5, 0.0], atol=0.01)


def test_empty_and_degenerate_sets(rng):
    with pytest.raises(InformedSetEmpty):
        EllipsoidSampler(make_set(0.9))
    s = make_set(1.0)
    Q = sample_informed(s, rng, 500)
    np.testing.assert_allclose(Q[:, 1], 0.0, atol=1e-12)
    assert np.all((Q[:, 0] >= 0) & (Q[:, 0] <= 1))


def test_rejection_exhaustion(rng):
    # the ellipse lies almost entirely outside the limits
    s = make_set(1.2, lo=(5.0, 5.0), hi=(6.0, 6.0))
    with pytest.raises(SamplingExhausted):
        EllipsoidSampler(s, max_tries=5).sample(rng, 10)


def test_joint_limits_respected(rng):
    s = make_set(3.0, lo=(-0.2, -0.1), hi=(1.2, 0.1))
    Q = sample_informed(s, rng, 2000)
    assert np.all(Q >= [-0.2, -0.1]) and np.all(Q <= [1.2, 0.1])


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(1.0001, 3.0))
def test_samples_always_members(seed, ratio):
    r = np.random.default_rng(seed)
    n = int(r.integers(2, 7))
    qs, qg = r.uniform(-2, 2, n), r.uniform(-2, 2, n)
    w = r.uniform(0.3, 2.0, n)
    c_min = np.linalg.norm((qg - qs) / w)
    s = InformedSet(qs, qg, c_min * ratio, w)
    Q = sample_informed(s, r, 200)
    assert np.all(heuristic_many(Q, s) < s.c_best)


def test_pruning_soundness_grid():
    assert pruning_violations() == 0
