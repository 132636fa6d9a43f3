import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hareplan.kinematics import forward_points, load_model
from hareplan.safety import (LAMBDA_MAX, PFLParams, SSMParams, execution_scale, lambda_at,
                             pair_velocity, pfl_vmax, ssm_vmax)
from hareplan.world import HumanState

from conftest import random_q
from oracles import scalar_lambda

# high-precision evaluations of the closed-form limits (mpmath, 40 digits)
SSM_DEFAULT_AT_1M = 0.5648080636142566590
PFL_ISO_EXAMPLE = 0.3024345659257001441


def test_ssm_zero_at_protective_boundary():
    assert ssm_vmax(SSMParams(C=0.25, T_r=0.15, v_h=0.0, a_s=2.5), 0.25) == pytest.approx(0, abs=1e-15)
    assert ssm_vmax(SSMParams(), 0.25) == 0.0


def test_ssm_regression_constant():
    assert ssm_vmax(SSMParams(), 1.0) == pytest.approx(SSM_DEFAULT_AT_1M, rel=1e-14)


def test_ssm_clamps_and_infinite_separation():
    assert ssm_vmax(SSMParams(), 0.0) == 0.0
    assert ssm_vmax(SSMParams(), -1.0) == 0.0
    assert ssm_vmax(SSMParams(), math.inf) == math.inf


def test_ssm_parameter_validation():
    with pytest.raises(ValueError):
        SSMParams(a_s=0.0)
    with pytest.raises(ValueError):
        SSMParams(C=-0.1)
    with pytest.raises(ValueError):
        PFLParams(1, 0, 1, 1)


def test_pfl_limits():
    assert pfl_vmax(PFLParams(F_max=math.sqrt(7.0), k=7.0, m_r=2.0, m_h=2.0)) == pytest.approx(1.0)
    big = pfl_vmax(PFLParams(F_max=10.0, k=4.0, m_r=5.0, m_h=1e15))
    assert big == pytest.approx(10.0 / math.sqrt(4.0 * 5.0), rel=1e-12)
    iso = pfl_vmax(PFLParams(F_max=140.0, k=75000.0, m_r=10.0, m_h=4.0))
    assert iso == pytest.approx(PFL_ISO_EXAMPLE, rel=1e-14)


@settings(max_examples=200, deadline=None)
@given(st.floats(0, 3), st.floats(0, 3))
def test_ssm_monotone_in_separation(s1, s2):
    p = SSMParams()
    lo, hi = sorted((s1, s2))
    assert 0.0 <= ssm_vmax(p, lo) <= ssm_vmax(p, hi)


def test_pair_velocity_signs(planar):
    # tip at (2, 0, 0) moves along +y at 2 * qdot_1
    key = ([2.0, 1.0, 0.0], [0.0, 0.0, 0.0])
    assert pair_velocity(planar, [0, 0], [0.25, 0.0], 1, key) == pytest.approx(0.5)
    receding = ([2.0, 1.0, 0.0], [0.0, 1.0, 0.0])
    assert pair_velocity(planar, [0, 0], [0.0, 0.0], 1, receding) == pytest.approx(-1.0)
    with pytest.raises(ValueError):
        pair_velocity(planar, [0, 0], [0, 0], 1, ([2.0, 0, 0], [0, 0, 0]))


def test_pair_velocity_is_distance_rate(ur, rng):
    for _ in range(50):
        q = random_q(ur, rng)
        qdot = rng.normal(size=ur.n)
        h, hdot = rng.uniform(-1, 1, 3), rng.normal(size=3)
        k = int(rng.integers(1, ur.p))
        eps = 1e-6

        def dist(s):
            return np.linalg.norm(h + s * hdot - forward_points(ur, q + s * qdot)[k])

        closing = -(dist(eps) - dist(-eps)) / (2 * eps)
        assert pair_velocity(ur, q, qdot, k, (h, hdot)) == pytest.approx(closing, abs=1e-4)


def test_lambda_trivial_cases(planar):
    assert lambda_at(planar, [0, 0], [1, 0], HumanState.empty(), SSMParams()) == 1.0
    far = HumanState.static([[0.0, -3.0, 0.0]])
    # both points move along +y, away from a keypoint far below
    assert lambda_at(planar, [0, 0], [0.5, 0], far, SSMParams()) == 1.0


def test_lambda_single_pair_hand_value(planar):
    # v_max = sqrt(2 S) with these parameters; S = 0.08 gives 0.4
    mode = SSMParams(C=0.0, T_r=0.0, v_h=0.0, a_s=1.0)
    h = HumanState.static([[2.0, 0.08, 0.0]])
    assert lambda_at(planar, [0, 0], [0.4, 0], h, mode) == pytest.approx(2.0)


def test_lambda_matches_scalar_oracle(ur, rng):
    p = SSMParams()
    for _ in range(40):
        q = random_q(ur, rng)
        qdot = rng.uniform(-1, 1, ur.n) * ur.qdot_max
        hpos = rng.uniform(-1.2, 1.2, size=(4, 3))
        hvel = rng.normal(scale=0.3, size=(4, 3))
        got = lambda_at(ur, q, qdot, HumanState(0.0, hpos, hvel), p, clearance=0.1)
        want = scalar_lambda(ur, q, qdot, hpos, hvel, p.C, p.T_r, p.v_h, p.a_s, 0.1, LAMBDA_MAX)
        assert got == pytest.approx(want, rel=1e-6)


def test_execution_scale(planar):
    mode = SSMParams(C=0.0, T_r=0.0, v_h=0.0, a_s=1.0)
    h = HumanState.static([[2.0, 0.08, 0.0]])
    # closing 1.6 against v_max 0.4
    assert execution_scale(planar, [0, 0], [0.8, 0], h, mode) == pytest.approx(0.25)
    assert execution_scale(planar, [0, 0], [0.1, 0], h, mode) == 1.0
    # inside the protective distance with a closing pair: halt
    halt = SSMParams(C=0.2, T_r=0.0, v_h=0.0, a_s=1.0)
    assert execution_scale(planar, [0, 0], [0.1, 0], h, halt) == 0.0
    # moving away is still allowed
    assert execution_scale(planar, [0, 0], [-0.1, 0], h, halt) == 1.0
    assert execution_scale(planar, [0, 0], [0.1, 0], HumanState.empty(), halt) == 1.0


def test_execution_scale_ignores_human_velocity(planar):
    mode = SSMParams()
    a = HumanState(0.0, [[2.0, 0.8, 0.0]], [[0.0, 0.0, 0.0]])
    b = HumanState(0.0, [[2.0, 0.8, 0.0]], [[0.0, -1.0, 0.0]])
    assert execution_scale(planar, [0, 0], [0.3, 0], a, mode) == \
        execution_scale(planar, [0, 0], [0.3, 0], b, mode)


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(1.0, 5.0))
def test_lambda_bounds_and_monotone_in_speed(seed, factor):
    m = load_model("ur10e_like")
    r = np.random.default_rng(seed)
    q = r.uniform(m.q_min, m.q_max)
    qdot = r.uniform(-1, 1, m.n) * m.qdot_max
    # static keypoints: every closing speed scales with the robot speed
    h = HumanState.static(r.uniform(-1.2, 1.2, (3, 3)))
    lam = lambda_at(m, q, qdot, h, SSMParams(), clearance=0.1)
    lam_fast = lambda_at(m, q, factor * qdot, h, SSMParams(), clearance=0.1)
    assert 1.0 <= lam <= LAMBDA_MAX
    assert lam_fast >= lam - 1e-12
    s = execution_scale(m, q, qdot, h, SSMParams(), clearance=0.1)
    assert 0.0 <= s <= 1.0
