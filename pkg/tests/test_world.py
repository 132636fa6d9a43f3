import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hareplan.kinematics import forward_points, load_model
from hareplan.world import (HumanScript, HumanState, Scene, Track, check_config,
                            check_connection, mannequin_pose, min_separation, sample_human,
                            scene_from_dict, script_from_dict)

from conftest import random_q
from oracles import pairwise_min


def one_point_script(rows, noise=0.0, **kw):
    return script_from_dict({"keypoints": {"p": rows}, "noise_amplitude": noise, **kw})


def test_static_keypoint():
    s = one_point_script([[0.0, 1, 0, 1]])
    for t in (0.0, 3.7, 100.0):
        h = sample_human(s, t)
        np.testing.assert_array_equal(h.positions, [[1, 0, 1]])
        np.testing.assert_array_equal(h.velocities, [[0, 0, 0]])


def test_linear_track():
    s = one_point_script([[0, 0, 0, 1], [2, 2, 0, 1]])
    h = sample_human(s, 1.0)
    np.testing.assert_allclose(h.positions, [[1, 0, 1]])
    np.testing.assert_allclose(h.velocities, [[1, 0, 0]])


def test_noise_is_bounded_and_unbiased():
    a = 0.03
    s = one_point_script([[0, 1, 0, 1]], noise=a, seed=4)
    P = np.array([sample_human(s, 1e-3 * k).positions[0] for k in range(10_000)])
    dev = P - [1, 0, 1]
    assert np.all(np.abs(dev) <= a)
    assert np.all(np.abs(dev.mean(axis=0)) < 0.003)


def test_noise_is_reproducible():
    s = one_point_script([[0, 1, 0, 1]], noise=0.03, seed=9)
    a = sample_human(s, 0.25).positions
    b = sample_human(s, 0.25).positions
    c = sample_human(s.with_seed(10), 0.25).positions
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, c)


def test_presence_window_and_shift():
    s = one_point_script([[0, 1, 0, 1]], presence=[1.0, 2.0])
    assert sample_human(s, 0.5).m == 0
    assert sample_human(s, 1.5).m == 1
    late = s.shifted(1.0)
    assert sample_human(late, 1.5).m == 0
    assert sample_human(late, 2.5).m == 1


def test_track_validation():
    with pytest.raises(ValueError):
        Track("x", [0, 1], [[0, 0, 0]])
    with pytest.raises(ValueError):
        Track("x", [1, 0], [[0, 0, 0], [1, 1, 1]])
    with pytest.raises(ValueError):
        sample_human(HumanScript(()), -1.0)
    with pytest.raises(ValueError):
        HumanState.static([[np.nan, 0, 0]])


def test_min_separation_cases(planar):
    scene = Scene()
    assert min_separation(planar, [0, 0], HumanState.empty(), scene) == math.inf
    h = HumanState.static([[2, 0, 1]])
    assert min_separation(planar, [0, 0], h, scene) == pytest.approx(1.0)
    assert min_separation(planar, [0, 0], h, Scene(human_clearance=0.25)) == pytest.approx(0.75)


def test_min_separation_brute_force(ur, rng):
    for _ in range(30):
        q = random_q(ur, rng)
        h = HumanState.static(rng.uniform(-1.5, 1.5, size=(7, 3)))
        expected = pairwise_min(forward_points(ur, q).tolist(), h.positions.tolist())
        assert min_separation(ur, q, h, Scene()) == pytest.approx(expected, abs=1e-12)


def test_check_config(planar):
    assert not check_config(planar, [4.0, 0.0], None, Scene())
    assert check_config(planar, [0.3, 0.2], None, Scene())
    # tip at (2, 0, 0) sits inside the sphere
    blocked = Scene(spheres=(((2.0, 0.0, 0.0), 0.2),))
    assert not check_config(planar, [0.0, 0.0], None, blocked)
    # human keypoint within the clearance radius
    assert not check_config(planar, [0, 0], HumanState.static([[2.05, 0, 0]]),
                            Scene(human_clearance=0.1))


def test_connection_grazing_midpoint(planar):
    # sweeping joint 1 from -0.5 to 0.5 passes the tip through (2, 0, 0)
    scene = Scene(spheres=(((2.0, 0.0, 0.0), 0.1),))
    a, b = np.array([-0.5, 0.0]), np.array([0.5, 0.0])
    assert check_config(planar, a, None, scene) and check_config(planar, b, None, scene)
    assert not check_connection(planar, a, b, None, scene)
    # the same sweep with a bent elbow stays clear
    assert check_connection(planar, a + [0, 1.5], b + [0, 1.5], None, scene)


def test_connection_degenerate_and_free(planar):
    scene = Scene(spheres=(((2.0, 0.0, 0.0), 0.2),))
    q = np.array([0.0, 0.0])
    assert check_connection(planar, q, q, None, scene) == check_config(planar, q, None, scene)
    assert check_connection(planar, [1.0, 0.0], [2.0, 0.5], None, scene)
    with pytest.raises(ValueError):
        check_connection(planar, q, q, None, scene, step=0.0)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-3.0, 3.0), min_size=4, max_size=4))
def test_connection_is_symmetric(v):
    m = load_model("planar2")
    scene = Scene(spheres=(((1.2, 0.8, 0.0), 0.3), ((-1.0, -1.0, 0.0), 0.4)))
    a, b = np.array(v[:2]), np.array(v[2:])
    assert check_connection(m, a, b, None, scene) == check_connection(m, b, a, None, scene)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-3.0, 3.0), min_size=4, max_size=4))
def test_free_connection_implies_free_endpoints(v):
    m = load_model("planar2")
    scene = Scene(spheres=(((1.2, 0.8, 0.0), 0.3),))
    a, b = np.array(v[:2]), np.array(v[2:])
    if check_connection(m, a, b, None, scene):
        assert check_config(m, a, None, scene) and check_config(m, b, None, scene)


def test_scene_from_dict():
    s = scene_from_dict({"obstacles": [{"type": "sphere", "center": [0, 0, 1], "radius": 0.2},
                                       {"type": "box", "min": [0, 0, 0], "max": [1, 1, 1]},
                                       {"type": "capsule", "a": [0, 0, 0], "b": [0, 0, 1],
                                        "radius": 0.1}],
                        "human_clearance": 0.1})
    assert len(s.spheres) == len(s.boxes) == len(s.capsules) == 1
    with pytest.raises(ValueError):
        scene_from_dict({"obstacles": [{"type": "cone"}]})
    with pytest.raises(ValueError):
        Scene(boxes=(((0, 0, 0), (0, 1, 1)),))


def test_mannequin_reach_moves_hands_toward_robot():
    far = mannequin_pose(-1.85, 0.0, 0.0)
    near = mannequin_pose(-1.85, 0.0, 1.0)
    for hand in ("left_hand", "right_hand"):
        assert np.linalg.norm(near[hand][:2]) < np.linalg.norm(far[hand][:2])
    np.testing.assert_allclose(near["head"], far["head"])


def test_empty_mannequin_schedule_means_no_human():
    s = script_from_dict({"mannequin": [], "presence": [0, 0]})
    assert sample_human(s, 0.0).m == 0
