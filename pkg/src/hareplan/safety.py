"""ISO/TS 15066 speed limits and the configuration time-dilation factor."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _backend

LAMBDA_MAX = 1e3


@dataclass(frozen=True)
class SSMParams:
    """Speed and separation monitoring parameters.

    C: perception uncertainty (m), T_r: reaction time (s), v_h: assumed human
    speed toward the robot (m/s), a_s: robot braking deceleration (m/s^2).
    """

    C: float = 0.25
    T_r: float = 0.15
    v_h: float = 1.6
    a_s: float = 2.5

    def __post_init__(self):
        if self.C < 0 or self.T_r < 0 or self.v_h < 0:
            raise ValueError("C, T_r and v_h must be non-negative")
        if self.a_s <= 0:
            raise ValueError("a_s must be positive")


@dataclass(frozen=True)
class PFLParams:
    F_max: float
    k: float
    m_r: float
    m_h: float

    def __post_init__(self):
        if min(self.F_max, self.k, self.m_r, self.m_h) <= 0:
            raise ValueError("PFL parameters must be strictly positive")


SafetyMode = SSMParams | PFLParams


def ssm_vmax(p: SSMParams, S: float) -> float:
    """Largest robot speed toward the human at separation ``S``.

    The radicand is clamped at zero and so is the result: inside the
    protective distance the robot must be at rest.
    """
    return _backend.ssm_vmax(p.C, p.T_r, p.v_h, p.a_s, float(S))


def pfl_vmax(p: PFLParams) -> float:
    return p.F_max / math.sqrt(p.k) * math.sqrt(1.0 / p.m_r + 1.0 / p.m_h)


def mode_arrays(mode: SafetyMode):
    """(kind, params) as consumed by the kernels: 0 = SSM, 1 = PFL."""
    if isinstance(mode, SSMParams):
        return 0, np.array([mode.C, mode.T_r, mode.v_h, mode.a_s])
    if isinstance(mode, PFLParams):
        return 1, np.array([pfl_vmax(mode), 0.0, 0.0, 0.0])
    raise TypeError(f"unsupported safety mode {mode!r}")


def pair_velocity(model, q, qdot, poi_index: int, keypoint) -> float:
    """Closing speed of robot point ``poi_index`` toward one keypoint.

    ``keypoint`` is ``(position, velocity)``. Positive when the pair distance
    is shrinking.
    """
    q = model.check_q(q)
    qdot = model.check_q(qdot)
    if not 0 <= poi_index < model.p:
        raise IndexError(f"poi index {poi_index} out of range")
    h, hdot = (np.asarray(v, dtype=np.float64) for v in keypoint)
    pos, vel = model.chain.point_velocities(q, qdot)
    diff = h - pos[poi_index]
    d = float(np.linalg.norm(diff))
    if d == 0.0:
        raise ValueError("robot point and keypoint coincide; direction undefined")
    return float((vel[poi_index] - hdot) @ diff / d)


def lambda_at(model, q, qdot, human, mode: SafetyMode, lambda_max: float = LAMBDA_MAX,
              clearance: float = 0.0) -> float:
    """Time-dilation factor at one configuration, in [1, lambda_max].

    Pairs use ``separation = distance - clearance`` for the SSM limit.
    """
    q = model.check_q(q)
    qdot = model.check_q(qdot)
    if human.m == 0:
        return 1.0
    kind, prm = mode_arrays(mode)
    return model.chain.lam(q, qdot, human.positions, human.velocities, clearance, kind, prm,
                           lambda_max, True)


def execution_scale(model, q, qdot_commanded, human, mode: SafetyMode,
                    clearance: float = 0.0) -> float:
    """Runtime speed-scaling factor in [0, 1] applied by the safety module.

    Uses the robot's own closing speed (J q_dot projected on the pair
    direction); the human's approach is already budgeted by ``v_h``. Zero
    when any pair that is closing has a zero speed limit.
    """
    q = model.check_q(q)
    qdot = model.check_q(qdot_commanded)
    if human.m == 0:
        return 1.0
    kind, prm = mode_arrays(mode)
    lam = model.chain.lam(q, qdot, human.positions, human.velocities, clearance, kind, prm,
                          math.inf, False)
    if lam == math.inf:
        return 0.0
    return 1.0 / lam
