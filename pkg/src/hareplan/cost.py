"""Connection and path cost models.

* ``PathLength``      plain joint-space length.
* ``WeightedLength``  length after dividing each joint by its speed limit.
* ``HampTime``        L-inf nominal time times the mean dilation factor.
* ``MarshaTime``      weighted L2 length times the mean dilation factor.

The two dilation-bearing models average ``lambda_at`` over ``z`` equally
spaced configurations of the connection (endpoints included), evaluated at
the speed-saturated joint velocity along the connection direction.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .safety import LAMBDA_MAX, SafetyMode, SSMParams, mode_arrays

LAMBDA_SPACING = 0.1  # rad between dilation samples
LAMBDA_MIN_Z = 5


@dataclass(frozen=True)
class PathLength:
    name = "length"


@dataclass(frozen=True)
class WeightedLength:
    name = "weighted"


@dataclass(frozen=True)
class _DilationCost:
    mode: SafetyMode = SSMParams()
    z: int | None = None  # None: spacing-based count
    lambda_max: float = LAMBDA_MAX
    clearance: float = 0.0

    def __post_init__(self):
        if self.z is not None and self.z < 2:
            raise ValueError("z must be at least 2")

    def samples(self, length: float) -> int:
        if self.z is not None:
            return self.z
        return max(LAMBDA_MIN_Z, int(math.ceil(length / LAMBDA_SPACING)) + 1)


@dataclass(frozen=True)
class HampTime(_DilationCost):
    name = "hamp"


@dataclass(frozen=True)
class MarshaTime(_DilationCost):
    name = "marsha"


CostModel = PathLength | WeightedLength | HampTime | MarshaTime


def directional_qdot(q_a, q_b, qdot_max) -> np.ndarray:
    """Joint velocity along the connection with the tightest joint at its limit."""
    d = np.asarray(q_b, dtype=np.float64) - np.asarray(q_a, dtype=np.float64)
    norm = float(np.linalg.norm(d))
    if norm == 0.0:
        raise ValueError("zero-length connection has no direction")
    u = d / norm
    qdot_max = np.asarray(qdot_max, dtype=np.float64)
    nz = u != 0.0
    speed = float(np.min(np.abs(qdot_max[nz] / u[nz])))
    return speed * u


def mean_lambda(model, q_a, q_b, human, cm: _DilationCost) -> float:
    if human is None or human.m == 0:
        return 1.0
    q_a = np.asarray(q_a, dtype=np.float64)
    q_b = np.asarray(q_b, dtype=np.float64)
    length = float(np.linalg.norm(q_b - q_a))
    qdot = directional_qdot(q_a, q_b, model.qdot_max)
    kind, prm = mode_arrays(cm.mode)
    return model.chain.segment_lambda_mean(q_a, q_b, qdot, cm.samples(length), human.positions,
                                           human.velocities, cm.clearance, kind, prm,
                                           cm.lambda_max)


def connection_cost(model, q_a, q_b, human, cm) -> float:
    q_a = model.check_q(q_a)
    q_b = model.check_q(q_b)
    d = q_b - q_a
    if not np.any(d):
        return 0.0
    if isinstance(cm, PathLength):
        return float(np.linalg.norm(d))
    scaled = d / model.qdot_max
    if isinstance(cm, WeightedLength):
        return float(np.linalg.norm(scaled))
    if isinstance(cm, HampTime):
        return float(np.max(np.abs(scaled))) * mean_lambda(model, q_a, q_b, human, cm)
    if isinstance(cm, MarshaTime):
        return float(np.linalg.norm(scaled)) * mean_lambda(model, q_a, q_b, human, cm)
    raise TypeError(f"unsupported cost model {cm!r}")


def path_cost(model, waypoints, human, cm) -> float:
    waypoints = np.asarray(waypoints, dtype=np.float64)
    if waypoints.ndim != 2 or len(waypoints) < 2:
        raise ValueError("a path needs at least two waypoints")
    return float(sum(connection_cost(model, a, b, human, cm)
                     for a, b in zip(waypoints[:-1], waypoints[1:])))


def lower_bound_scale(model, cm) -> tuple[np.ndarray, float]:
    """Per-joint weights and a factor turning ``cm`` into a weighted-L2 bound.

    For every connection ``cost >= ||dq / w||_2 / factor``; the informed set
    for ``cm`` is then the weighted ellipsoid with ``c_best * factor``.
    """
    if isinstance(cm, PathLength):
        return np.ones(model.n), 1.0
    if isinstance(cm, HampTime):
        # ||x||_inf >= ||x||_2 / sqrt(n)
        return model.qdot_max, math.sqrt(model.n)
    return model.qdot_max, 1.0


def cost_from_dict(data: dict, clearance: float = 0.0):
    """Build a cost model from ``{"name": ..., "z": ..., "lambda_max": ...}``."""
    from .safety import PFLParams

    name = data["name"] if isinstance(data, dict) else str(data)
    data = data if isinstance(data, dict) else {}
    if name in ("length", "path_length"):
        return PathLength()
    if name in ("weighted", "weighted_length"):
        return WeightedLength()
    mode = data.get("mode")
    if mode is None:
        mode = SSMParams()
    elif isinstance(mode, dict):
        mode = PFLParams(**mode["pfl"]) if "pfl" in mode else SSMParams(**mode.get("ssm", mode))
    kwargs = dict(mode=mode, z=data.get("z"), lambda_max=float(data.get("lambda_max", LAMBDA_MAX)),
                  clearance=float(data.get("clearance", clearance)))
    if name in ("hamp", "hamp_time"):
        return HampTime(**kwargs)
    if name in ("marsha", "marsha_time"):
        return MarshaTime(**kwargs)
    raise ValueError(f"unknown cost model {name!r}")
