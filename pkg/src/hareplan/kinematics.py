"""Serial-manipulator model: forward kinematics and point Jacobians.

A model is a chain of revolute joints. Joint ``i`` applies a fixed offset
transform followed by a rotation about its local axis; link ``k`` is the
frame after joint ``k`` (link 0 is the base). Points of interest (poi) are
anchored to a link with a constant local offset and are the robot points
used by the separation and time-dilation computations.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from importlib import resources
from pathlib import Path

import numpy as np

from ._backend import Chain


@dataclass(frozen=True)
class Joint:
    axis: tuple
    offset: np.ndarray  # 4x4 rigid transform applied before the rotation


@dataclass(frozen=True)
class PointOfInterest:
    link: int
    local: tuple = (0.0, 0.0, 0.0)


@dataclass(frozen=True, eq=False)
class RobotModel:
    name: str
    joints: tuple
    qdot_max: np.ndarray
    qddot_max: np.ndarray
    q_min: np.ndarray
    q_max: np.ndarray
    poi: tuple
    # capsule endpoints index the point list [base origin] + poi
    capsules: tuple = field(default=())

    def __post_init__(self):
        n = len(self.joints)
        if n < 1:
            raise ValueError("model needs at least one joint")
        for name in ("qdot_max", "qddot_max", "q_min", "q_max"):
            arr = np.array(getattr(self, name), dtype=np.float64)
            if arr.shape != (n,):
                raise ValueError(f"{name} must have length {n}")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if np.any(self.qdot_max <= 0) or np.any(self.qddot_max <= 0):
            raise ValueError("speed and acceleration limits must be positive")
        if np.any(self.q_min >= self.q_max):
            raise ValueError("q_min must be below q_max")
        if not self.poi:
            raise ValueError("at least one point of interest is required")
        for p in self.poi:
            if not 0 <= p.link <= n:
                raise ValueError(f"poi references invalid link {p.link}")
        if not self.capsules:
            caps = tuple((j, j + 1, 0.05) for j in range(len(self.poi)))
            object.__setattr__(self, "capsules", caps)
        for a, b, r in self.capsules:
            if not (0 <= a <= len(self.poi) and 0 <= b <= len(self.poi)) or r < 0:
                raise ValueError("invalid capsule definition")

    def __getstate__(self):
        state = dict(self.__dict__)
        state.pop("chain", None)  # compiled handle is rebuilt lazily
        return state

    def __setstate__(self, state):
        self.__dict__.update(state)

    @property
    def n(self) -> int:
        return len(self.joints)

    @property
    def p(self) -> int:
        return len(self.poi)

    @cached_property
    def chain(self):
        return Chain(*self.chain_args())

    def chain_args(self) -> tuple:
        """Constructor arguments of the kernel chain (either backend)."""
        offsets = np.array([j.offset for j in self.joints], dtype=np.float64)
        axes = np.array([j.axis for j in self.joints], dtype=np.float64)
        axes /= np.linalg.norm(axes, axis=1, keepdims=True)
        caps = np.array(self.capsules, dtype=np.float64).reshape(-1, 3)
        return (
            offsets,
            axes,
            np.array([p.link for p in self.poi], dtype=np.int32),
            np.array([p.local for p in self.poi], dtype=np.float64),
            caps[:, 0].astype(np.int32),
            caps[:, 1].astype(np.int32),
            caps[:, 2],
            self.q_min,
            self.q_max,
        )

    def check_q(self, q) -> np.ndarray:
        q = np.asarray(q, dtype=np.float64)
        if q.shape != (self.n,):
            raise ValueError(f"configuration must have shape ({self.n},), got {q.shape}")
        return q

    def within_limits(self, q) -> bool:
        q = self.check_q(q)
        return bool(np.all(q >= self.q_min) and np.all(q <= self.q_max))


def forward_points(model: RobotModel, q) -> np.ndarray:
    """World positions of every point of interest, shape (p, 3)."""
    return model.chain.points(model.check_q(q))


def point_jacobian(model: RobotModel, q, poi_index: int) -> np.ndarray:
    """Linear-velocity Jacobian (3 x n) of one point of interest."""
    q = model.check_q(q)
    if not 0 <= poi_index < model.p:
        raise IndexError(f"poi index {poi_index} out of range")
    R, P = model.chain.fk(q)
    poi = model.poi[poi_index]
    point = P[poi.link] + R[poi.link] @ np.asarray(poi.local, dtype=np.float64)
    J = np.zeros((3, model.n))
    for i in range(1, poi.link + 1):
        axis = np.asarray(model.joints[i - 1].axis, dtype=np.float64)
        z = R[i] @ (axis / np.linalg.norm(axis))
        J[:, i - 1] = np.cross(z, point - P[i])
    return J


def transform(xyz=(0.0, 0.0, 0.0), rpy=(0.0, 0.0, 0.0)) -> np.ndarray:
    """4x4 transform from a translation and fixed-axis roll/pitch/yaw."""
    r, p, y = rpy
    cr, sr, cp, sp, cy, sy = (math.cos(r), math.sin(r), math.cos(p), math.sin(p),
                              math.cos(y), math.sin(y))
    T = np.eye(4)
    T[:3, :3] = [
        [cy * cp, cy * sp * sr - sy * cr, cy * sp * cr + sy * sr],
        [sy * cp, sy * sp * sr + cy * cr, sy * sp * cr - cy * sr],
        [-sp, cp * sr, cp * cr],
    ]
    T[:3, 3] = xyz
    return T


def dh_transform(d, a, alpha) -> np.ndarray:
    """Fixed part of a standard DH link: Tz(d) Tx(a) Rx(alpha)."""
    ca, sa = math.cos(alpha), math.sin(alpha)
    return np.array([
        [1.0, 0.0, 0.0, a],
        [0.0, ca, -sa, 0.0],
        [0.0, sa, ca, d],
        [0.0, 0.0, 0.0, 1.0],
    ])


def model_from_dict(data: dict) -> RobotModel:
    if "dh" in data:
        fixed = [dh_transform(row["d"], row["a"], row["alpha"]) for row in data["dh"]]
        offsets = [np.eye(4)] + fixed[:-1]
        joints = tuple(Joint((0.0, 0.0, 1.0), off) for off in offsets)
        tool = fixed[-1][:3, 3]
        n = len(joints)
        if "poi" in data:
            poi = tuple(PointOfInterest(int(p["link"]), tuple(p.get("local", (0, 0, 0))))
                        for p in data["poi"])
        else:
            # default: every link frame origin plus the tool tip
            poi = tuple(PointOfInterest(k) for k in range(1, n + 1))
            poi += (PointOfInterest(n, tuple(float(v) for v in tool)),)
    else:
        joints = []
        for j in data["joints"]:
            if "matrix" in j:
                off = np.array(j["matrix"], dtype=np.float64)
            else:
                off = transform(j.get("xyz", (0, 0, 0)), j.get("rpy", (0, 0, 0)))
            joints.append(Joint(tuple(j.get("axis", (0.0, 0.0, 1.0))), off))
        joints = tuple(joints)
        poi = tuple(PointOfInterest(int(p["link"]), tuple(p.get("local", (0, 0, 0))))
                    for p in data["poi"])
    radius = float(data.get("link_radius", 0.05))
    caps = data.get("capsules")
    if caps is None:
        caps = [(j, j + 1, radius) for j in range(len(poi))]
    return RobotModel(
        name=data.get("name", "robot"),
        joints=joints,
        qdot_max=np.array(data["qdot_max"], dtype=np.float64),
        qddot_max=np.array(data["qddot_max"], dtype=np.float64),
        q_min=np.array(data["q_min"], dtype=np.float64),
        q_max=np.array(data["q_max"], dtype=np.float64),
        poi=poi,
        capsules=tuple((int(a), int(b), float(r)) for a, b, r in caps),
    )


def load_model(source) -> RobotModel:
    """Load a model from a JSON file path or the name of a bundled model."""
    path = Path(source)
    if path.suffix == ".json" and path.exists():
        return model_from_dict(json.loads(path.read_text()))
    ref = resources.files("hareplan") / "data" / "models" / f"{source}.json"
    if not ref.is_file():
        raise FileNotFoundError(f"unknown robot model {source!r}")
    return model_from_dict(json.loads(ref.read_text()))


def planar_2dof() -> RobotModel:
    return load_model("planar2")


def ur10e_like() -> RobotModel:
    return load_model("ur10e_like")
