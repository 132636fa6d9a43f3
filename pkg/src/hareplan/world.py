"""Scene, scripted mannequin, separation queries and collision checking."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

DEFAULT_CHECK_STEP = 0.05  # rad, joint-space L2


@dataclass(frozen=True, eq=False)
class HumanState:
    """Snapshot of the human keypoints: positions and velocities, shape (m, 3)."""

    t: float
    positions: np.ndarray
    velocities: np.ndarray

    def __post_init__(self):
        pos = np.array(self.positions, dtype=np.float64).reshape(-1, 3)
        vel = np.array(self.velocities, dtype=np.float64).reshape(-1, 3)
        if pos.shape != vel.shape:
            raise ValueError("positions and velocities must have the same shape")
        if not (np.all(np.isfinite(pos)) and np.all(np.isfinite(vel))):
            raise ValueError("human keypoints must be finite")
        pos.setflags(write=False)
        vel.setflags(write=False)
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "velocities", vel)

    @property
    def m(self) -> int:
        return self.positions.shape[0]

    @classmethod
    def empty(cls, t: float = 0.0) -> "HumanState":
        return cls(t, np.zeros((0, 3)), np.zeros((0, 3)))

    @classmethod
    def static(cls, points, t: float = 0.0) -> "HumanState":
        pts = np.array(points, dtype=np.float64).reshape(-1, 3)
        return cls(t, pts, np.zeros_like(pts))


@dataclass(frozen=True, eq=False)
class Track:
    """Piecewise-linear schedule of one keypoint."""

    name: str
    times: np.ndarray
    points: np.ndarray

    def __post_init__(self):
        times = np.array(self.times, dtype=np.float64)
        points = np.array(self.points, dtype=np.float64).reshape(-1, 3)
        if times.ndim != 1 or len(times) != len(points) or len(times) == 0:
            raise ValueError(f"track {self.name!r}: times and points must match")
        if np.any(np.diff(times) < 0):
            raise ValueError(f"track {self.name!r}: times must be non-decreasing")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "points", points)

    def evaluate(self, t: float):
        times, pts = self.times, self.points
        if t <= times[0] or len(times) == 1:
            return pts[0].copy(), np.zeros(3)
        if t >= times[-1]:
            return pts[-1].copy(), np.zeros(3)
        # right-continuous segment choice at breakpoints
        i = int(np.searchsorted(times, t, side="right")) - 1
        dt = times[i + 1] - times[i]
        if dt <= 0.0:
            return pts[i + 1].copy(), np.zeros(3)
        slope = (pts[i + 1] - pts[i]) / dt
        return pts[i] + slope * (t - times[i]), slope


@dataclass(frozen=True, eq=False)
class HumanScript:
    tracks: tuple
    noise_amplitude: float = 0.0
    seed: int = 0
    # the human is visible only inside [enter, exit]; None = always
    presence: tuple | None = None

    def __post_init__(self):
        if self.noise_amplitude < 0:
            raise ValueError("noise_amplitude must be non-negative")
        object.__setattr__(self, "tracks", tuple(self.tracks))

    def shifted(self, dt: float) -> "HumanScript":
        """Same motion delayed by ``dt`` seconds."""
        tracks = tuple(Track(tr.name, tr.times + dt, tr.points) for tr in self.tracks)
        presence = None if self.presence is None else (self.presence[0] + dt, self.presence[1] + dt)
        return HumanScript(tracks, self.noise_amplitude, self.seed, presence)

    def with_seed(self, seed: int) -> "HumanScript":
        return HumanScript(self.tracks, self.noise_amplitude, seed, self.presence)

    def present(self, t: float) -> bool:
        return self.presence is None or self.presence[0] <= t <= self.presence[1]


def sample_human(script: HumanScript, t: float, noise: bool = True) -> HumanState:
    """Keypoints at time ``t``: interpolated schedule plus uniform sensor noise.

    Velocities are the analytic derivative of the noise-free schedule. The
    noise draw depends only on ``(script.seed, t)``.
    """
    if t < 0:
        raise ValueError("t must be non-negative")
    if not script.tracks or not script.present(t):
        return HumanState.empty(t)
    pos = np.empty((len(script.tracks), 3))
    vel = np.empty((len(script.tracks), 3))
    for k, tr in enumerate(script.tracks):
        pos[k], vel[k] = tr.evaluate(t)
    a = script.noise_amplitude
    if noise and a > 0.0:
        rng = np.random.default_rng([script.seed, int(round(t * 1e6))])
        pos += rng.uniform(-a, a, size=pos.shape)
    return HumanState(t, pos, vel)


@dataclass(frozen=True, eq=False)
class Scene:
    spheres: tuple = ()   # (center xyz, radius)
    boxes: tuple = ()     # (min xyz, max xyz)
    capsules: tuple = ()  # (a xyz, b xyz, radius)
    human_clearance: float = 0.0

    def __post_init__(self):
        for c, r in self.spheres:
            if r <= 0:
                raise ValueError("sphere radius must be positive")
        for lo, hi in self.boxes:
            if np.any(np.asarray(hi, float) <= np.asarray(lo, float)):
                raise ValueError("box max must exceed box min")
        for a, b, r in self.capsules:
            if r <= 0:
                raise ValueError("capsule radius must be positive")
        if self.human_clearance < 0:
            raise ValueError("human_clearance must be non-negative")

    @cached_property
    def arrays(self):
        sp = np.array([[*c, r] for c, r in self.spheres], dtype=np.float64).reshape(-1, 4)
        bx = np.array([[*lo, *hi] for lo, hi in self.boxes], dtype=np.float64).reshape(-1, 6)
        cp = np.array([[*a, *b, r] for a, b, r in self.capsules], dtype=np.float64).reshape(-1, 7)
        return sp, bx, cp

    def __getstate__(self):
        state = dict(self.__dict__)
        state.pop("arrays", None)
        return state

    def __setstate__(self, state):
        self.__dict__.update(state)


def min_separation(model, q, human: HumanState, scene: Scene) -> float:
    """Smallest poi-to-keypoint distance minus the keypoint clearance."""
    if human.m == 0:
        return math.inf
    pos = model.chain.points(model.check_q(q))
    diff = pos[:, None, :] - human.positions[None, :, :]
    return float(np.sqrt(np.min(np.einsum("jkc,jkc->jk", diff, diff)))) - scene.human_clearance


def static_clearance(model, q, scene: Scene) -> float:
    sp, bx, cp = scene.arrays
    return model.chain.clearances(model.check_q(q), sp, bx, cp, np.zeros((0, 3)), 0.0)[0]


def check_config(model, q, human: HumanState | None, scene: Scene) -> bool:
    q = model.check_q(q)
    sp, bx, cp = scene.arrays
    hpos = human.positions if human is not None else np.zeros((0, 3))
    return bool(model.chain.config_free(q, sp, bx, cp, hpos, scene.human_clearance))


def check_connection(model, q_a, q_b, human: HumanState | None, scene: Scene,
                     step: float = DEFAULT_CHECK_STEP) -> bool:
    """Feasibility of the straight joint-space segment, endpoints included.

    Samples are placed on a dyadic grid (2**k intervals) so halving ``step``
    only adds samples; the endpoints are canonically ordered so the answer
    does not depend on direction.
    """
    if step <= 0:
        raise ValueError("step must be positive")
    q_a = model.check_q(q_a)
    q_b = model.check_q(q_b)
    if tuple(q_b) < tuple(q_a):
        q_a, q_b = q_b, q_a
    sp, bx, cp = scene.arrays
    hpos = human.positions if human is not None else np.zeros((0, 3))
    return bool(model.chain.segment_free(q_a, q_b, step, sp, bx, cp, hpos, scene.human_clearance))


# ---------------------------------------------------------------- loading

def scene_from_dict(data: dict) -> Scene:
    spheres, boxes, capsules = [], [], []
    for ob in data.get("obstacles", []):
        kind = ob.get("type")
        if kind == "sphere":
            spheres.append((tuple(ob["center"]), float(ob["radius"])))
        elif kind == "box":
            boxes.append((tuple(ob["min"]), tuple(ob["max"])))
        elif kind == "capsule":
            capsules.append((tuple(ob["a"]), tuple(ob["b"]), float(ob["radius"])))
        else:
            raise ValueError(f"unknown obstacle type {kind!r}")
    return Scene(tuple(spheres), tuple(boxes), tuple(capsules),
                 float(data.get("human_clearance", 0.0)))


MANNEQUIN_KEYPOINTS = ("head", "torso", "left_elbow", "right_elbow", "left_hand", "right_hand")


def mannequin_pose(x: float, y: float, reach: float, facing=None) -> dict:
    """Keypoints of a standing mannequin at floor position (x, y).

    ``reach`` in [0, 1] extends the hands toward ``facing`` (default: toward
    the robot base at the origin). Heights are relative to the table top,
    which is the z = 0 plane of the robot base.
    """
    if facing is None:
        facing = (-x, -y)
    f = np.array([facing[0], facing[1], 0.0])
    f /= max(np.linalg.norm(f), 1e-9)
    lat = np.array([-f[1], f[0], 0.0])
    body = np.array([x, y, 0.0])
    reach = min(max(reach, 0.0), 1.0)
    return {
        "head": body + [0, 0, 0.75],
        "torso": body + 0.05 * f + [0, 0, 0.35],
        "left_elbow": body + 0.22 * lat + (0.10 + 0.15 * reach) * f + [0, 0, 0.28 - 0.08 * reach],
        "right_elbow": body - 0.22 * lat + (0.10 + 0.15 * reach) * f + [0, 0, 0.28 - 0.08 * reach],
        "left_hand": body + 0.18 * lat + (0.25 + 0.35 * reach) * f + [0, 0, 0.20 - 0.12 * reach],
        "right_hand": body - 0.18 * lat + (0.25 + 0.35 * reach) * f + [0, 0, 0.20 - 0.12 * reach],
    }


def script_from_dict(data: dict) -> HumanScript:
    """Build a script from explicit keypoint tracks or a mannequin schedule.

    ``{"keypoints": {"name": [[t, x, y, z], ...]}}`` or
    ``{"mannequin": [[t, x, y, reach], ...]}``.
    """
    tracks = []
    if "keypoints" in data:
        for name, rows in data["keypoints"].items():
            rows = np.array(rows, dtype=np.float64).reshape(-1, 4)
            tracks.append(Track(name, rows[:, 0], rows[:, 1:]))
    elif data.get("mannequin"):
        rows = [tuple(r) for r in data["mannequin"]]
        poses = [mannequin_pose(x, y, reach) for _, x, y, reach in rows]
        times = [r[0] for r in rows]
        for name in MANNEQUIN_KEYPOINTS:
            tracks.append(Track(name, times, [p[name] for p in poses]))
    presence = data.get("presence")
    return HumanScript(
        tuple(tracks),
        float(data.get("noise_amplitude", 0.0)),
        int(data.get("seed", 0)),
        None if presence is None else (float(presence[0]), float(presence[1])),
    )


def load_scene(path) -> Scene:
    return scene_from_dict(json.loads(Path(path).read_text()))


def load_script(path) -> HumanScript:
    return script_from_dict(json.loads(Path(path).read_text()))
