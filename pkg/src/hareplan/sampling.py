"""Admissible heuristic and direct sampling of the weighted informed set."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class InformedSetEmpty(ValueError):
    """c_best is below the smallest achievable cost."""


class SamplingExhausted(RuntimeError):
    """Joint-limit rejection did not produce a sample within the retry bound."""


@dataclass(frozen=True, eq=False)
class InformedSet:
    q_start: np.ndarray
    q_goal: np.ndarray
    c_best: float
    qdot_max: np.ndarray
    q_min: np.ndarray | None = None
    q_max: np.ndarray | None = None

    def __post_init__(self):
        for name in ("q_start", "q_goal", "qdot_max", "q_min", "q_max"):
            v = getattr(self, name)
            if v is not None:
                object.__setattr__(self, name, np.asarray(v, dtype=np.float64))
        if self.q_start.shape != self.q_goal.shape or self.q_start.shape != self.qdot_max.shape:
            raise ValueError("dimension mismatch")

    @property
    def c_min(self) -> float:
        return float(np.linalg.norm((self.q_goal - self.q_start) / self.qdot_max))

    @property
    def is_empty(self) -> bool:
        return self.c_best < self.c_min

    @property
    def is_bounded(self) -> bool:
        return math.isfinite(self.c_best)


def to_scaled(q, qdot_max) -> np.ndarray:
    return np.asarray(q, dtype=np.float64) / np.asarray(qdot_max, dtype=np.float64)


def from_scaled(qhat, qdot_max) -> np.ndarray:
    return np.asarray(qhat, dtype=np.float64) * np.asarray(qdot_max, dtype=np.float64)


def heuristic(q, s: InformedSet) -> float:
    q = np.asarray(q, dtype=np.float64)
    if q.shape != s.q_start.shape:
        raise ValueError("dimension mismatch")
    return float(np.linalg.norm((q - s.q_start) / s.qdot_max)
                 + np.linalg.norm((s.q_goal - q) / s.qdot_max))


def heuristic_many(Q, s: InformedSet) -> np.ndarray:
    Q = np.asarray(Q, dtype=np.float64)
    return (np.linalg.norm((Q - s.q_start) / s.qdot_max, axis=-1)
            + np.linalg.norm((s.q_goal - Q) / s.qdot_max, axis=-1))


def _rotation_to_world(a1: np.ndarray) -> np.ndarray:
    """Rotation taking the first basis vector onto unit vector ``a1``."""
    n = a1.shape[0]
    M = np.outer(a1, np.eye(n)[0])
    U, _, Vt = np.linalg.svd(M)
    d = np.ones(n)
    d[-1] = np.linalg.det(U) * np.linalg.det(Vt)
    return U @ np.diag(d) @ Vt


class EllipsoidSampler:
    """Uniform sampler over a prolate hyperspheroid in scaled joint space.

    Caches the rotation and radii so repeated draws for the same set are
    cheap; joint-limit violators are rejected and redrawn.
    """

    def __init__(self, s: InformedSet, max_tries: int = 10000):
        if s.is_empty:
            raise InformedSetEmpty(f"c_best={s.c_best} below minimum {s.c_min}")
        self.set = s
        self.max_tries = max_tries
        self.n = s.q_start.shape[0]
        self.a = to_scaled(s.q_start, s.qdot_max)
        self.b = to_scaled(s.q_goal, s.qdot_max)
        self.center = 0.5 * (self.a + self.b)
        c_min = s.c_min
        self.degenerate = s.is_bounded and s.c_best <= c_min
        if s.is_bounded and not self.degenerate:
            if c_min > 0:
                self.C = _rotation_to_world((self.b - self.a) / c_min)
            else:
                self.C = np.eye(self.n)
            r_conj = math.sqrt(max(s.c_best ** 2 - c_min ** 2, 0.0)) / 2.0
            self.radii = np.full(self.n, r_conj)
            self.radii[0] = s.c_best / 2.0
            self.CL = self.C * self.radii  # C @ diag(radii)

    def _unit_ball(self, rng, size):
        x = rng.standard_normal((size, self.n))
        x /= np.linalg.norm(x, axis=1, keepdims=True)
        r = rng.random(size) ** (1.0 / self.n)
        return x * r[:, None]

    def _draw(self, rng, size):
        s = self.set
        if not s.is_bounded:
            if s.q_min is None or s.q_max is None:
                raise ValueError("unbounded informed set needs joint limits")
            return rng.uniform(s.q_min, s.q_max, size=(size, self.n))
        if self.degenerate:
            t = rng.random(size)
            return from_scaled(self.a + t[:, None] * (self.b - self.a), s.qdot_max)
        qhat = self._unit_ball(rng, size) @ self.CL.T + self.center
        return from_scaled(qhat, s.qdot_max)

    def _accept(self, Q):
        s = self.set
        ok = np.ones(len(Q), dtype=bool)
        if s.q_min is not None:
            ok &= np.all(Q >= s.q_min, axis=1) & np.all(Q <= s.q_max, axis=1)
        if s.is_bounded and not self.degenerate:
            ok &= heuristic_many(Q, s) < s.c_best
        return ok

    def sample(self, rng, size: int | None = None):
        want = 1 if size is None else size
        out = []
        have = 0
        tries = 0
        while have < want:
            batch = max(8, want - have)
            Q = self._draw(rng, batch)
            Q = Q[self._accept(Q)]
            out.append(Q)
            have += len(Q)
            tries += batch
            if tries > self.max_tries * want and have < want:
                raise SamplingExhausted("informed set barely intersects the joint limits")
        Q = np.concatenate(out)[:want]
        return Q[0] if size is None else Q


def sample_informed(s: InformedSet, rng, size: int | None = None, max_tries: int = 10000):
    """Draw configuration(s) uniformly from the informed set."""
    return EllipsoidSampler(s, max_tries).sample(rng, size)
