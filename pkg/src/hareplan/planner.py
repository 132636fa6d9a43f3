"""Offline rewiring tree planner with informed sampling.

Used to build the minimum-length and HAMP baseline paths, the initial path
handed to the replanner, and the precomputed path set.
"""
from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .cost import PathLength, WeightedLength, connection_cost, lower_bound_scale
from .sampling import EllipsoidSampler, InformedSet
from .world import DEFAULT_CHECK_STEP, check_config, check_connection

# deterministic iteration budget per second of nominal planning time
ITERATIONS_PER_SECOND = 1500

NORMAL, SECOND_ORDER = 0, 1


# ------------------------------------------------------------------ paths

@dataclass(frozen=True, eq=False)
class PathP:
    """Waypoint sequence with per-connection cost, validity and order marks.

    ``costs`` holds NaN for connections whose cost has not been evaluated.
    """

    waypoints: np.ndarray
    costs: np.ndarray = None
    valid: np.ndarray = None
    order: np.ndarray = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        w = np.array(self.waypoints, dtype=np.float64)
        if w.ndim != 2 or len(w) < 2:
            raise ValueError("a path needs at least two waypoints")
        if np.any(np.all(w[1:] == w[:-1], axis=1)):
            raise ValueError("consecutive waypoints must be distinct")
        k = len(w) - 1
        costs = np.full(k, np.nan) if self.costs is None else np.array(self.costs, dtype=np.float64)
        valid = np.ones(k, dtype=bool) if self.valid is None else np.array(self.valid, dtype=bool)
        order = (np.zeros(k, dtype=np.int8) if self.order is None
                 else np.array(self.order, dtype=np.int8))
        if costs.shape != (k,) or valid.shape != (k,) or order.shape != (k,):
            raise ValueError("per-connection arrays must have one entry per connection")
        for arr in (w, costs, valid, order):
            arr.setflags(write=False)
        object.__setattr__(self, "waypoints", w)
        object.__setattr__(self, "costs", costs)
        object.__setattr__(self, "valid", valid)
        object.__setattr__(self, "order", order)

    @property
    def n_connections(self) -> int:
        return len(self.waypoints) - 1

    @property
    def start(self) -> np.ndarray:
        return self.waypoints[0]

    @property
    def goal(self) -> np.ndarray:
        return self.waypoints[-1]

    def segment_lengths(self) -> np.ndarray:
        return np.linalg.norm(np.diff(self.waypoints, axis=0), axis=1)

    def length(self) -> float:
        return float(self.segment_lengths().sum())

    def replace(self, **kw) -> "PathP":
        base = dict(waypoints=self.waypoints, costs=self.costs, valid=self.valid,
                    order=self.order, meta=dict(self.meta))
        base.update(kw)
        return PathP(**base)

    def evaluate(self, model, human, cm) -> "PathP":
        costs = [connection_cost(model, a, b, human, cm)
                 for a, b in zip(self.waypoints[:-1], self.waypoints[1:])]
        return self.replace(costs=costs)

    def total_cost(self) -> float:
        if np.any(np.isnan(self.costs)):
            raise ValueError("path has unevaluated connections")
        return float(self.costs.sum())

    def point_at(self, seg: int, s: float) -> np.ndarray:
        a, b = self.waypoints[seg], self.waypoints[seg + 1]
        return a + s * (b - a)

    def tail_from(self, seg: int, q) -> "PathP":
        """Path from ``q`` (a point on connection ``seg``) to the goal."""
        q = np.asarray(q, dtype=np.float64)
        rest = self.waypoints[seg + 1:]
        if np.array_equal(q, rest[0]):
            w = rest
            sl = slice(seg + 1, None)
            if len(w) < 2:
                raise ValueError("no connection left after q")
            return PathP(w, self.costs[sl], self.valid[sl], self.order[sl], dict(self.meta))
        w = np.vstack([q, rest])
        sl = slice(seg, None)
        costs = self.costs[sl].copy()
        if not np.array_equal(q, self.waypoints[seg]):
            costs[0] = np.nan
        return PathP(w, costs, self.valid[sl], self.order[sl], dict(self.meta))

    def densified(self, max_step: float) -> "PathP":
        """Same polyline with extra waypoints so no connection exceeds ``max_step``."""
        if max_step <= 0:
            raise ValueError("max_step must be positive")
        rows, costs, valid, order = [self.waypoints[0]], [], [], []
        for i, (a, b) in enumerate(zip(self.waypoints[:-1], self.waypoints[1:])):
            k = max(1, int(math.ceil(np.linalg.norm(b - a) / max_step)))
            for j in range(1, k + 1):
                rows.append(b if j == k else a + (j / k) * (b - a))
            costs += [self.costs[i] / k] * k
            valid += [self.valid[i]] * k
            order += [self.order[i]] + [NORMAL] * (k - 1)
        return PathP(np.array(rows), costs, valid, order, dict(self.meta))

    def to_dict(self) -> dict:
        return {
            "waypoints": self.waypoints.tolist(),
            "costs": [None if math.isnan(c) else float(c) for c in self.costs],
            "valid": self.valid.tolist(),
            "order": self.order.tolist(),
            "meta": self.meta,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PathP":
        costs = data.get("costs")
        if costs is not None:
            costs = [np.nan if c is None else c for c in costs]
        return cls(data["waypoints"], costs, data.get("valid"), data.get("order"),
                   dict(data.get("meta", {})))

    def save(self, path):
        Path(path).write_text(json.dumps(self.to_dict(), indent=1))

    @classmethod
    def load(cls, path) -> "PathP":
        return cls.from_dict(json.loads(Path(path).read_text()))


def resample(waypoints, count: int) -> np.ndarray:
    """``count`` points equally spaced by arc length along a polyline."""
    w = np.asarray(waypoints, dtype=np.float64)
    seg = np.linalg.norm(np.diff(w, axis=0), axis=1)
    s = np.concatenate([[0.0], np.cumsum(seg)])
    targets = np.linspace(0.0, s[-1], count)
    out = np.empty((count, w.shape[1]))
    for j in range(w.shape[1]):
        out[:, j] = np.interp(targets, s, w[:, j])
    return out


def path_distance(a: PathP, b: PathP, count: int = 50) -> float:
    """Mean distance between arc-length matched points of two paths."""
    pa = resample(a.waypoints, count)
    pb = resample(b.waypoints, count)
    return float(np.mean(np.linalg.norm(pa - pb, axis=1)))


# ------------------------------------------------------------------- tree

class Tree:
    """Growable tree of configurations with cached edge data.

    Edge data lives on the child: ``edge_cost`` (NaN = not evaluated),
    ``edge_valid`` (1 valid, 0 invalid, -1 unknown) and ``edge_order``.
    """

    def __init__(self, root, capacity: int = 256):
        root = np.asarray(root, dtype=np.float64)
        self.dim = root.shape[0]
        self._q = np.empty((capacity, self.dim))
        self._parent = np.full(capacity, -1, dtype=np.int64)
        self._edge_cost = np.full(capacity, np.nan)
        self._edge_valid = np.full(capacity, -1, dtype=np.int8)
        self._edge_order = np.zeros(capacity, dtype=np.int8)
        self._hidden = np.zeros(capacity, dtype=bool)
        self._removed = np.zeros(capacity, dtype=bool)
        self.children: list[list[int]] = []
        self.size = 0
        self.add(root, -1)
        self._edge_valid[0] = 1
        self._edge_cost[0] = 0.0

    def _grow(self):
        cap = 2 * len(self._parent)
        for name, fill in (("_q", None), ("_parent", -1), ("_edge_cost", np.nan),
                           ("_edge_valid", -1), ("_edge_order", 0), ("_hidden", False),
                           ("_removed", False)):
            old = getattr(self, name)
            if fill is None:
                new = np.empty((cap,) + old.shape[1:])
            else:
                new = np.full((cap,) + old.shape[1:], fill, dtype=old.dtype)
            new[: self.size] = old[: self.size]
            setattr(self, name, new)

    def add(self, q, parent: int, edge_cost: float = np.nan, valid: int = -1,
            order: int = NORMAL) -> int:
        if self.size == len(self._parent):
            self._grow()
        i = self.size
        self._q[i] = q
        self._parent[i] = parent
        self._edge_cost[i] = edge_cost
        self._edge_valid[i] = valid
        self._edge_order[i] = order
        self.children.append([])
        if parent >= 0:
            self.children[parent].append(i)
        self.size += 1
        return i

    @property
    def root(self) -> np.ndarray:
        return self._q[0]

    @property
    def q(self) -> np.ndarray:
        return self._q[: self.size]

    @property
    def parent(self) -> np.ndarray:
        return self._parent[: self.size]

    @property
    def edge_cost(self) -> np.ndarray:
        return self._edge_cost[: self.size]

    @property
    def edge_valid(self) -> np.ndarray:
        return self._edge_valid[: self.size]

    @property
    def edge_order(self) -> np.ndarray:
        return self._edge_order[: self.size]

    @property
    def hidden(self) -> np.ndarray:
        return self._hidden[: self.size]

    @property
    def removed(self) -> np.ndarray:
        return self._removed[: self.size]

    def active(self) -> np.ndarray:
        return ~(self.hidden | self.removed)

    def set_parent(self, i: int, p: int, edge_cost: float, valid: int = -1):
        old = self._parent[i]
        if old >= 0:
            self.children[old].remove(i)
        self._parent[i] = p
        self.children[p].append(i)
        self._edge_cost[i] = edge_cost
        self._edge_valid[i] = valid

    def path_to(self, i: int) -> list[int]:
        idx = []
        while i >= 0:
            idx.append(i)
            i = int(self._parent[i])
        return idx[::-1]

    def subtree(self, i: int) -> list[int]:
        out, stack = [], [i]
        while stack:
            j = stack.pop()
            out.append(j)
            stack.extend(self.children[j])
        return out

    def hide(self, i: int):
        self._hidden[self.subtree(i)] = True

    def unhide_all(self):
        self._hidden[: self.size] = False

    def remove(self, i: int):
        """Detach and mark the subtree rooted at ``i`` as removed."""
        if i == 0:
            raise ValueError("cannot remove the root")
        nodes = self.subtree(i)
        p = self._parent[i]
        if p >= 0:
            self.children[p].remove(i)
        self._parent[i] = -1
        self._removed[nodes] = True

    def is_ancestor(self, a: int, b: int) -> bool:
        while b >= 0:
            if b == a:
                return True
            b = int(self._parent[b])
        return False

    def nearest(self, q, mask=None) -> int:
        d = np.sum((self.q - q) ** 2, axis=1)
        if mask is not None:
            d = np.where(mask, d, np.inf)
        i = int(np.argmin(d))
        return -1 if not np.isfinite(d[i]) else i

    def near(self, q, radius: float, mask=None) -> np.ndarray:
        d = np.sum((self.q - q) ** 2, axis=1)
        ok = d <= radius * radius
        if mask is not None:
            ok &= mask
        idx = np.nonzero(ok)[0]
        return idx[np.argsort(d[idx], kind="stable")]


# ---------------------------------------------------------------- planner

@dataclass
class PlanResult:
    path: PathP | None
    cost: float
    solved: bool
    iterations: int
    history: list = field(default_factory=list)  # (iteration, cost) at improvements
    warning: str | None = None


def _steer(q_from, q_to, step):
    d = q_to - q_from
    n = float(np.linalg.norm(d))
    if n <= step:
        return q_to.copy()
    return q_from + d * (step / n)


class _Search:
    """State of one rewiring-tree search."""

    def __init__(self, model, scene, human, q_start, q_goal, cm, rng, step, goal_radius,
                 gamma, check_step, edge_penalty):
        self.model, self.scene, self.human, self.cm = model, scene, human, cm
        self.q_start, self.q_goal = q_start, q_goal
        self.rng = rng
        self.step = step
        self.goal_radius = goal_radius
        self.check_step = check_step
        self.edge_penalty = edge_penalty
        n = model.n
        if gamma is None:
            span = float(np.prod(model.q_max - model.q_min))
            unit_ball = math.pi ** (n / 2) / math.gamma(n / 2 + 1)
            gamma = 2.0 * (1.0 + 1.0 / n) ** (1.0 / n) * (span / unit_ball) ** (1.0 / n)
        self.gamma = gamma
        self.tree = Tree(q_start, 1024)
        self.come = [0.0]
        self.goal_idx = -1
        self.weights, self.factor = lower_bound_scale(model, cm)

    def edge(self, a, b) -> float:
        c = connection_cost(self.model, a, b, self.human, self.cm)
        if self.edge_penalty is not None:
            c += self.edge_penalty(a, b)
        return c

    def free(self, a, b) -> bool:
        return check_connection(self.model, a, b, self.human, self.scene, self.check_step)

    def best(self) -> float:
        return self.come[self.goal_idx] if self.goal_idx >= 0 else math.inf

    def radius(self) -> float:
        n = self.model.n
        N = self.tree.size + 1
        return min(self.step, self.gamma * (math.log(N) / N) ** (1.0 / n))

    def nearest(self, q) -> int:
        if self.goal_idx < 0:
            return self.tree.nearest(q)
        mask = np.ones(self.tree.size, dtype=bool)
        mask[self.goal_idx] = False
        return self.tree.nearest(q, mask)

    def propagate(self, i: int):
        stack = list(self.tree.children[i])
        while stack:
            j = stack.pop()
            self.come[j] = self.come[int(self.tree.parent[j])] + self.tree.edge_cost[j]
            stack.extend(self.tree.children[j])

    def insert(self, q_new) -> int:
        """Choose the best parent among neighbours, add, rewire. -1 on failure."""
        tree = self.tree
        near = tree.near(q_new, self.radius())
        i_near = self.nearest(q_new)
        if i_near not in near:
            near = np.append(near, i_near)
        cands = []
        for j in near:
            if j == self.goal_idx:
                continue  # the goal is a leaf
            c = self.come[j] + self.edge(tree.q[j], q_new)
            cands.append((c, int(j)))
        cands.sort()
        parent, c_new, edge_c = -1, math.inf, math.nan
        for c, j in cands:
            if self.free(tree.q[j], q_new):
                parent, c_new, edge_c = j, c, c - self.come[j]
                break
        if parent < 0:
            return -1
        k = tree.add(q_new, parent, edge_c, 1)
        self.come.append(c_new)
        for j in near:
            j = int(j)
            if j == parent or j == 0:
                continue
            c = self.edge(q_new, tree.q[j])
            if c_new + c < self.come[j] - 1e-12 and self.free(q_new, tree.q[j]):
                tree.set_parent(j, k, c, 1)
                self.come[j] = c_new + c
                self.propagate(j)
        return k

    def try_goal(self, k: int) -> bool:
        tree = self.tree
        q = tree.q[k]
        if np.linalg.norm(q - self.q_goal) > self.goal_radius:
            return False
        c = self.come[k] + self.edge(q, self.q_goal)
        if c >= self.best() - 1e-12 or not self.free(q, self.q_goal):
            return False
        if self.goal_idx < 0:
            self.goal_idx = tree.add(self.q_goal, k, c - self.come[k], 1)
            self.come.append(c)
        else:
            tree.set_parent(self.goal_idx, k, c - self.come[k], 1)
            self.come[self.goal_idx] = c
        return True

    def extract(self) -> PathP:
        idx = self.tree.path_to(self.goal_idx)
        return PathP(self.tree.q[idx].copy())


def _shortcut(model, scene, human, cm, waypoints, check_step, edge_penalty=None):
    """Greedy shortcut: skip intermediate waypoints whenever cheaper and free."""
    w = [np.asarray(q) for q in waypoints]

    def cost(a, b):
        c = connection_cost(model, a, b, human, cm)
        return c + (edge_penalty(a, b) if edge_penalty is not None else 0.0)

    seg = [cost(a, b) for a, b in zip(w[:-1], w[1:])]
    out = [w[0]]
    i = 0
    while i < len(w) - 1:
        best_j = i + 1
        for j in range(len(w) - 1, i + 1, -1):
            direct = cost(w[i], w[j])
            if direct < sum(seg[i:j]) - 1e-12 and check_connection(model, w[i], w[j], human, scene,
                                                                   check_step):
                best_j = j
                break
        out.append(w[best_j])
        i = best_j
    return np.array(out)


def plan(model, scene, human, q_start, q_goal, cm, budget: float = 2.0, seed: int = 0, *,
         max_iter: int | None = None, step: float = 0.5, goal_radius: float = 0.5,
         goal_bias: float = 0.05, gamma: float | None = None,
         check_step: float = DEFAULT_CHECK_STEP, edge_penalty=None) -> PlanResult:
    """Best path under ``cm`` found within the iteration budget.

    ``budget`` (s) maps to ``budget * ITERATIONS_PER_SECOND`` iterations
    unless ``max_iter`` is given, so results depend only on ``seed``.
    ``edge_penalty(a, b)`` optionally adds a cost term during the search;
    the reported cost is always under ``cm`` alone.
    """
    q_start = model.check_q(q_start).copy()
    q_goal = model.check_q(q_goal).copy()
    if not check_config(model, q_start, human, scene):
        raise ValueError("start configuration is infeasible")
    if not check_config(model, q_goal, human, scene):
        raise ValueError("goal configuration is infeasible")
    iters = int(max_iter if max_iter is not None else round(budget * ITERATIONS_PER_SECOND))
    rng = np.random.default_rng(seed)
    s = _Search(model, scene, human, q_start, q_goal, cm, rng, step, goal_radius, gamma,
                check_step, edge_penalty)
    history = []

    if np.array_equal(q_start, q_goal):
        raise ValueError("start and goal coincide")
    if s.free(q_start, q_goal):
        c = s.edge(q_start, q_goal)
        s.goal_idx = s.tree.add(q_goal, 0, c, 1)
        s.come.append(c)
        history.append((0, c))
        if isinstance(cm, (PathLength, WeightedLength)) and edge_penalty is None:
            path = s.extract().evaluate(model, human, cm)
            return PlanResult(path, path.total_cost(), True, 0, history)

    sampler = None
    sampler_cost = math.inf
    it = 0
    for it in range(1, iters + 1):
        c_best = s.best()
        if c_best < sampler_cost:
            sampler_cost = c_best
            lb = InformedSet(q_start, q_goal, c_best * s.factor, s.weights, model.q_min, model.q_max)
            if edge_penalty is None and lb.c_best <= lb.c_min * (1 + 1e-9):
                # no path can beat the lower bound
                it -= 1
                break
            try:
                sampler = EllipsoidSampler(lb, max_tries=200)
            except ValueError:
                sampler = None
        if rng.random() < goal_bias:
            q_rand = q_goal
        elif sampler is not None and math.isfinite(sampler_cost):
            try:
                q_rand = sampler.sample(rng)
            except RuntimeError:
                q_rand = rng.uniform(model.q_min, model.q_max)
        else:
            q_rand = rng.uniform(model.q_min, model.q_max)
        i_near = s.nearest(q_rand)
        q_new = _steer(s.tree.q[i_near], q_rand, step)
        if np.any(q_new < model.q_min) or np.any(q_new > model.q_max):
            continue
        if np.min(np.sum((s.tree.q - q_new) ** 2, axis=1)) < 1e-12:
            continue
        if not check_config(model, q_new, human, scene):
            continue
        k = s.insert(q_new)
        if k < 0:
            continue
        s.try_goal(k)
        # rewiring may also have lowered the goal cost
        after = s.best()
        if math.isfinite(after) and (not history or after < history[-1][1] - 1e-12):
            history.append((it, after))

    if s.goal_idx < 0:
        return PlanResult(None, math.inf, False, it, history)
    w = _shortcut(model, scene, human, cm, s.extract().waypoints, check_step, edge_penalty)
    path = PathP(w).evaluate(model, human, cm)
    cost = path.total_cost()
    if edge_penalty is None:
        if cost < history[-1][1] - 1e-12:
            history.append((it, cost))
        elif cost > history[-1][1] + 1e-9:
            # shortcut never worsens; fall back to the tree path if it somehow did
            path = s.extract().evaluate(model, human, cm)
            cost = path.total_cost()
    return PlanResult(path, cost, True, it, history)


def proximity_penalty(paths, weight: float, rho: float, qdot_max, samples: int = 5):
    """Edge penalty rewarding distance from already-found paths."""
    pts = np.vstack([resample(p.waypoints, max(10, int(p.length() / 0.05))) for p in paths])
    qdot_max = np.asarray(qdot_max, dtype=np.float64)

    def penalty(a, b):
        t = np.linspace(0.0, 1.0, samples)[:, None]
        q = a + t * (b - a)
        d2 = np.min(np.sum((q[:, None, :] - pts[None, :, :]) ** 2, axis=2), axis=1)
        length = float(np.linalg.norm((b - a) / qdot_max))
        return weight * length * float(np.mean(np.exp(-d2 / (rho * rho))))

    return penalty


def plan_path_set(model, scene, human, q_start, q_goal, count: int, budget: float = 2.0,
                  seed: int = 0, cm=None, *, weight: float = 3.0, rho: float = 0.6,
                  min_distance: float = 0.05, **kw):
    """``count`` start-goal paths, each pushed away from the ones before it.

    Returns ``(paths, complete)``; ``complete`` is False (with a warning)
    when fewer than ``count`` distinct paths were found.
    """
    if count < 1:
        raise ValueError("count must be at least 1")
    cm = WeightedLength() if cm is None else cm
    paths = []
    for i in range(count):
        penalty = None
        if paths:
            penalty = proximity_penalty(paths, weight, rho, model.qdot_max)
        res = plan(model, scene, human, q_start, q_goal, cm, budget, seed + i,
                   edge_penalty=penalty, **kw)
        if not res.solved:
            continue
        if any(path_distance(res.path, p) < min_distance for p in paths):
            continue
        paths.append(res.path.replace(meta={"set_index": len(paths), "seed": seed + i}))
    complete = len(paths) == count
    if not complete:
        warnings.warn(f"path set: found {len(paths)} of {count} paths", RuntimeWarning)
    return paths, complete
