"""Anytime path replanning from the current configuration.

The replanner tries to reconnect the robot to nodes of the current path and
of a set of precomputed paths. Subtrees are grown inside the informed set
without evaluating the cost function; costs are computed only for the
connections of a candidate solution chain. The same machinery with the
weighted-length cost gives the length-only baseline.
"""
from __future__ import annotations

import csv
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .cost import connection_cost, lower_bound_scale
from .planner import NORMAL, SECOND_ORDER, PathP, Tree
from .sampling import EllipsoidSampler, InformedSet
from .world import DEFAULT_CHECK_STEP, check_connection

MIN_DIST = 0.05       # rad, capture radius around a target node
MAX_ITER = 100        # growth iterations per target
STEP = 0.4            # rad, extension length
GOAL_BIAS = 0.2
CALL_ITERATIONS = 400  # growth iterations per call (deterministic budget)


@dataclass(frozen=True)
class Projection:
    q: np.ndarray
    seg: int      # connection index the point lies on
    s: float      # fraction along that connection

    @property
    def progress(self) -> float:
        return self.seg + self.s


def project_on_path(state, path: PathP, last: Projection | None = None) -> Projection:
    """Closest point of the path polyline to ``state``, never behind ``last``."""
    state = np.asarray(state, dtype=np.float64)
    w = path.waypoints
    best = None
    start = 0 if last is None else last.seg
    for i in range(start, len(w) - 1):
        a, b = w[i], w[i + 1]
        d = b - a
        s = float(np.clip(np.dot(state - a, d) / np.dot(d, d), 0.0, 1.0))
        if last is not None and i == last.seg:
            s = max(s, last.s)
        q = a + s * d
        dist = float(np.sum((state - q) ** 2))
        if best is None or dist < best[0]:
            best = (dist, i, s, q)
    _, i, s, q = best
    if s >= 1.0 and i < len(w) - 2:
        i, s, q = i + 1, 0.0, w[i + 1].copy()
    if s >= 1.0:
        q = w[-1].copy()
    return Projection(q, i, s)


@dataclass
class ReplanRequest:
    current_path: PathP
    q_curr: np.ndarray
    path_set: list
    human: object
    budget: float
    cm: object
    seed: int = 0
    seg: int | None = None       # connection of current_path holding q_curr
    max_iter: int | None = None  # growth iterations; None -> CALL_ITERATIONS

    def __post_init__(self):
        if self.budget <= 0:
            raise ValueError("budget must be positive")
        self.q_curr = np.asarray(self.q_curr, dtype=np.float64)
        if self.seg is None:
            self.seg = project_on_path(self.q_curr, self.current_path).seg
        a = self.current_path.waypoints[self.seg]
        b = self.current_path.waypoints[self.seg + 1]
        d = b - a
        s = float(np.clip(np.dot(self.q_curr - a, d) / np.dot(d, d), 0.0, 1.0))
        if np.linalg.norm(a + s * d - self.q_curr) > 1e-9:
            raise ValueError("q_curr does not lie on the current path")


@dataclass
class ReplanResult:
    solved: bool
    path: PathP | None
    cost: float
    current_cost: float
    iterations: int
    elapsed: float
    evaluations: int = 0        # connection cost computations
    chain_connections: int = 0  # connections requested on candidate chains
    candidates: int = 0


class _CallContext:
    """Per-call caches keyed on the request's human snapshot."""

    def __init__(self, model, scene, human, cm, check_step):
        self.model, self.scene, self.human, self.cm = model, scene, human, cm
        self.check_step = check_step
        self._cost = {}
        self._free = {}
        self.evaluations = 0
        self.chain_connections = 0

    @staticmethod
    def _key(a, b):
        return a.tobytes() + b.tobytes()

    def cost(self, a, b) -> float:
        """Cost of a chain connection; only chains ever reach this."""
        k = self._key(a, b)
        self.chain_connections += 1
        c = self._cost.get(k)
        if c is None:
            self.evaluations += 1
            c = connection_cost(self.model, a, b, self.human, self.cm)
            self._cost[k] = c
        return c

    def free(self, a, b) -> bool:
        k = self._key(a, b)
        v = self._free.get(k)
        if v is None:
            v = check_connection(self.model, a, b, self.human, self.scene, self.check_step)
            self._free[k] = v
        return v


class Replanner:
    """Stateful replanner; subtrees rooted at current-path nodes persist."""

    def __init__(self, model, scene, *, min_dist: float = MIN_DIST, max_iter: int = MAX_ITER,
                 step: float = STEP, goal_bias: float = GOAL_BIAS,
                 check_step: float = DEFAULT_CHECK_STEP, trace_path=None):
        self.model = model
        self.scene = scene
        self.min_dist = min_dist
        self.max_iter = max_iter
        self.step = step
        self.goal_bias = goal_bias
        self.check_step = check_step
        self.trees: dict[bytes, Tree] = {}
        self.trace_path = trace_path
        self.trace_rows: list = []

    # ------------------------------------------------------------ helpers

    def _lb(self, cm, a, b) -> float:
        w, f = lower_bound_scale(self.model, cm)
        return float(np.linalg.norm((b - a) / w)) / f

    def _tree_for(self, q1) -> Tree:
        key = q1.tobytes()
        tree = self.trees.get(key)
        if tree is None:
            tree = Tree(q1)
            self.trees[key] = tree
        return tree

    @staticmethod
    def _reset(tree: Tree):
        """Start of a call: unhide branches and forget edge validity."""
        tree.unhide_all()
        tree.edge_valid[1:] = -1

    # --------------------------------------------------------------- call

    def replan(self, req: ReplanRequest) -> ReplanResult:
        t0 = time.perf_counter()
        model, cm = self.model, req.cm
        ctx = _CallContext(model, self.scene, req.human, cm, self.check_step)
        rng = np.random.default_rng(req.seed)
        budget = CALL_ITERATIONS if req.max_iter is None else req.max_iter
        weights, factor = lower_bound_scale(model, cm)
        goal = req.current_path.goal

        # current subpath from q_curr
        cur = req.current_path.tail_from(req.seg, req.q_curr)
        w = cur.waypoints
        first_invalid = None
        for i in range(len(w) - 1):
            if not ctx.free(w[i], w[i + 1]):
                first_invalid = i
                break
        come = [0.0]
        last_q1 = len(w) - 2 if first_invalid is None else first_invalid
        for i in range(last_q1):
            come.append(come[-1] + ctx.cost(w[i], w[i + 1]))
        if first_invalid is None:
            current_cost = come[-1] + ctx.cost(w[-2], w[-1])
        else:
            current_cost = math.inf
        c_best = current_cost
        best = None
        iterations = 0
        candidates = 0

        quick = (math.isfinite(current_cost)
                 and current_cost <= self._lb(cm, w[0], goal) * (1.0 + 1e-9))
        if not quick:
            q1_nodes = sorted(range(last_q1 + 1),
                              key=lambda i: (come[i] + self._lb(cm, w[i], goal), i))
            keep = {w[i].tobytes() for i in q1_nodes}
            self.trees = {k: t for k, t in self.trees.items() if k in keep}

            # targets: nodes of the path set and the current subpath
            sources = [(p, False) for p in req.path_set] + [(cur, True)]
            for i1 in q1_nodes:
                if iterations >= budget:
                    break
                q1 = w[i1]
                if come[i1] + self._lb(cm, q1, goal) >= c_best:
                    continue
                tree = self._tree_for(q1)
                self._reset(tree)
                targets = []
                for p, is_cur in sources:
                    for j in range(len(p.waypoints)):
                        if is_cur and j <= i1:
                            continue
                        qj = p.waypoints[j]
                        if np.array_equal(qj, q1) or np.any(~p.valid[j:]):
                            continue
                        lb = come[i1] + self._lb(cm, q1, qj) + self._lb(cm, qj, goal)
                        if lb < c_best:
                            targets.append((lb, len(targets), p, j))
                targets.sort(key=lambda t: (t[0], t[1]))
                # direct connections to every target first, then tree growth
                done = set()
                for grow in (False, True):
                    for lb, t_id, p, j in targets:
                        if iterations >= budget:
                            break
                        if t_id in done or lb >= c_best:
                            continue
                        qj = p.waypoints[j]
                        # subtree lives in the set of points that could beat c_best via q1
                        iset = InformedSet(q1, goal, (c_best - come[i1]) * factor, weights,
                                           model.q_min, model.q_max)
                        res = grow_in_ellipsoid(
                            tree, iset, qj, self.scene, req.human, ctx, rng,
                            max_iter=min(self.max_iter, budget - iterations) if grow else 0,
                            step=self.step,
                            min_dist=self.min_dist, goal_bias=self.goal_bias)
                        iterations += res.iterations if grow else max(res.iterations, 1)
                        if not res.success:
                            continue
                        done.add(t_id)
                        tail = p.waypoints[j:]
                        tail_cost = 0.0
                        ok = True
                        for a, b in zip(tail[:-1], tail[1:]):
                            if not ctx.free(a, b):
                                ok = False
                                break
                        if not ok:
                            continue
                        candidates += 1
                        partial = come[i1] + res.chain_cost
                        if partial >= c_best:
                            continue
                        for a, b in zip(tail[:-1], tail[1:]):
                            tail_cost += ctx.cost(a, b)
                            if partial + tail_cost >= c_best:
                                break
                        total = partial + tail_cost
                        if total < c_best:
                            chain = tree.q[res.chain].copy()
                            waypoints = np.vstack([w[:i1], chain, tail[1:]])
                            order = np.zeros(len(waypoints) - 1, dtype=np.int8)
                            if res.second_order:
                                order[i1 + len(chain) - 2] = SECOND_ORDER
                            best = (waypoints, order)
                            c_best = total
                            # later Q1 entries are re-checked against the new bound

        solved = best is not None
        path = None
        cost = current_cost
        if solved:
            waypoints, order = _shortcut(*best, ctx)
            costs = np.array([ctx.cost(a, b) for a, b in zip(waypoints[:-1], waypoints[1:])])
            cost = float(costs.sum())
            if not cost < current_cost:
                # numerical tie; keep the current path
                solved, path, cost = False, None, current_cost
            else:
                path = PathP(waypoints, costs, None, order, {"replanned": True})
        result = ReplanResult(solved, path, cost, current_cost, iterations,
                              time.perf_counter() - t0, ctx.evaluations, ctx.chain_connections,
                              candidates)
        if self.trace_path is not None:
            self.trace_rows.append(result)
        return result

    def write_trace(self, path=None):
        path = path or self.trace_path
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["call", "solved", "elapsed_s", "iterations", "evaluations",
                         "chain_connections", "current_cost", "adopted_cost"])
            for k, r in enumerate(self.trace_rows):
                wr.writerow([k, int(r.solved), f"{r.elapsed:.6f}", r.iterations, r.evaluations,
                             r.chain_connections, f"{r.current_cost:.9g}",
                             f"{r.cost:.9g}" if r.solved else ""])


@dataclass
class GrowResult:
    success: bool
    iterations: int
    chain: list = field(default_factory=list)  # node indices root..target
    chain_cost: float = math.inf
    second_order: bool = False


def _shortcut(waypoints, order, ctx):
    """Greedily drop waypoints when the direct connection is free and cheaper."""
    w = list(waypoints)
    seg = [ctx.cost(a, b) for a, b in zip(w[:-1], w[1:])]
    keep = [0]
    i = 0
    while i < len(w) - 1:
        nxt = i + 1
        for j in range(len(w) - 1, i + 1, -1):
            if ctx.free(w[i], w[j]) and ctx.cost(w[i], w[j]) < sum(seg[i:j]) - 1e-12:
                nxt = j
                break
        keep.append(nxt)
        i = nxt
    new_order = [order[a] if b == a + 1 else NORMAL for a, b in zip(keep[:-1], keep[1:])]
    return np.array([w[k] for k in keep]), np.array(new_order, dtype=np.int8)


def _prune(tree: Tree, inside):
    """Drop subtrees whose root left the informed set."""
    act = ~tree.removed
    act[0] = False
    for i in np.nonzero(act & ~inside(tree.q))[0]:
        if not tree.removed[i]:
            tree.remove(int(i))


def grow_in_ellipsoid(tree: Tree, iset: InformedSet, q_target, scene, human, ctx, rng, *,
                      max_iter: int = MAX_ITER, step: float = STEP, min_dist: float = MIN_DIST,
                      goal_bias: float = GOAL_BIAS) -> GrowResult:
    """Grow ``tree`` toward ``q_target`` with samples from ``iset``.

    New edges are collision checked but never costed. When a node lands
    within ``min_dist`` of the target its root chain is validated; invalid
    branches are hidden for the rest of the call. A valid chain is costed
    through ``ctx.cost`` and closed with a second-order connection onto the
    target (unless the node coincides with it).
    """
    q_target = np.asarray(q_target, dtype=np.float64)
    if iset.is_empty:
        return GrowResult(False, 0)
    sampler = EllipsoidSampler(iset, max_tries=50)
    weights = iset.qdot_max

    def inside(Q):
        Q = np.atleast_2d(Q)
        if not iset.is_bounded:
            return np.ones(len(Q), dtype=bool)
        h = (np.linalg.norm((Q - iset.q_start) / weights, axis=1)
             + np.linalg.norm((iset.q_goal - Q) / weights, axis=1))
        return h < iset.c_best

    if not inside(q_target)[0]:
        return GrowResult(False, 0)
    _prune(tree, inside)

    def growable():
        return tree.active() & (tree.edge_order == NORMAL)

    def try_chain(k):
        """Validate root..k, then close onto the target. None if invalid."""
        idx = tree.path_to(k)
        for a, b in zip(idx[:-1], idx[1:]):
            if tree.edge_valid[b] != 1:
                if ctx.free(tree.q[a], tree.q[b]):
                    tree.edge_valid[b] = 1
                else:
                    tree.edge_valid[b] = 0
                    tree.hide(b)
                    return None
        qk = tree.q[k]
        second = not np.array_equal(qk, q_target)
        if second and not ctx.free(qk, q_target):
            return None
        cost = 0.0
        for a, b in zip(idx[:-1], idx[1:]):
            cost += ctx.cost(tree.q[a], tree.q[b])
        if second:
            # the target becomes a second-order child; never grown from
            t = tree.add(q_target, k, math.nan, 1, SECOND_ORDER)
            cost += ctx.cost(qk, q_target)
            idx = idx + [t]
        return GrowResult(True, 0, idx, cost, second)

    # existing nodes already close to the target
    mask = growable()
    d = np.linalg.norm(tree.q - q_target, axis=1)
    close = np.nonzero(mask & (d <= min_dist))[0]
    for k in close[np.argsort(d[close], kind="stable")]:
        res = try_chain(int(k))
        if res is not None:
            return res

    # greedy attempt: one straight extension from the nearest node
    i_near = tree.nearest(q_target, mask)
    if i_near >= 0 and ctx.free(tree.q[i_near], q_target):
        k = tree.add(q_target, i_near, math.nan, 1)
        res = try_chain(k)
        if res is not None:
            res.iterations = 1
            return res

    for it in range(1, max_iter + 1):
        if rng.random() < goal_bias:
            q_rand = q_target
        else:
            try:
                q_rand = sampler.sample(rng)
            except RuntimeError:
                continue
        mask = growable()
        i_near = tree.nearest(q_rand, mask)
        if i_near < 0:
            return GrowResult(False, it)
        q_near = tree.q[i_near]
        dvec = q_rand - q_near
        dn = float(np.linalg.norm(dvec))
        if dn < 1e-12:
            continue
        q_new = q_rand.copy() if dn <= step else q_near + dvec * (step / dn)
        if not inside(q_new)[0]:
            continue
        if np.any(q_new < iset.q_min) or np.any(q_new > iset.q_max):
            continue
        if not ctx.free(q_near, q_new):
            continue
        k = tree.add(q_new, i_near, math.nan, 1)
        if np.linalg.norm(q_new - q_target) <= min_dist:
            res = try_chain(k)
            if res is not None:
                res.iterations = it
                return res
    return GrowResult(False, max_iter)


def replan(req: ReplanRequest, model, scene, **kw) -> ReplanResult:
    """One-shot replanning call with fresh subtrees."""
    return Replanner(model, scene, **kw).replan(req)
