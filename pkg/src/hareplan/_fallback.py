"""Pure numpy implementation of the kernels in ``_core.pyx``.

Used when the compiled extension is not available or when
``HAREPLAN_PURE=1`` is set. Results agree with the compiled core to
rounding error; the test-suite checks both against each other.
"""
import math

import numpy as np

DEGENERATE_DIST = 1e-12


def ssm_vmax(C, T_r, v_h, a_s, s):
    if s == math.inf:
        return math.inf
    ast = a_s * T_r
    rad = v_h * v_h + ast * ast - 2.0 * a_s * (C - s)
    if rad < 0.0:
        rad = 0.0
    v = math.sqrt(rad) - ast - v_h
    return v if v > 0.0 else 0.0


def _rotation(axis, angle):
    ax, ay, az = axis
    ct, st = math.cos(angle), math.sin(angle)
    vt = 1.0 - ct
    return np.array([
        [ct + ax * ax * vt, ax * ay * vt - az * st, ax * az * vt + ay * st],
        [ay * ax * vt + az * st, ct + ay * ay * vt, ay * az * vt - ax * st],
        [az * ax * vt - ay * st, az * ay * vt + ax * st, ct + az * az * vt],
    ])


def _segment_segment_d2(p1, q1, p2, q2):
    d1 = q1 - p1
    d2 = q2 - p2
    r = p1 - p2
    a = d1 @ d1
    e = d2 @ d2
    f = d2 @ r
    if a <= 1e-18 and e <= 1e-18:
        return r @ r
    if a <= 1e-18:
        s = 0.0
        t = min(max(f / e, 0.0), 1.0)
    else:
        c = d1 @ r
        if e <= 1e-18:
            t = 0.0
            s = min(max(-c / a, 0.0), 1.0)
        else:
            b = d1 @ d2
            denom = a * e - b * b
            s = min(max((b * f - c * e) / denom, 0.0), 1.0) if denom > 0.0 else 0.0
            t = (b * s + f) / e
            if t < 0.0:
                t = 0.0
                s = min(max(-c / a, 0.0), 1.0)
            elif t > 1.0:
                t = 1.0
                s = min(max((b - c) / a, 0.0), 1.0)
    x = p1 + d1 * s - p2 - d2 * t
    return x @ x


def _point_segment_d(x, a, b):
    ab = b - a
    den = ab @ ab
    t = 0.0 if den <= 0.0 else min(max((x - a) @ ab / den, 0.0), 1.0)
    c = a + t * ab - x
    return math.sqrt(c @ c)


def _point_box_d(x, box):
    e = np.maximum(box[:3] - x, 0.0) + np.maximum(x - box[3:], 0.0)
    return math.sqrt(e @ e)


def _segment_box_d(a, b, box):
    g = 0.6180339887498949
    best = min(_point_box_d(a, box), _point_box_d(b, box))
    if best == 0.0:
        return 0.0
    lo, hi = 0.0, 1.0
    x1 = hi - g * (hi - lo)
    x2 = lo + g * (hi - lo)
    f1 = _point_box_d(a + x1 * (b - a), box)
    f2 = _point_box_d(a + x2 * (b - a), box)
    for _ in range(60):
        if f1 < f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - g * (hi - lo)
            f1 = _point_box_d(a + x1 * (b - a), box)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + g * (hi - lo)
            f2 = _point_box_d(a + x2 * (b - a), box)
        if f1 == 0.0 or f2 == 0.0:
            return 0.0
    return min(best, f1, f2)


class Chain:
    def __init__(self, offsets, axes, poi_link, poi_local, cap_a, cap_b, cap_r,
                 q_min, q_max):
        self.offsets = np.ascontiguousarray(offsets, dtype=np.float64)
        self.axes = np.ascontiguousarray(axes, dtype=np.float64)
        self.poi_link = np.ascontiguousarray(poi_link, dtype=np.int32)
        self.poi_local = np.ascontiguousarray(poi_local, dtype=np.float64)
        self.cap_a = np.ascontiguousarray(cap_a, dtype=np.int32)
        self.cap_b = np.ascontiguousarray(cap_b, dtype=np.int32)
        self.cap_r = np.ascontiguousarray(cap_r, dtype=np.float64)
        self.q_min = np.ascontiguousarray(q_min, dtype=np.float64)
        self.q_max = np.ascontiguousarray(q_max, dtype=np.float64)
        self.n = self.axes.shape[0]
        self.p = self.poi_link.shape[0]
        self.ncap = self.cap_r.shape[0]

    def fk(self, q):
        R = np.empty((self.n + 1, 3, 3))
        P = np.empty((self.n + 1, 3))
        R[0] = np.eye(3)
        P[0] = 0.0
        for i in range(self.n):
            off = self.offsets[i]
            P[i + 1] = R[i] @ off[:3, 3] + P[i]
            R[i + 1] = (R[i] @ off[:3, :3]) @ _rotation(self.axes[i], q[i])
        return R, P

    def _points_from(self, R, P):
        k = self.poi_link
        return P[k] + np.einsum("jab,jb->ja", R[k], self.poi_local)

    def points(self, q):
        R, P = self.fk(q)
        return self._points_from(R, P)

    def _velocities(self, R, P, pos, qdot):
        # world joint axes and origins for joints 1..n
        z = np.einsum("iab,ib->ia", R[1:], self.axes)
        o = P[1:]
        vel = np.zeros((self.p, 3))
        for j in range(self.p):
            k = self.poi_link[j]
            if k == 0:
                continue
            cols = np.cross(z[:k], pos[j] - o[:k])
            vel[j] = qdot[:k] @ cols
        return vel

    def point_velocities(self, q, qdot):
        R, P = self.fk(q)
        pos = self._points_from(R, P)
        return pos, self._velocities(R, P, pos, np.asarray(qdot, dtype=np.float64))

    @staticmethod
    def _pair_lambda(pos, vel, hpos, hvel, clearance, mode, prm, lambda_max, use_hvel):
        diff = hpos[None, :, :] - pos[:, None, :]
        d = np.sqrt(np.einsum("jkc,jkc->jk", diff, diff))
        if np.any(d < DEGENERATE_DIST):
            return lambda_max
        rel = vel[:, None, :] - (hvel[None, :, :] if use_hvel else 0.0)
        v = np.einsum("jkc,jkc->jk", diff, rel) / d
        lam = 1.0
        closing = v > 0.0
        if not np.any(closing):
            return 1.0
        for j, k in zip(*np.nonzero(closing)):
            if mode == 0:
                vmax = ssm_vmax(prm[0], prm[1], prm[2], prm[3], d[j, k] - clearance)
            else:
                vmax = prm[0]
            if vmax <= 0.0:
                return lambda_max
            ratio = v[j, k] / vmax
            if ratio > lam:
                lam = ratio
        return min(lam, lambda_max)

    def lam(self, q, qdot, hpos, hvel, clearance, mode, prm, lambda_max, use_hvel=True):
        hpos = np.asarray(hpos, dtype=np.float64).reshape(-1, 3)
        if hpos.shape[0] == 0:
            return 1.0
        hvel = np.asarray(hvel, dtype=np.float64).reshape(-1, 3)
        pos, vel = self.point_velocities(q, qdot)
        return self._pair_lambda(pos, vel, hpos, hvel, clearance, mode, prm,
                                 lambda_max, use_hvel)

    def segment_lambda_mean(self, qa, qb, qdot, z, hpos, hvel, clearance, mode, prm,
                            lambda_max):
        hpos = np.asarray(hpos, dtype=np.float64).reshape(-1, 3)
        if hpos.shape[0] == 0:
            return 1.0
        if z < 2:
            raise ValueError("z must be >= 2")
        qa = np.asarray(qa, dtype=np.float64)
        qb = np.asarray(qb, dtype=np.float64)
        acc = 0.0
        for s in range(z):
            t = s / (z - 1)
            acc += self.lam(qa + t * (qb - qa), qdot, hpos, hvel, clearance, mode, prm,
                            lambda_max, True)
        return acc / z

    def _static_clear(self, pos, spheres, boxes, capsules, stop_below):
        chain = np.vstack([np.zeros((1, 3)), pos])
        best = math.inf
        for c in range(self.ncap):
            a = chain[self.cap_a[c]]
            b = chain[self.cap_b[c]]
            r = self.cap_r[c]
            for s in spheres:
                best = min(best, _point_segment_d(s[:3], a, b) - s[3] - r)
            for bx in boxes:
                best = min(best, _segment_box_d(a, b, bx) - r)
            for cp in capsules:
                best = min(best, math.sqrt(_segment_segment_d2(a, b, cp[:3], cp[3:6])) - cp[6] - r)
            if best <= stop_below:
                return best
        return best

    @staticmethod
    def _human_sep(pos, hpos, clearance):
        if hpos.shape[0] == 0:
            return math.inf
        diff = pos[:, None, :] - hpos[None, :, :]
        return math.sqrt(np.min(np.einsum("jkc,jkc->jk", diff, diff))) - clearance

    def clearances(self, q, spheres, boxes, capsules, hpos, human_clearance):
        pos = self.points(q)
        sp = np.asarray(spheres, dtype=np.float64).reshape(-1, 4)
        bx = np.asarray(boxes, dtype=np.float64).reshape(-1, 6)
        cp = np.asarray(capsules, dtype=np.float64).reshape(-1, 7)
        hp = np.asarray(hpos, dtype=np.float64).reshape(-1, 3)
        return (self._static_clear(pos, sp, bx, cp, -math.inf),
                self._human_sep(pos, hp, human_clearance))

    def _config_free(self, q, sp, bx, cp, hp, human_clearance):
        if np.any(q < self.q_min) or np.any(q > self.q_max):
            return False
        pos = self.points(q)
        if hp.shape[0] and self._human_sep(pos, hp, human_clearance) <= 0.0:
            return False
        if len(sp) + len(bx) + len(cp) and self._static_clear(pos, sp, bx, cp, 0.0) <= 0.0:
            return False
        return True

    def config_free(self, q, spheres, boxes, capsules, hpos, human_clearance):
        return self.segment_free(q, q, 1.0, spheres, boxes, capsules, hpos, human_clearance)

    def segment_free(self, qa, qb, step, spheres, boxes, capsules, hpos, human_clearance):
        if step <= 0.0:
            raise ValueError("step must be positive")
        qa = np.asarray(qa, dtype=np.float64)
        qb = np.asarray(qb, dtype=np.float64)
        sp = np.asarray(spheres, dtype=np.float64).reshape(-1, 4)
        bx = np.asarray(boxes, dtype=np.float64).reshape(-1, 6)
        cp = np.asarray(capsules, dtype=np.float64).reshape(-1, 7)
        hp = np.asarray(hpos, dtype=np.float64).reshape(-1, 3)
        L = math.sqrt(float((qb - qa) @ (qb - qa)))
        count = 1
        while L / count > step:
            count *= 2
        if not self._config_free(qa, sp, bx, cp, hp, human_clearance):
            return False
        if L > 0.0 and not self._config_free(qb, sp, bx, cp, hp, human_clearance):
            return False
        stride = count
        while stride > 1:
            for j in range(stride // 2, count, stride):
                t = j / count
                if not self._config_free(qa + t * (qb - qa), sp, bx, cp, hp, human_clearance):
                    return False
            stride //= 2
        return True
