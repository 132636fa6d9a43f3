# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kinematic/safety/collision kernels.

Mirrors :mod:`hareplan._fallback` call for call. All heavy loops (chain
forward kinematics, pairwise time-dilation, swept collision checks) run
without the GIL on raw buffers.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, sin, cos, fabs, INFINITY, ceil, log2
from libc.stdlib cimport malloc, free

cnp.import_array()

DEF DEGENERATE_DIST = 1e-12


cdef inline double _dot3(const double* a, const double* b) noexcept nogil:
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]


cdef inline double _clamp01(double x) noexcept nogil:
    if x < 0.0:
        return 0.0
    if x > 1.0:
        return 1.0
    return x


cdef inline double _ssm_vmax(const double* prm, double s) noexcept nogil:
    # prm = (C, T_r, v_h, a_s)
    cdef double rad, ast
    if s == INFINITY:
        return INFINITY
    ast = prm[3] * prm[1]
    rad = prm[2] * prm[2] + ast * ast - 2.0 * prm[3] * (prm[0] - s)
    if rad < 0.0:
        rad = 0.0
    rad = sqrt(rad) - ast - prm[2]
    if rad < 0.0:
        return 0.0
    return rad


cdef void _fk(int n, const double* offsets, const double* axes, const double* q,
              double* R, double* P) noexcept nogil:
    """Frames after each joint rotation; frame 0 is the base (identity)."""
    cdef int i, r, c, k
    cdef const double* O
    cdef const double* Rp
    cdef const double* Pp
    cdef double Ro[9]
    cdef double Rot[9]
    cdef double ax, ay, az, ct, st, vt
    cdef double* Rn
    for k in range(9):
        R[k] = 0.0
    R[0] = 1.0
    R[4] = 1.0
    R[8] = 1.0
    P[0] = 0.0
    P[1] = 0.0
    P[2] = 0.0
    for i in range(n):
        O = offsets + 16 * i
        Rp = R + 9 * i
        Pp = P + 3 * i
        for r in range(3):
            for c in range(3):
                Ro[3 * r + c] = (Rp[3 * r] * O[c] + Rp[3 * r + 1] * O[4 + c]
                                 + Rp[3 * r + 2] * O[8 + c])
            P[3 * (i + 1) + r] = (Rp[3 * r] * O[3] + Rp[3 * r + 1] * O[7]
                                  + Rp[3 * r + 2] * O[11] + Pp[r])
        ax = axes[3 * i]
        ay = axes[3 * i + 1]
        az = axes[3 * i + 2]
        ct = cos(q[i])
        st = sin(q[i])
        vt = 1.0 - ct
        Rot[0] = ct + ax * ax * vt
        Rot[1] = ax * ay * vt - az * st
        Rot[2] = ax * az * vt + ay * st
        Rot[3] = ay * ax * vt + az * st
        Rot[4] = ct + ay * ay * vt
        Rot[5] = ay * az * vt - ax * st
        Rot[6] = az * ax * vt - ay * st
        Rot[7] = az * ay * vt + ax * st
        Rot[8] = ct + az * az * vt
        Rn = R + 9 * (i + 1)
        for r in range(3):
            for c in range(3):
                Rn[3 * r + c] = (Ro[3 * r] * Rot[c] + Ro[3 * r + 1] * Rot[3 + c]
                                 + Ro[3 * r + 2] * Rot[6 + c])


cdef void _points(int p, const int* link, const double* local,
                  const double* R, const double* P, double* pos) noexcept nogil:
    cdef int j, r, k
    cdef const double* Rk
    for j in range(p):
        k = link[j]
        Rk = R + 9 * k
        for r in range(3):
            pos[3 * j + r] = (P[3 * k + r] + Rk[3 * r] * local[3 * j]
                              + Rk[3 * r + 1] * local[3 * j + 1]
                              + Rk[3 * r + 2] * local[3 * j + 2])


cdef void _velocities(int p, const int* link, const double* axes, const double* R,
                      const double* P, const double* pos, const double* qdot,
                      double* vel) noexcept nogil:
    cdef int j, i, k
    cdef double z0, z1, z2, d0, d1, d2, w
    cdef const double* Ri
    cdef const double* a
    for j in range(p):
        vel[3 * j] = 0.0
        vel[3 * j + 1] = 0.0
        vel[3 * j + 2] = 0.0
        k = link[j]
        for i in range(1, k + 1):
            w = qdot[i - 1]
            if w == 0.0:
                continue
            Ri = R + 9 * i
            a = axes + 3 * (i - 1)
            z0 = Ri[0] * a[0] + Ri[1] * a[1] + Ri[2] * a[2]
            z1 = Ri[3] * a[0] + Ri[4] * a[1] + Ri[5] * a[2]
            z2 = Ri[6] * a[0] + Ri[7] * a[1] + Ri[8] * a[2]
            d0 = pos[3 * j] - P[3 * i]
            d1 = pos[3 * j + 1] - P[3 * i + 1]
            d2 = pos[3 * j + 2] - P[3 * i + 2]
            vel[3 * j] += w * (z1 * d2 - z2 * d1)
            vel[3 * j + 1] += w * (z2 * d0 - z0 * d2)
            vel[3 * j + 2] += w * (z0 * d1 - z1 * d0)


cdef double _pair_lambda(int p, const double* pos, const double* vel, int m,
                         const double* hpos, const double* hvel, double clearance,
                         int mode, const double* prm, double lambda_max,
                         bint use_hvel) noexcept nogil:
    cdef int j, k
    cdef double lam = 1.0
    cdef double u0, u1, u2, d, v, vmax, ratio
    for j in range(p):
        for k in range(m):
            u0 = hpos[3 * k] - pos[3 * j]
            u1 = hpos[3 * k + 1] - pos[3 * j + 1]
            u2 = hpos[3 * k + 2] - pos[3 * j + 2]
            d = sqrt(u0 * u0 + u1 * u1 + u2 * u2)
            if d < DEGENERATE_DIST:
                return lambda_max
            v = u0 * vel[3 * j] + u1 * vel[3 * j + 1] + u2 * vel[3 * j + 2]
            if use_hvel:
                v -= u0 * hvel[3 * k] + u1 * hvel[3 * k + 1] + u2 * hvel[3 * k + 2]
            v /= d
            if v <= 0.0:
                continue
            if mode == 0:
                vmax = _ssm_vmax(prm, d - clearance)
            else:
                vmax = prm[0]
            if vmax <= 0.0:
                return lambda_max
            ratio = v / vmax
            if ratio > lam:
                lam = ratio
    if lam > lambda_max:
        return lambda_max
    return lam


cdef double _point_segment_d2(const double* x, const double* a, const double* b) noexcept nogil:
    cdef double ab0 = b[0] - a[0], ab1 = b[1] - a[1], ab2 = b[2] - a[2]
    cdef double den = ab0 * ab0 + ab1 * ab1 + ab2 * ab2
    cdef double t = 0.0
    cdef double c0, c1, c2
    if den > 0.0:
        t = _clamp01(((x[0] - a[0]) * ab0 + (x[1] - a[1]) * ab1 + (x[2] - a[2]) * ab2) / den)
    c0 = a[0] + t * ab0 - x[0]
    c1 = a[1] + t * ab1 - x[1]
    c2 = a[2] + t * ab2 - x[2]
    return c0 * c0 + c1 * c1 + c2 * c2


cdef double _segment_segment_d2(const double* p1, const double* q1,
                                const double* p2, const double* q2) noexcept nogil:
    # closest points of two segments (Ericson, Real-Time Collision Detection 5.1.9)
    cdef double d1[3]
    cdef double d2[3]
    cdef double r[3]
    cdef double a, e, f, b, c, denom, s, t, x, dist2
    cdef int k
    for k in range(3):
        d1[k] = q1[k] - p1[k]
        d2[k] = q2[k] - p2[k]
        r[k] = p1[k] - p2[k]
    a = _dot3(d1, d1)
    e = _dot3(d2, d2)
    f = _dot3(d2, r)
    if a <= 1e-18 and e <= 1e-18:
        return _dot3(r, r)
    if a <= 1e-18:
        s = 0.0
        t = _clamp01(f / e)
    else:
        c = _dot3(d1, r)
        if e <= 1e-18:
            t = 0.0
            s = _clamp01(-c / a)
        else:
            b = _dot3(d1, d2)
            denom = a * e - b * b
            if denom > 0.0:
                s = _clamp01((b * f - c * e) / denom)
            else:
                s = 0.0
            t = (b * s + f) / e
            if t < 0.0:
                t = 0.0
                s = _clamp01(-c / a)
            elif t > 1.0:
                t = 1.0
                s = _clamp01((b - c) / a)
    dist2 = 0.0
    for k in range(3):
        x = p1[k] + d1[k] * s - p2[k] - d2[k] * t
        dist2 += x * x
    return dist2


cdef inline double _point_box_d(const double* x, const double* box) noexcept nogil:
    cdef double acc = 0.0, e
    cdef int k
    for k in range(3):
        if x[k] < box[k]:
            e = box[k] - x[k]
            acc += e * e
        elif x[k] > box[3 + k]:
            e = x[k] - box[3 + k]
            acc += e * e
    return sqrt(acc)


cdef double _segment_box_d(const double* a, const double* b, const double* box) noexcept nogil:
    # distance to a convex set is convex along a segment: golden-section search
    cdef double lo = 0.0, hi = 1.0, g = 0.6180339887498949
    cdef double x1, x2, f1, f2, fa, fb, best
    cdef double pt[3]
    cdef int it, k
    for k in range(3):
        pt[k] = a[k]
    fa = _point_box_d(pt, box)
    for k in range(3):
        pt[k] = b[k]
    fb = _point_box_d(pt, box)
    best = fa if fa < fb else fb
    if best == 0.0:
        return 0.0
    x1 = hi - g * (hi - lo)
    x2 = lo + g * (hi - lo)
    for k in range(3):
        pt[k] = a[k] + x1 * (b[k] - a[k])
    f1 = _point_box_d(pt, box)
    for k in range(3):
        pt[k] = a[k] + x2 * (b[k] - a[k])
    f2 = _point_box_d(pt, box)
    for it in range(60):
        if f1 < f2:
            hi = x2
            x2 = x1
            f2 = f1
            x1 = hi - g * (hi - lo)
            for k in range(3):
                pt[k] = a[k] + x1 * (b[k] - a[k])
            f1 = _point_box_d(pt, box)
        else:
            lo = x1
            x1 = x2
            f1 = f2
            x2 = lo + g * (hi - lo)
            for k in range(3):
                pt[k] = a[k] + x2 * (b[k] - a[k])
            f2 = _point_box_d(pt, box)
        if f1 == 0.0 or f2 == 0.0:
            return 0.0
    if f1 < best:
        best = f1
    if f2 < best:
        best = f2
    return best


cdef class Chain:
    """Flat-array view of a serial chain plus its collision capsules."""

    cdef readonly int n, p, ncap
    cdef const double[:, :, ::1] offsets
    cdef const double[:, ::1] axes
    cdef const int[::1] poi_link
    cdef const double[:, ::1] poi_local
    cdef const int[::1] cap_a, cap_b
    cdef const double[::1] cap_r
    cdef const double[::1] q_min, q_max

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
        cdef const double[::1] qv = np.ascontiguousarray(q, dtype=np.float64)
        R = np.empty((self.n + 1, 3, 3))
        P = np.empty((self.n + 1, 3))
        cdef double[:, :, ::1] Rv = R
        cdef double[:, ::1] Pv = P
        _fk(self.n, &self.offsets[0, 0, 0], &self.axes[0, 0], &qv[0], &Rv[0, 0, 0], &Pv[0, 0])
        return R, P

    def points(self, q):
        cdef const double[::1] qv = np.ascontiguousarray(q, dtype=np.float64)
        pos = np.empty((self.p, 3))
        cdef double[:, ::1] posv = pos
        cdef double* R = <double*>malloc(sizeof(double) * 12 * (self.n + 1))
        cdef double* P = R + 9 * (self.n + 1)
        try:
            _fk(self.n, &self.offsets[0, 0, 0], &self.axes[0, 0], &qv[0], R, P)
            _points(self.p, &self.poi_link[0], &self.poi_local[0, 0], R, P, &posv[0, 0])
        finally:
            free(R)
        return pos

    def point_velocities(self, q, qdot):
        cdef const double[::1] qv = np.ascontiguousarray(q, dtype=np.float64)
        cdef const double[::1] qdv = np.ascontiguousarray(qdot, dtype=np.float64)
        pos = np.empty((self.p, 3))
        vel = np.empty((self.p, 3))
        cdef double[:, ::1] posv = pos
        cdef double[:, ::1] velv = vel
        cdef double* R = <double*>malloc(sizeof(double) * 12 * (self.n + 1))
        cdef double* P = R + 9 * (self.n + 1)
        try:
            _fk(self.n, &self.offsets[0, 0, 0], &self.axes[0, 0], &qv[0], R, P)
            _points(self.p, &self.poi_link[0], &self.poi_local[0, 0], R, P, &posv[0, 0])
            _velocities(self.p, &self.poi_link[0], &self.axes[0, 0], R, P,
                        &posv[0, 0], &qdv[0], &velv[0, 0])
        finally:
            free(R)
        return pos, vel

    def lam(self, q, qdot, hpos, hvel, double clearance, int mode, prm,
            double lambda_max, bint use_hvel=True):
        cdef const double[::1] qv = np.ascontiguousarray(q, dtype=np.float64)
        cdef const double[::1] qdv = np.ascontiguousarray(qdot, dtype=np.float64)
        cdef const double[:, ::1] hp = np.ascontiguousarray(hpos, dtype=np.float64).reshape(-1, 3)
        cdef const double[:, ::1] hv = np.ascontiguousarray(hvel, dtype=np.float64).reshape(-1, 3)
        cdef const double[::1] pr = np.ascontiguousarray(prm, dtype=np.float64)
        cdef int m = hp.shape[0]
        cdef double out
        if m == 0:
            return 1.0
        cdef double* R = <double*>malloc(sizeof(double) * (12 * (self.n + 1) + 6 * self.p))
        cdef double* P = R + 9 * (self.n + 1)
        cdef double* pos = P + 3 * (self.n + 1)
        cdef double* vel = pos + 3 * self.p
        try:
            with nogil:
                _fk(self.n, &self.offsets[0, 0, 0], &self.axes[0, 0], &qv[0], R, P)
                _points(self.p, &self.poi_link[0], &self.poi_local[0, 0], R, P, pos)
                _velocities(self.p, &self.poi_link[0], &self.axes[0, 0], R, P, pos, &qdv[0], vel)
                out = _pair_lambda(self.p, pos, vel, m, &hp[0, 0], &hv[0, 0], clearance,
                                   mode, &pr[0], lambda_max, use_hvel)
        finally:
            free(R)
        return out

    def segment_lambda_mean(self, qa, qb, qdot, int z, hpos, hvel, double clearance,
                            int mode, prm, double lambda_max):
        cdef const double[::1] av = np.ascontiguousarray(qa, dtype=np.float64)
        cdef const double[::1] bv = np.ascontiguousarray(qb, dtype=np.float64)
        cdef const double[::1] qdv = np.ascontiguousarray(qdot, dtype=np.float64)
        cdef const double[:, ::1] hp = np.ascontiguousarray(hpos, dtype=np.float64).reshape(-1, 3)
        cdef const double[:, ::1] hv = np.ascontiguousarray(hvel, dtype=np.float64).reshape(-1, 3)
        cdef const double[::1] pr = np.ascontiguousarray(prm, dtype=np.float64)
        cdef int m = hp.shape[0]
        cdef int n = self.n
        cdef int s, i
        cdef double t, acc = 0.0
        if m == 0:
            return 1.0
        if z < 2:
            raise ValueError("z must be >= 2")
        cdef double* R = <double*>malloc(sizeof(double) * (12 * (n + 1) + 6 * self.p + n))
        cdef double* P = R + 9 * (n + 1)
        cdef double* pos = P + 3 * (n + 1)
        cdef double* vel = pos + 3 * self.p
        cdef double* qs = vel + 3 * self.p
        try:
            with nogil:
                for s in range(z):
                    t = <double>s / <double>(z - 1)
                    for i in range(n):
                        qs[i] = av[i] + t * (bv[i] - av[i])
                    _fk(n, &self.offsets[0, 0, 0], &self.axes[0, 0], qs, R, P)
                    _points(self.p, &self.poi_link[0], &self.poi_local[0, 0], R, P, pos)
                    _velocities(self.p, &self.poi_link[0], &self.axes[0, 0], R, P, pos, &qdv[0], vel)
                    acc += _pair_lambda(self.p, pos, vel, m, &hp[0, 0], &hv[0, 0], clearance,
                                        mode, &pr[0], lambda_max, True)
        finally:
            free(R)
        return acc / z

    cdef double _static_clear(self, const double* pos, int ns, const double* sph,
                              int nb, const double* box, int nc, const double* caps,
                              double stop_below) noexcept nogil:
        # capsule endpoints index [base origin] + poi
        cdef double base[3]
        cdef const double* bp = base
        cdef const double* a
        cdef const double* b
        cdef double best = INFINITY, d
        cdef int c, o
        base[0] = 0.0
        base[1] = 0.0
        base[2] = 0.0
        for c in range(self.ncap):
            a = bp if self.cap_a[c] == 0 else pos + 3 * (self.cap_a[c] - 1)
            b = bp if self.cap_b[c] == 0 else pos + 3 * (self.cap_b[c] - 1)
            for o in range(ns):
                d = sqrt(_point_segment_d2(sph + 4 * o, a, b)) - sph[4 * o + 3] - self.cap_r[c]
                if d < best:
                    best = d
            for o in range(nb):
                d = _segment_box_d(a, b, box + 6 * o) - self.cap_r[c]
                if d < best:
                    best = d
            for o in range(nc):
                d = (sqrt(_segment_segment_d2(a, b, caps + 7 * o, caps + 7 * o + 3))
                     - caps[7 * o + 6] - self.cap_r[c])
                if d < best:
                    best = d
            if best <= stop_below:
                return best
        return best

    cdef double _human_sep(self, const double* pos, int m, const double* hpos,
                           double clearance) noexcept nogil:
        cdef double best = INFINITY, d2, e
        cdef int j, k, r
        for j in range(self.p):
            for k in range(m):
                d2 = 0.0
                for r in range(3):
                    e = pos[3 * j + r] - hpos[3 * k + r]
                    d2 += e * e
                if d2 < best:
                    best = d2
        if m == 0:
            return INFINITY
        return sqrt(best) - clearance

    def clearances(self, q, spheres, boxes, capsules, hpos, double human_clearance):
        """Return (min static-obstacle clearance, min human separation)."""
        cdef const double[::1] qv = np.ascontiguousarray(q, dtype=np.float64)
        cdef const double[:, ::1] sp = np.ascontiguousarray(spheres, dtype=np.float64).reshape(-1, 4)
        cdef const double[:, ::1] bx = np.ascontiguousarray(boxes, dtype=np.float64).reshape(-1, 6)
        cdef const double[:, ::1] cp = np.ascontiguousarray(capsules, dtype=np.float64).reshape(-1, 7)
        cdef const double[:, ::1] hp = np.ascontiguousarray(hpos, dtype=np.float64).reshape(-1, 3)
        cdef double dummy = 0.0
        cdef const double* sptr = &sp[0, 0] if sp.shape[0] else &dummy
        cdef const double* bptr = &bx[0, 0] if bx.shape[0] else &dummy
        cdef const double* cptr = &cp[0, 0] if cp.shape[0] else &dummy
        cdef const double* hptr = &hp[0, 0] if hp.shape[0] else &dummy
        cdef double s_clear, h_sep
        cdef double* R = <double*>malloc(sizeof(double) * (12 * (self.n + 1) + 3 * self.p))
        cdef double* P = R + 9 * (self.n + 1)
        cdef double* pos = P + 3 * (self.n + 1)
        try:
            with nogil:
                _fk(self.n, &self.offsets[0, 0, 0], &self.axes[0, 0], &qv[0], R, P)
                _points(self.p, &self.poi_link[0], &self.poi_local[0, 0], R, P, pos)
                s_clear = self._static_clear(pos, sp.shape[0], sptr, bx.shape[0], bptr,
                                             cp.shape[0], cptr, -INFINITY)
                h_sep = self._human_sep(pos, hp.shape[0], hptr, human_clearance)
        finally:
            free(R)
        return s_clear, h_sep

    cdef bint _config_free(self, const double* q, double* R, double* P, double* pos,
                           int ns, const double* sph, int nb, const double* box,
                           int nc, const double* caps, int m, const double* hpos,
                           double human_clearance) noexcept nogil:
        cdef int i
        for i in range(self.n):
            if q[i] < self.q_min[i] or q[i] > self.q_max[i]:
                return False
        _fk(self.n, &self.offsets[0, 0, 0], &self.axes[0, 0], q, R, P)
        _points(self.p, &self.poi_link[0], &self.poi_local[0, 0], R, P, pos)
        if m > 0 and self._human_sep(pos, m, hpos, human_clearance) <= 0.0:
            return False
        if ns + nb + nc > 0 and self._static_clear(pos, ns, sph, nb, box, nc, caps, 0.0) <= 0.0:
            return False
        return True

    def config_free(self, q, spheres, boxes, capsules, hpos, double human_clearance):
        return self.segment_free(q, q, 1.0, spheres, boxes, capsules, hpos, human_clearance)

    def segment_free(self, qa, qb, double step, spheres, boxes, capsules, hpos,
                     double human_clearance):
        """Check the straight joint-space segment at 2**k + 1 samples (bisection order)."""
        cdef const double[::1] av = np.ascontiguousarray(qa, dtype=np.float64)
        cdef const double[::1] bv = np.ascontiguousarray(qb, dtype=np.float64)
        cdef const double[:, ::1] sp = np.ascontiguousarray(spheres, dtype=np.float64).reshape(-1, 4)
        cdef const double[:, ::1] bx = np.ascontiguousarray(boxes, dtype=np.float64).reshape(-1, 6)
        cdef const double[:, ::1] cp = np.ascontiguousarray(capsules, dtype=np.float64).reshape(-1, 7)
        cdef const double[:, ::1] hp = np.ascontiguousarray(hpos, dtype=np.float64).reshape(-1, 3)
        cdef double dummy = 0.0
        cdef const double* sptr = &sp[0, 0] if sp.shape[0] else &dummy
        cdef const double* bptr = &bx[0, 0] if bx.shape[0] else &dummy
        cdef const double* cptr = &cp[0, 0] if cp.shape[0] else &dummy
        cdef const double* hptr = &hp[0, 0] if hp.shape[0] else &dummy
        cdef int n = self.n
        cdef int i, level, j, count, stride
        cdef double L = 0.0, e, t
        cdef bint ok = True
        if step <= 0.0:
            raise ValueError("step must be positive")
        for i in range(n):
            e = bv[i] - av[i]
            L += e * e
        L = sqrt(L)
        count = 1
        while L / count > step:
            count *= 2
        cdef double* R = <double*>malloc(sizeof(double) * (12 * (n + 1) + 3 * self.p + n))
        cdef double* P = R + 9 * (n + 1)
        cdef double* pos = P + 3 * (n + 1)
        cdef double* qs = pos + 3 * self.p
        try:
            with nogil:
                ok = self._config_free(&av[0], R, P, pos, sp.shape[0], sptr, bx.shape[0], bptr,
                                       cp.shape[0], cptr, hp.shape[0], hptr, human_clearance)
                if ok and L > 0.0:
                    ok = self._config_free(&bv[0], R, P, pos, sp.shape[0], sptr, bx.shape[0],
                                           bptr, cp.shape[0], cptr, hp.shape[0], hptr,
                                           human_clearance)
                stride = count
                while ok and stride > 1:
                    # odd multiples of stride/2 are the new samples at this level
                    j = stride // 2
                    while j < count:
                        t = <double>j / <double>count
                        for i in range(n):
                            qs[i] = av[i] + t * (bv[i] - av[i])
                        if not self._config_free(qs, R, P, pos, sp.shape[0], sptr, bx.shape[0],
                                                 bptr, cp.shape[0], cptr, hp.shape[0], hptr,
                                                 human_clearance):
                            ok = False
                            break
                        j += stride
                    stride //= 2
        finally:
            free(R)
        return bool(ok)


def ssm_vmax(double C, double T_r, double v_h, double a_s, double s):
    cdef double prm[4]
    prm[0] = C
    prm[1] = T_r
    prm[2] = v_h
    prm[3] = a_s
    return _ssm_vmax(prm, s)
