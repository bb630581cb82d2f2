# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels; see ``_kernels_py`` for the reference versions."""

import numpy as np
cimport numpy as cnp

cnp.import_array()


def l1_memory(a, u, Py_ssize_t j):
    cdef const double[::1] av = np.ascontiguousarray(a, dtype=np.float64)
    cdef const double[::1] uv = np.ascontiguousarray(u, dtype=np.float64)
    cdef double s = av[j - 1] * uv[0]
    cdef Py_ssize_t k
    for k in range(1, j):
        s += (av[j - k - 1] - av[j - k]) * uv[k]
    return s


def convection_local(N, grads, weights, vx, vy):
    cdef const double[:, ::1] Nv = np.ascontiguousarray(N, dtype=np.float64)
    cdef const double[:, :, :, ::1] G = np.ascontiguousarray(grads, dtype=np.float64)
    cdef const double[:, ::1] W = np.ascontiguousarray(weights, dtype=np.float64)
    cdef const double[:, ::1] X = np.ascontiguousarray(vx, dtype=np.float64)
    cdef const double[:, ::1] Y = np.ascontiguousarray(vy, dtype=np.float64)
    cdef Py_ssize_t ne = G.shape[0], nq = G.shape[1], e, q, a, b, c
    out = np.zeros((ne, 6, 6))
    cdef double[:, :, ::1] C = out
    cdef double wx, wy, wa, adv[6]
    for e in range(ne):
        for q in range(nq):
            wx = 0.0
            wy = 0.0
            for c in range(6):
                wx += X[e, c] * Nv[q, c]
                wy += Y[e, c] * Nv[q, c]
            for b in range(6):
                adv[b] = wx * G[e, q, b, 0] + wy * G[e, q, b, 1]
            for a in range(6):
                wa = W[e, q] * Nv[q, a]
                for b in range(6):
                    C[e, a, b] += wa * adv[b]
    return out


cdef inline void _bary(const double[:, ::1] nodes, const long[:, ::1] tris, Py_ssize_t t,
                       double px, double py, double* out) noexcept nogil:
    cdef long i0 = tris[t, 0], i1 = tris[t, 1], i2 = tris[t, 2]
    cdef double x0 = nodes[i0, 0], y0 = nodes[i0, 1]
    cdef double ax = nodes[i1, 0] - x0, ay = nodes[i1, 1] - y0
    cdef double bx = nodes[i2, 0] - x0, by = nodes[i2, 1] - y0
    cdef double det = ax * by - ay * bx
    cdef double l1 = ((px - x0) * by - (py - y0) * bx) / det
    cdef double l2 = (ax * (py - y0) - ay * (px - x0)) / det
    out[0] = 1.0 - l1 - l2
    out[1] = l1
    out[2] = l2


def locate_points(nodes, tris, pts, hint, double tol):
    cdef const double[:, ::1] nv = np.ascontiguousarray(nodes, dtype=np.float64)
    cdef const long[:, ::1] tv = np.ascontiguousarray(tris, dtype=np.int64)
    cdef const double[:, ::1] pv = np.ascontiguousarray(pts, dtype=np.float64)
    cdef const long[::1] hv = np.ascontiguousarray(hint, dtype=np.int64)
    cdef Py_ssize_t n = pv.shape[0], nt = tv.shape[0], i, t, best
    owner = np.full(n, -1, dtype=np.int64)
    bary = np.zeros((n, 3))
    cdef long[::1] ov = owner
    cdef double[:, ::1] bv = bary
    cdef double b[3]
    cdef double score, best_score
    with nogil:
        for i in range(n):
            t = hv[i]
            if t >= 0:
                _bary(nv, tv, t, pv[i, 0], pv[i, 1], b)
                if b[0] >= -tol and b[1] >= -tol and b[2] >= -tol:
                    ov[i] = t
                    bv[i, 0] = b[0]
                    bv[i, 1] = b[1]
                    bv[i, 2] = b[2]
                    continue
            best = -1
            best_score = -1e300
            for t in range(nt):
                _bary(nv, tv, t, pv[i, 0], pv[i, 1], b)
                score = min(b[0], min(b[1], b[2]))
                if score > best_score:
                    best_score = score
                    best = t
            if best_score >= -tol:
                _bary(nv, tv, best, pv[i, 0], pv[i, 1], b)
                ov[i] = best
                bv[i, 0] = b[0]
                bv[i, 1] = b[1]
                bv[i, 2] = b[2]
    return owner, bary
