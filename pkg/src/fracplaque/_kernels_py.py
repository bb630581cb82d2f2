"""Pure-numpy implementations of the hot kernels.

Every function here has a twin with the same signature in the compiled
``_kernels`` extension; :mod:`fracplaque.kernels` picks one at import.
"""

import numpy as np


def l1_memory(a, u, j):
    """Memory part of the explicit L1 step for index ``j``.

    Returns ``sum_{k=1}^{j-1} (a[j-k-1] - a[j-k]) u[k] + a[j-1] u[0]``.
    """
    if j == 1:
        return a[0] * u[0]
    a = np.asarray(a, dtype=float)
    u = np.asarray(u, dtype=float)
    d = a[j - 2 :: -1][: j - 1] - a[j - 1 : 0 : -1]
    return float(np.dot(d, u[1:j]) + a[j - 1] * u[0])


def convection_local(N, grads, weights, vx, vy):
    """Element convection matrices ``C[e, a, b] = sum_q w phi_a (w_h . grad phi_b)``.

    ``N`` is (nq, 6) reference basis values, ``grads`` (ne, nq, 6, 2) physical
    gradients, ``weights`` (ne, nq) quadrature weights times |det J|, and
    ``vx``/``vy`` (ne, 6) the advecting field's element coefficients.
    """
    wx = vx @ N.T
    wy = vy @ N.T
    adv = wx[:, :, None] * grads[..., 0] + wy[:, :, None] * grads[..., 1]
    return np.einsum("eq,qa,eqb->eab", weights, N, adv)


def locate_points(nodes, tris, pts, hint, tol):
    """Containing triangle and barycentric coordinates for each point.

    ``hint[i]`` is tried first; points outside every triangle get -1.
    """
    pts = np.asarray(pts, dtype=float)
    n = len(pts)
    owner = np.full(n, -1, dtype=np.int64)
    bary = np.zeros((n, 3))

    def bary_of(t_idx, p):
        v = nodes[tris[t_idx]]
        v0, v1, v2 = v[..., 0, :], v[..., 1, :], v[..., 2, :]
        det = (v1[..., 0] - v0[..., 0]) * (v2[..., 1] - v0[..., 1]) - (v1[..., 1] - v0[..., 1]) * (
            v2[..., 0] - v0[..., 0]
        )
        l1 = ((p[..., 0] - v0[..., 0]) * (v2[..., 1] - v0[..., 1]) - (p[..., 1] - v0[..., 1]) * (v2[..., 0] - v0[..., 0])) / det
        l2 = ((v1[..., 0] - v0[..., 0]) * (p[..., 1] - v0[..., 1]) - (v1[..., 1] - v0[..., 1]) * (p[..., 0] - v0[..., 0])) / det
        return np.stack([1.0 - l1 - l2, l1, l2], axis=-1)

    hint = np.asarray(hint, dtype=np.int64)
    ok = hint >= 0
    if ok.any():
        b = bary_of(hint[ok], pts[ok])
        inside = np.all(b >= -tol, axis=1)
        idx = np.flatnonzero(ok)[inside]
        owner[idx] = hint[ok][inside]
        bary[idx] = b[inside]
    miss = np.flatnonzero(owner < 0)
    if len(miss):
        b = bary_of(np.arange(len(tris))[None, :], pts[miss][:, None, :])  # (m, nt, 3)
        score = b.min(axis=2)
        best = score.argmax(axis=1)
        good = score[np.arange(len(miss)), best] >= -tol
        owner[miss[good]] = best[good]
        bary[miss[good]] = b[np.arange(len(miss)), best][good]
    return owner, bary
