"""Taylor-Hood (P2 velocity / P1 pressure) Navier-Stokes on the channel mesh.

Time stepping is backward Euler with the convecting velocity lagged one
step, so each step is a single sparse saddle-point solve:

    rho/dt (v, w) + rho ((v_old . grad) v, w) + rho nu (grad v, grad w)
        - (p, div w) = (f, w) + rho/dt (v_old, w),      (q, div v) = 0.

The gradient form of the viscous term has ``-p n + rho nu dv/dn = 0`` as its
natural outflow condition.  Unknowns are ordered ``[vx, vy, p]`` with the
velocity living on mesh vertices followed by edge midpoints.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Callable

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import kernels
from .errors import DomainError, StepFailureError, TransferError
from .geometry import ChannelMesh

# 6-point rule, exact for degree 4 on the reference triangle (weights sum to 1/2)
_A1, _W1 = 0.445948490915965, 0.223381589678011
_A2, _W2 = 0.091576213509771, 0.109951743655322
QUAD_POINTS = np.array(
    [
        [_A1, _A1],
        [1 - 2 * _A1, _A1],
        [_A1, 1 - 2 * _A1],
        [_A2, _A2],
        [1 - 2 * _A2, _A2],
        [_A2, 1 - 2 * _A2],
    ]
)
QUAD_WEIGHTS = 0.5 * np.array([_W1, _W1, _W1, _W2, _W2, _W2])
GAUSS2 = np.array([0.5 - 0.5 / math.sqrt(3.0), 0.5 + 0.5 / math.sqrt(3.0)])


def p2_basis(xi, eta):
    """P2 shape functions at reference points; local order v0, v1, v2, m01, m12, m20."""
    xi = np.asarray(xi, dtype=float)
    eta = np.asarray(eta, dtype=float)
    l0, l1, l2 = 1.0 - xi - eta, xi, eta
    return np.stack(
        [l0 * (2 * l0 - 1), l1 * (2 * l1 - 1), l2 * (2 * l2 - 1), 4 * l0 * l1, 4 * l1 * l2, 4 * l2 * l0],
        axis=-1,
    )


def p2_basis_grad(xi, eta):
    """Reference gradients, shape (..., 6, 2)."""
    xi = np.asarray(xi, dtype=float)
    eta = np.asarray(eta, dtype=float)
    l0, l1, l2 = 1.0 - xi - eta, xi, eta
    # d(lambda_i)/d(xi, eta)
    dl = np.array([[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]])
    lam = (l0, l1, l2)
    shp = np.broadcast(xi, eta).shape
    out = np.empty(shp + (6, 2))
    for i in range(3):
        out[..., i, :] = (4 * lam[i] - 1)[..., None] * dl[i]
    for k, (i, j) in enumerate(((0, 1), (1, 2), (2, 0))):
        out[..., 3 + k, :] = 4 * (lam[i][..., None] * dl[j] + lam[j][..., None] * dl[i])
    return out


def p1_basis(xi, eta):
    xi = np.asarray(xi, dtype=float)
    eta = np.asarray(eta, dtype=float)
    return np.stack([1.0 - xi - eta, xi, eta], axis=-1)


_N = p2_basis(QUAD_POINTS[:, 0], QUAD_POINTS[:, 1])  # (nq, 6)
_DN = p2_basis_grad(QUAD_POINTS[:, 0], QUAD_POINTS[:, 1])  # (nq, 6, 2)
_PSI = p1_basis(QUAD_POINTS[:, 0], QUAD_POINTS[:, 1])  # (nq, 3)


@dataclass(frozen=True)
class FluidParams:
    """Fluid constants (cgs) and the pulsatile inflow amplitude."""

    rho: float = 1.0
    nu: float = 0.04
    sigma0: float = 30.0
    inflow_amplitude: float = 30.0
    body_force: Callable | None = None
    pulsatile: bool = True

    def __post_init__(self):
        for name in ("rho", "nu", "sigma0"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be positive")

    def inflow(self, y, t, b):
        """Inlet profile ``A (1 - y^2/b^2) sin^2(pi t)`` (time factor dropped if not pulsatile)."""
        s = math.sin(math.pi * t) ** 2 if self.pulsatile else 1.0
        return self.inflow_amplitude * (1.0 - np.square(y) / b**2) * s


# ---------------------------------------------------------------------------
# function space


@functools.lru_cache(maxsize=16)
def _pattern(nv: int, n2: int, tri_key: bytes, shape: tuple):
    """CSC sparsity of the saddle matrix and the scatter map from element entries."""
    tris = np.frombuffer(tri_key, dtype=np.int64).reshape(shape)
    edges_of = _edge_dofs(tris)
    dofs = np.hstack([tris, nv + edges_of])
    n = 2 * n2 + nv
    ne = len(tris)
    rows, cols = [], []
    ra = np.repeat(dofs, 6, axis=1)
    ca = np.tile(dofs, (1, 6))
    for c in range(2):
        rows.append(ra + c * n2)
        cols.append(ca + c * n2)
    pr = np.repeat(tris, 6, axis=1) + 2 * n2  # (ne, 18): pressure x velocity
    vc = np.tile(dofs, (1, 3))
    for c in range(2):
        rows.append(pr)
        cols.append(vc + c * n2)
        rows.append(vc + c * n2)
        cols.append(pr)
    rows = np.concatenate([r.reshape(-1) for r in rows])
    cols = np.concatenate([c.reshape(-1) for c in cols])
    keys = cols.astype(np.int64) * n + rows
    uniq, inv = np.unique(keys, return_inverse=True)
    indices = (uniq % n).astype(np.int32)
    colidx = uniq // n
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.add.at(indptr, colidx + 1, 1)
    indptr = np.cumsum(indptr).astype(np.int32)
    sizes = {"vv": 2 * ne * 36, "pv": ne * 18}
    return dofs, indices, indptr, inv.astype(np.int64), sizes, colidx


def _edge_dofs(tris):
    local = np.array([[0, 1], [1, 2], [2, 0]])
    all_edges = np.sort(tris[:, local].reshape(-1, 2), axis=1)
    _, inverse = np.unique(all_edges, axis=0, return_inverse=True)
    return inverse.reshape(-1, 3)


class TaylorHoodSpace:
    """P2-P1 discrete space on one mesh, with the static element matrices."""

    def __init__(self, mesh: ChannelMesh):
        self.mesh = mesh
        tris = np.ascontiguousarray(mesh.triangles, dtype=np.int64)
        self.nv = mesh.num_nodes
        edges = mesh.edges
        self.n2 = self.nv + len(edges)
        self.n = 2 * self.n2 + self.nv
        (self.dofs, self._indices, self._indptr, self._scatter, self._sizes, self._colidx) = _pattern(
            self.nv, self.n2, tris.tobytes(), tris.shape
        )
        self.coords = np.vstack([mesh.nodes, 0.5 * (mesh.nodes[edges[:, 0]] + mesh.nodes[edges[:, 1]])])

        p = mesh.nodes[tris]
        J = np.stack([p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]], axis=2)  # columns = d x / d(xi, eta)
        self.detJ = J[:, 0, 0] * J[:, 1, 1] - J[:, 0, 1] * J[:, 1, 0]
        if np.any(self.detJ <= 0):
            raise DomainError("mesh has non-positively oriented triangles")
        invJ = np.empty_like(J)
        invJ[:, 0, 0] = J[:, 1, 1]
        invJ[:, 1, 1] = J[:, 0, 0]
        invJ[:, 0, 1] = -J[:, 0, 1]
        invJ[:, 1, 0] = -J[:, 1, 0]
        invJ /= self.detJ[:, None, None]
        self.invJ = invJ
        self.grads = np.einsum("qak,ekj->eqaj", _DN, invJ)  # (ne, nq, 6, 2)
        self.qweights = self.detJ[:, None] * QUAD_WEIGHTS[None, :]

        self.mass_local = np.einsum("eq,qa,qb->eab", self.qweights, _N, _N)
        self.stiff_local = np.einsum("eq,eqak,eqbk->eab", self.qweights, self.grads, self.grads)
        # div_local[c][e, i, a] = int psi_i d phi_a / d x_c
        self.div_local = [np.einsum("eq,qi,eqa->eia", self.qweights, _PSI, self.grads[..., c]) for c in range(2)]

        self._dirichlet = self._boundary_dofs()

    # -- boundary bookkeeping ------------------------------------------------
    def _facet_p2_nodes(self, tag):
        facets = self.mesh.facets_tagged(tag)
        if len(facets) == 0:
            return np.zeros(0, dtype=np.int64)
        mids = _edge_lookup(self.mesh.edges, facets) + self.nv
        return np.unique(np.concatenate([facets.ravel(), mids]))

    def _boundary_dofs(self):
        noslip = np.union1d(self._facet_p2_nodes("wall"), self._facet_p2_nodes("gamma"))
        inflow = np.setdiff1d(self._facet_p2_nodes("inflow"), noslip)
        return {"noslip": noslip, "inflow": inflow}

    @property
    def noslip_nodes(self):
        return self._dirichlet["noslip"]

    @property
    def inflow_nodes(self):
        return self._dirichlet["inflow"]

    @cached_property
    def dirichlet_dofs(self):
        nodes = np.concatenate([self.noslip_nodes, self.inflow_nodes])
        return np.concatenate([nodes, nodes + self.n2])

    def dirichlet_values(self, t: float, params: FluidParams):
        vals = np.zeros(len(self.dirichlet_dofs))
        k = len(self.noslip_nodes)
        m = len(self.inflow_nodes)
        y = self.coords[self.inflow_nodes, 1]
        vals[k : k + m] = params.inflow(y, t, self.mesh.shape.b)
        return vals

    # -- global matrices -----------------------------------------------------
    def _assemble_scalar(self, local):
        r = np.repeat(self.dofs, 6, axis=1).ravel()
        c = np.tile(self.dofs, (1, 6)).ravel()
        return sp.csr_matrix((local.ravel(), (r, c)), shape=(self.n2, self.n2))

    @cached_property
    def mass_matrix(self):
        """Scalar P2 mass matrix (one velocity component)."""
        return self._assemble_scalar(self.mass_local)

    @cached_property
    def stiffness_matrix(self):
        return self._assemble_scalar(self.stiff_local)

    @cached_property
    def divergence_matrix(self):
        """``B[i, (c, a)] = int psi_i d phi_a / dx_c``, shape (nv, 2 n2)."""
        r = np.repeat(self.mesh.triangles, 6, axis=1).ravel()
        blocks = []
        for c in range(2):
            col = np.tile(self.dofs, (1, 3)).ravel()
            blocks.append(sp.csr_matrix((self.div_local[c].ravel(), (r, col)), shape=(self.nv, self.n2)))
        return sp.hstack(blocks).tocsr()

    def convection_local(self, vel):
        vx = vel[0][self.dofs]
        vy = vel[1][self.dofs]
        return kernels.convection_local(_N, self.grads, self.qweights, vx, vy)

    def system(self, dt, params: FluidParams, vel_old=None, skew=False, steady=False):
        """Saddle-point matrix in CSC form, Dirichlet rows not yet applied."""
        rho, nu = params.rho, params.nu
        A = rho * nu * self.stiff_local
        if not steady:
            A = A + (rho / dt) * self.mass_local
        if vel_old is not None:
            C = self.convection_local(vel_old)
            if skew:
                C = 0.5 * (C - np.swapaxes(C, 1, 2))
            A = A + rho * C
        vv = np.concatenate([A.ravel(), A.ravel()])
        pv = []
        for c in range(2):
            Bc = self.div_local[c].ravel()
            pv += [-Bc, -Bc]
        vals = np.concatenate([vv] + pv)
        data = np.bincount(self._scatter, weights=vals, minlength=len(self._indices))
        return sp.csc_matrix((data, self._indices, self._indptr), shape=(self.n, self.n))

    @cached_property
    def _dirichlet_mask(self):
        is_dir = np.zeros(self.n, dtype=bool)
        is_dir[self.dirichlet_dofs] = True
        rows = self._indices
        in_row = is_dir[rows]
        diag = in_row & (rows == self._colidx)
        return in_row, diag

    def apply_dirichlet(self, K, rhs, t, params):
        in_row, diag = self._dirichlet_mask
        K.data[in_row] = 0.0
        K.data[diag] = 1.0
        rhs[self.dirichlet_dofs] = self.dirichlet_values(t, params)
        return K, rhs

    # -- norms and evaluation ------------------------------------------------
    def l2_sq(self, vel):
        """Squared L2 norm of a (2, n2) velocity array."""
        return float(sum(vel[c] @ (self.mass_matrix @ vel[c]) for c in range(2)))

    def evaluate(self, vel, points, tol=1e-10, hint=None):
        """Point values of a P2 field (shape (k, n2)) at ``points``; raises on misses."""
        pts = np.atleast_2d(points)
        if hint is None:
            hint = np.full(len(pts), -1, dtype=np.int64)
        owner, bary = kernels.locate_points(self.mesh.nodes, self.mesh.triangles, pts, hint, tol)
        if np.any(owner < 0):
            bad = pts[owner < 0][0]
            raise TransferError(f"point ({bad[0]:.6g}, {bad[1]:.6g}) not inside mesh")
        xi, eta = bary[:, 1], bary[:, 2]
        phi = p2_basis(xi, eta)
        vals = np.asarray(vel)[..., self.dofs[owner]]  # (k, m, 6)
        return np.einsum("...ma,ma->...m", vals, phi)


def _edge_lookup(edges, pairs):
    pairs = np.sort(pairs, axis=1)
    n = edges.max() + 1
    keys = edges[:, 0] * n + edges[:, 1]
    order = np.argsort(keys)
    pos = np.searchsorted(keys[order], pairs[:, 0] * n + pairs[:, 1])
    return order[pos]


@functools.lru_cache(maxsize=8)
def _space_cached(mesh_id, mesh):
    return TaylorHoodSpace(mesh)


def space_for(mesh: ChannelMesh) -> TaylorHoodSpace:
    return _space_cached(id(mesh), mesh)


# ---------------------------------------------------------------------------
# flow fields


@dataclass(frozen=True, eq=False)
class FlowField:
    """Velocity (2, n2) and pressure (nv,) coefficients on a Taylor-Hood space."""

    space: TaylorHoodSpace
    velocity: np.ndarray
    pressure: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        if self.velocity.shape != (2, self.space.n2) or self.pressure.shape != (self.space.nv,):
            raise DomainError("coefficient counts do not match the mesh")

    @property
    def mesh(self):
        return self.space.mesh

    @classmethod
    def zeros(cls, space, time=0.0):
        return cls(space, np.zeros((2, space.n2)), np.zeros(space.nv), time)

    @classmethod
    def interpolate(cls, space, fv, fp=None, time=0.0):
        """Nodal interpolation of callables ``fv(x, y) -> (vx, vy)`` and ``fp(x, y)``."""
        x, y = space.coords[:, 0], space.coords[:, 1]
        vel = np.array(np.broadcast_arrays(*fv(x, y)), dtype=float)
        xv, yv = space.mesh.nodes[:, 0], space.mesh.nodes[:, 1]
        pres = np.zeros(space.nv) if fp is None else np.broadcast_to(fp(xv, yv), (space.nv,)).astype(float)
        return cls(space, vel, pres, time)

    def vector(self):
        return np.concatenate([self.velocity[0], self.velocity[1], self.pressure])

    def divergence_residual(self) -> float:
        return float(np.linalg.norm(self.space.divergence_matrix @ self.velocity.ravel()))

    def l2_norm(self) -> float:
        return math.sqrt(self.space.l2_sq(self.velocity))


def _unpack(space, x, t):
    n2 = space.n2
    return FlowField(space, np.vstack([x[:n2], x[n2 : 2 * n2]]), x[2 * n2 :].copy(), t)


def _load(space, t, params, vel_old=None, dt=None):
    rhs = np.zeros(space.n)
    if vel_old is not None:
        M = space.mass_matrix
        rhs[: space.n2] = (params.rho / dt) * (M @ vel_old[0])
        rhs[space.n2 : 2 * space.n2] = (params.rho / dt) * (M @ vel_old[1])
    if params.body_force is not None:
        fx, fy = params.body_force(t, space.coords[:, 0], space.coords[:, 1])
        M = space.mass_matrix
        rhs[: space.n2] += M @ np.broadcast_to(fx, (space.n2,))
        rhs[space.n2 : 2 * space.n2] += M @ np.broadcast_to(fy, (space.n2,))
    return rhs


def _solve(K, rhs, step=None, t=None):
    try:
        lu = spla.splu(K, permc_spec="COLAMD")
        x = lu.solve(rhs)
    except RuntimeError as exc:  # singular factor
        raise StepFailureError(f"saddle-point solve failed: {exc}", step=step, time=t) from exc
    if not np.all(np.isfinite(x)):
        raise StepFailureError("non-finite solution", step=step, time=t)
    res = np.linalg.norm(K @ x - rhs)
    scale = max(np.linalg.norm(rhs), 1e-300)
    if res > 1e-10 * scale and res > 1e-13:
        # one step of iterative refinement before giving up
        x = x + lu.solve(rhs - K @ x)
        res = np.linalg.norm(K @ x - rhs)
        if res > 1e-10 * scale and res > 1e-13:
            raise StepFailureError(f"linear residual {res:.3e} above tolerance", step=step, time=t)
    return x


def ns_time_step(
    prev: FlowField,
    t: float,
    dt: float,
    params: FluidParams,
    skew: bool = False,
    step: int | None = None,
) -> FlowField:
    """One semi-implicit backward-Euler step to time ``t`` on ``prev``'s mesh."""
    if dt <= 0:
        raise DomainError("dt must be positive")
    space = prev.space
    K = space.system(dt, params, vel_old=prev.velocity, skew=skew)
    rhs = _load(space, t, params, prev.velocity, dt)
    K, rhs = space.apply_dirichlet(K, rhs, t, params)
    return _unpack(space, _solve(K, rhs, step, t), t)


def stokes_solve(space: TaylorHoodSpace, t: float, params: FluidParams) -> FlowField:
    """Steady Stokes flow driven by the inflow at time ``t``."""
    K = space.system(1.0, params, steady=True)
    rhs = _load(space, t, params)
    K, rhs = space.apply_dirichlet(K, rhs, t, params)
    return _unpack(space, _solve(K, rhs, t=t), t)


# ---------------------------------------------------------------------------
# wall shear stress and reaction


@dataclass(frozen=True)
class WSSValue:
    vector: np.ndarray

    @property
    def magnitude(self) -> float:
        return float(np.hypot(self.vector[0], self.vector[1]))


@functools.lru_cache(maxsize=16)
def _gamma_geometry(space_id, space):
    mesh = space.mesh
    facets = mesh.facets_tagged("gamma")
    if len(facets) == 0:
        raise DomainError("mesh has no growing-wall facets")
    tris = mesh.triangles
    edge_ids = _edge_lookup(mesh.edges, facets)
    owner = np.full(len(mesh.edges), -1, dtype=np.int64)
    owner[mesh.triangle_edges.ravel()] = np.repeat(np.arange(len(tris)), 3)
    tri = owner[edge_ids]
    p = mesh.nodes[facets[:, 0]]
    q = mesh.nodes[facets[:, 1]]
    length = np.linalg.norm(q - p, axis=1)
    n = np.column_stack([q[:, 1] - p[:, 1], -(q[:, 0] - p[:, 0])]) / length[:, None]
    centroid = mesh.nodes[tris[tri]].mean(axis=1)
    flip = np.einsum("ij,ij->i", n, 0.5 * (p + q) - centroid) < 0
    n[flip] *= -1
    # reference coordinates of the Gauss points inside the owning triangle
    x0 = mesh.nodes[tris[tri, 0]]
    pts = p[:, None, :] + GAUSS2[None, :, None] * (q - p)[:, None, :]  # (nf, 2, 2)
    ref = np.einsum("fij,fgj->fgi", space.invJ[tri], pts - x0[:, None, :])
    dphi = p2_basis_grad(ref[..., 0], ref[..., 1])  # (nf, 2, 6, 2)
    grads = np.einsum("fgak,fkj->fgaj", dphi, space.invJ[tri])
    return tri, n, length, grads


def wall_shear_stress(field_: FlowField, params: FluidParams) -> WSSValue:
    """Tangential viscous traction integrated over the growing wall, scaled by 1/sigma0."""
    space = field_.space
    tri, n, length, grads = _gamma_geometry(id(space), space)
    coef = field_.velocity[:, space.dofs[tri]]  # (2, nf, 6)
    G = np.einsum("cfa,fgaj->fgcj", coef, grads)  # dv_c/dx_j at Gauss points
    S = G + np.swapaxes(G, 2, 3)
    Sn = np.einsum("fgij,fj->fgi", S, n)
    tang = Sn - np.einsum("fgi,fi->fg", Sn, n)[..., None] * n[:, None, :]
    total = 0.5 * np.einsum("f,fgi->i", length, tang)
    return WSSValue(params.rho * params.nu * total / params.sigma0)


def plaque_reaction(u: float, wss) -> float:
    """Growth rate ``1 / ((1 + u) (1 + |sigma_WSS|^2))``."""
    if u < 0:
        raise DomainError("concentration must be nonnegative")
    mag = wss.magnitude if isinstance(wss, WSSValue) else float(wss)
    return 1.0 / ((1.0 + u) * (1.0 + mag * mag))


# ---------------------------------------------------------------------------
# transfer between meshes


def transfer_field(old: FlowField, new_mesh: ChannelMesh, tol: float = 1e-12) -> FlowField:
    """Interpolate ``old`` at the nodes of ``new_mesh``.

    Nodes that fall outside the old domain are first projected vertically
    onto the old top wall.  Pressure is evaluated with the P1 interpolant.
    """
    new_space = space_for(new_mesh)
    if new_mesh is old.mesh:
        return FlowField(new_space, old.velocity.copy(), old.pressure.copy(), old.time)
    old_mesh = old.mesh
    pts = new_space.coords.copy()
    hint = _node_hints(new_space, old.space)
    owner, bary = kernels.locate_points(old_mesh.nodes, old_mesh.triangles, pts, hint, tol)
    miss = np.flatnonzero(owner < 0)
    if len(miss):
        pts[miss, 1] = np.minimum(pts[miss, 1], _old_top(old_mesh, pts[miss, 0]))
        o2, b2 = kernels.locate_points(old_mesh.nodes, old_mesh.triangles, pts[miss], hint[miss], 1e-9)
        if np.any(o2 < 0):
            bad = pts[miss][o2 < 0][0]
            raise TransferError(f"new node ({bad[0]:.6g}, {bad[1]:.6g}) not found in old mesh")
        owner[miss], bary[miss] = o2, b2
    phi = p2_basis(bary[:, 1], bary[:, 2])
    vel = np.einsum("cma,ma->cm", old.velocity[:, old.space.dofs[owner]], phi)
    vo = owner[: new_space.nv]
    psi = bary[: new_space.nv]
    pres = np.einsum("ma,ma->m", old.pressure[old_mesh.triangles[vo]], psi)
    return FlowField(new_space, vel, pres, old.time)


def _node_hints(new_space, old_space):
    """Owning-triangle guesses: same-index triangle when topologies agree."""
    hint = np.full(new_space.n2, -1, dtype=np.int64)
    if new_space.mesh.triangles is old_space.mesh.triangles or (
        new_space.mesh.triangles.shape == old_space.mesh.triangles.shape
        and np.array_equal(new_space.mesh.triangles, old_space.mesh.triangles)
    ):
        hint[new_space.dofs.ravel()] = np.repeat(np.arange(len(new_space.dofs)), 6)
    return hint


def _old_top(mesh, x):
    gam = mesh.facets_tagged("gamma")
    nodes = np.unique(gam)
    xs, ys = mesh.nodes[nodes, 0], mesh.nodes[nodes, 1]
    order = np.argsort(xs)
    return np.interp(x, xs[order], ys[order]) - 1e-12


# ---------------------------------------------------------------------------
# ASCII dump


def dump_field(f: FlowField, path, mesh_ref: str) -> None:
    lines = ["field v1", str(mesh_ref), f"velocity {f.space.n2}"]
    lines += [f"{vx:.17g} {vy:.17g}" for vx, vy in f.velocity.T]
    lines.append(f"pressure {f.space.nv}")
    lines += [f"{p:.17g}" for p in f.pressure]
    Path(path).write_text("\n".join(lines) + "\n")


def load_field(path, space: TaylorHoodSpace) -> tuple[FlowField, str]:
    lines = Path(path).read_text().split("\n")
    if lines[0].strip() != "field v1":
        raise DomainError(f"{path}: not a 'field v1' file")
    mesh_ref = lines[1].strip()
    key, n = lines[2].split()
    n = int(n)
    vel = np.array([ln.split() for ln in lines[3 : 3 + n]], dtype=float).T
    key, m = lines[3 + n].split()
    m = int(m)
    pres = np.array(lines[4 + n : 4 + n + m], dtype=float)
    return FlowField(space, vel, pres), mesh_ref
