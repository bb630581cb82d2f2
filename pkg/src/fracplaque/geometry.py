"""Channel geometry with a growing plaque on the top wall, and its triangulation.

The domain is ``{(x, y): |x| < a, -b < y < b - gamma(u, x)}`` with
``gamma(u, x) = u * exp(-x**2)``.  Meshes are built from a structured
triangulation of the reference rectangle ``[-a, a] x [0, 1]`` that is
red-green refined along the top edge and then mapped onto the physical
domain column by column.  The topology depends only on the refinement
parameters, never on ``u``, so successive meshes of a growing plaque share
node and triangle numbering.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

from .errors import DomainError, GeometryError

TAGS = ("inflow", "outflow", "wall", "gamma")
INFLOW, OUTFLOW, WALL, GAMMA = range(4)


@dataclass(frozen=True)
class ChannelShape:
    """Half-length ``a`` and half-height ``b`` of the channel, in cm."""

    a: float = 5.0
    b: float = 2.0

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0):
            raise GeometryError(f"channel half-sizes must be positive, got a={self.a}, b={self.b}")

    def height(self, u, x):
        return shape_height(u, x)

    def top(self, u, x):
        """y-coordinate of the top wall at ``x``."""
        return self.b - shape_height(u, x)

    def area(self, u: float) -> float:
        """Exact area of the domain (closed form of the Gaussian integral)."""
        return 4.0 * self.a * self.b - u * math.sqrt(math.pi) * math.erf(self.a)

    def check(self, u: float) -> None:
        if u < 0:
            raise GeometryError(f"plaque concentration must be nonnegative, got u={u}")
        if u >= self.b:
            raise GeometryError(f"u={u} closes the channel (need u < b={self.b})")


def shape_height(u, x):
    """Plaque thickness ``u * exp(-x^2)`` in cm."""
    if np.any(np.asarray(u) < 0):
        raise DomainError("shape_height needs u >= 0")
    return u * np.exp(-np.square(x))


@dataclass(frozen=True, eq=False)
class ChannelMesh:
    """Conforming straight-edged triangulation of the channel at concentration ``u``.

    ``facets`` holds boundary edges as node pairs and ``facet_tags`` an index
    into :data:`TAGS` for each of them.
    """

    nodes: np.ndarray
    triangles: np.ndarray
    facets: np.ndarray
    facet_tags: np.ndarray
    u: float = 0.0
    shape: ChannelShape = field(default_factory=ChannelShape)
    level: int = 2
    grid: tuple = ()

    @property
    def num_nodes(self) -> int:
        return len(self.nodes)

    @property
    def num_triangles(self) -> int:
        return len(self.triangles)

    @cached_property
    def areas(self) -> np.ndarray:
        p = self.nodes[self.triangles]
        d1 = p[:, 1] - p[:, 0]
        d2 = p[:, 2] - p[:, 0]
        return 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])

    @property
    def area(self) -> float:
        return float(self.areas.sum())

    @cached_property
    def diameters(self) -> np.ndarray:
        p = self.nodes[self.triangles]
        lens = np.stack(
            [np.linalg.norm(p[:, i] - p[:, (i + 1) % 3], axis=1) for i in range(3)], axis=1
        )
        return lens.max(axis=1)

    @cached_property
    def edges(self) -> np.ndarray:
        """Unique undirected edges, sorted node pairs."""
        return _edge_topology(self.triangles)[0]

    @cached_property
    def triangle_edges(self) -> np.ndarray:
        """Edge index of local edges (0,1), (1,2), (2,0) for each triangle."""
        return _edge_topology(self.triangles)[1]

    def facets_tagged(self, tag: str) -> np.ndarray:
        return self.facets[self.facet_tags == TAGS.index(tag)]

    def boundary_nodes(self, tag: str) -> np.ndarray:
        return np.unique(self.facets_tagged(tag))

    @cached_property
    def gamma_triangles(self) -> np.ndarray:
        """Indices of triangles having a facet on the growing wall."""
        keys = {tuple(sorted(f)) for f in self.facets_tagged("gamma").tolist()}
        tri = self.triangles
        hits = [
            t
            for t in range(len(tri))
            if any(tuple(sorted((tri[t, i], tri[t, (i + 1) % 3]))) in keys for i in range(3))
        ]
        return np.asarray(hits, dtype=np.int64)

    def euler_characteristic(self) -> int:
        return self.num_nodes - len(self.edges) + self.num_triangles


def _edge_topology(triangles):
    local = np.array([[0, 1], [1, 2], [2, 0]])
    all_edges = np.sort(triangles[:, local].reshape(-1, 2), axis=1)
    edges, inverse = np.unique(all_edges, axis=0, return_inverse=True)
    return edges, inverse.reshape(-1, 3)


# ---------------------------------------------------------------------------
# reference-domain topology


@dataclass(frozen=True)
class _Template:
    ref: np.ndarray  # (n, 2) reference coordinates (x, eta), eta in [0, 1]
    triangles: np.ndarray
    facets: np.ndarray
    facet_tags: np.ndarray


def _structured(nx: int, ny: int, a: float):
    xs = np.linspace(-a, a, nx + 1)
    etas = np.linspace(0.0, 1.0, ny + 1)
    ref = np.array([(x, e) for e in etas for x in xs])
    ref[:, 1] = np.repeat(etas, nx + 1)  # keep exact 0.0 / 1.0 rows

    def idx(i, k):
        return k * (nx + 1) + i

    tris = []
    for k in range(ny):
        for i in range(nx):
            bl, br, tl, tr = idx(i, k), idx(i + 1, k), idx(i, k + 1), idx(i + 1, k + 1)
            # diagonals mirror about x = 0 so the mesh is left-right symmetric
            if i < nx // 2:
                tris += [(bl, br, tl), (br, tr, tl)]
            else:
                tris += [(bl, br, tr), (bl, tr, tl)]
    return ref, np.array(tris, dtype=np.int64)


def _refine_top(ref, tris):
    """One red-green pass on triangles with an edge on eta = 1."""
    top = np.isclose(ref[:, 1], 1.0, rtol=0, atol=1e-14)
    marked = set()
    for t in tris:
        es = [(min(t[i], t[(i + 1) % 3]), max(t[i], t[(i + 1) % 3])) for i in range(3)]
        if any(top[p] and top[q] for p, q in es):
            marked.update(es)
    # closure: two marked edges force red refinement
    changed = True
    while changed:
        changed = False
        for t in tris:
            es = [(min(t[i], t[(i + 1) % 3]), max(t[i], t[(i + 1) % 3])) for i in range(3)]
            n = sum(e in marked for e in es)
            if n == 2:
                marked.update(es)
                changed = True

    ref = list(map(tuple, ref))
    mid = {}
    for e in sorted(marked):
        mid[e] = len(ref)
        p, q = ref[e[0]], ref[e[1]]
        eta = 1.0 if (p[1] == 1.0 and q[1] == 1.0) else 0.5 * (p[1] + q[1])
        ref.append((0.5 * (p[0] + q[0]), eta))

    out = []
    for t in tris:
        v = [int(t[0]), int(t[1]), int(t[2])]
        es = [(min(v[i], v[(i + 1) % 3]), max(v[i], v[(i + 1) % 3])) for i in range(3)]
        hit = [e in marked for e in es]
        if all(hit):
            m01, m12, m20 = (mid[e] for e in es)
            out += [(v[0], m01, m20), (m01, v[1], m12), (m20, m12, v[2]), (m01, m12, m20)]
        elif any(hit):
            i = hit.index(True)
            vi, vj, vk = v[i], v[(i + 1) % 3], v[(i + 2) % 3]
            m = mid[es[i]]
            out += [(vi, m, vk), (m, vj, vk)]
        else:
            out.append(tuple(v))
    return np.array(ref), np.array(out, dtype=np.int64)


def _boundary_facets(ref, tris, a):
    edges, tri_edges = _edge_topology(tris)
    counts = np.bincount(tri_edges.ravel(), minlength=len(edges))
    facets = edges[counts == 1]
    p, q = ref[facets[:, 0]], ref[facets[:, 1]]
    tags = np.full(len(facets), GAMMA, dtype=np.int64)
    tags[(p[:, 1] == 0.0) & (q[:, 1] == 0.0)] = WALL
    tags[np.isclose(p[:, 0], -a) & np.isclose(q[:, 0], -a)] = INFLOW
    tags[np.isclose(p[:, 0], a) & np.isclose(q[:, 0], a)] = OUTFLOW
    on_top = (p[:, 1] == 1.0) & (q[:, 1] == 1.0)
    if not np.all(on_top[tags == GAMMA]):
        raise GeometryError("untagged boundary facet found while building template")
    return facets, tags


@functools.lru_cache(maxsize=32)
def _template(nx: int, ny: int, level: int, a: float) -> _Template:
    ref, tris = _structured(nx, ny, a)
    for _ in range(level):
        ref, tris = _refine_top(ref, tris)
    facets, tags = _boundary_facets(ref, tris, a)
    for arr in (ref, tris, facets, tags):
        arr.setflags(write=False)
    return _Template(ref, tris, facets, tags)


def _grid_search(shape, target_elements, level, spread):
    best = None
    ratio = shape.a / shape.b
    for ny in range(1, 400):
        guess = ny * ratio
        lo = max(2, 2 * math.floor(guess / (2 * spread)))
        hi = max(2, 2 * math.ceil(guess * spread / 2))
        for nx in range(lo, hi + 1, 2):
            if best is not None and 2 * nx * ny - target_elements > best[0][0]:
                break  # refinement only adds elements
            n = len(_template(nx, ny, level, shape.a).triangles)
            cost = (abs(n - target_elements), abs(math.log(nx / guess)))
            if best is None or cost < best[0]:
                best = (cost, nx, ny)
        if 2 * lo * ny > 2 * target_elements:
            break
    return best


def grid_for_target(shape: ChannelShape, target_elements: int, level: int = 2):
    """Pick ``(nx, ny)`` with near-square cells whose refined count is closest to the target.

    Elongated cells (aspect up to 3) are tried only when no near-square grid
    lands within 20% of the target.
    """
    if target_elements < 8:
        raise DomainError("target_elements must be at least 8")
    best = _grid_search(shape, target_elements, level, 1.0)
    if best[0][0] > 0.2 * target_elements:
        best = _grid_search(shape, target_elements, level, 3.0)
    if best[0][0] > 0.2 * target_elements:
        # the top-edge refinement alone already exceeds small targets
        raise DomainError(f"no grid at level {level} within 20% of {target_elements} elements; lower the level")
    return best[1], best[2]


def build_channel_mesh(
    shape: ChannelShape,
    u: float,
    target_elements: int = 210,
    level: int = 2,
    grid: tuple | None = None,
) -> ChannelMesh:
    """Triangulate the channel at plaque concentration ``u``.

    ``grid=(nx, ny)`` bypasses the target search; meshes built with the same
    grid and level share topology for any ``u``.
    """
    shape.check(u)
    if level < 0:
        raise DomainError("refinement level must be >= 0")
    nx, ny = grid if grid is not None else grid_for_target(shape, target_elements, level)
    tpl = _template(int(nx), int(ny), int(level), shape.a)
    x = tpl.ref[:, 0]
    eta = tpl.ref[:, 1]
    top = shape.top(u, x)
    y = -shape.b + eta * (top + shape.b)
    y = np.where(eta == 1.0, top, y)
    nodes = np.column_stack([x, y])
    mesh = ChannelMesh(
        nodes=nodes,
        triangles=tpl.triangles,
        facets=tpl.facets,
        facet_tags=tpl.facet_tags,
        u=float(u),
        shape=shape,
        level=level,
        grid=(int(nx), int(ny)),
    )
    if np.any(mesh.areas <= 0):
        raise GeometryError(f"mesh at u={u} has inverted triangles")
    return mesh


def polygon_area(mesh: ChannelMesh) -> float:
    """Area of the straight-edged domain, from the top-wall trapezoid rule."""
    sh = mesh.shape
    gam = mesh.facets_tagged("gamma")
    p, q = mesh.nodes[gam[:, 0]], mesh.nodes[gam[:, 1]]
    dx = np.abs(q[:, 0] - p[:, 0])
    removed = np.sum(0.5 * dx * ((sh.b - p[:, 1]) + (sh.b - q[:, 1])))
    return 4.0 * sh.a * sh.b - removed


# ---------------------------------------------------------------------------
# ASCII dump


def dump_mesh(mesh: ChannelMesh, path) -> None:
    lines = ["mesh v1", f"nodes {mesh.num_nodes}"]
    lines += [f"{x:.17g} {y:.17g}" for x, y in mesh.nodes]
    lines.append(f"triangles {mesh.num_triangles}")
    lines += [f"{i} {j} {k}" for i, j, k in mesh.triangles]
    lines.append(f"facets {len(mesh.facets)}")
    lines += [f"{i} {j} {TAGS[t]}" for (i, j), t in zip(mesh.facets, mesh.facet_tags)]
    Path(path).write_text("\n".join(lines) + "\n")


def load_mesh(path, shape: ChannelShape | None = None, u: float = 0.0) -> ChannelMesh:
    lines = Path(path).read_text().split("\n")
    if lines[0].strip() != "mesh v1":
        raise DomainError(f"{path}: not a 'mesh v1' file")
    pos = 1

    def section(name):
        nonlocal pos
        key, count = lines[pos].split()
        if key != name:
            raise DomainError(f"{path}: expected '{name}' at line {pos + 1}, got '{key}'")
        body = lines[pos + 1 : pos + 1 + int(count)]
        pos += 1 + int(count)
        return [ln.split() for ln in body]

    nodes = np.array(section("nodes"), dtype=float).reshape(-1, 2)
    tris = np.array(section("triangles"), dtype=np.int64).reshape(-1, 3)
    rows = section("facets")
    facets = np.array([r[:2] for r in rows], dtype=np.int64).reshape(-1, 2)
    tags = np.array([TAGS.index(r[2]) for r in rows], dtype=np.int64)
    return ChannelMesh(nodes, tris, facets, tags, u=u, shape=shape or ChannelShape())
