"""Oriented cell complexes with boundary, cochains, and the exact Green formula.

Conventions (fixed once, used everywhere downstream):

* ``D0`` rows are (head +1, tail -1); ``D1 @ D0 = 0`` holds in integer
  arithmetic for dim-2 complexes.
* induced boundary orientation is outward: in 1D the sign of a boundary
  vertex is its incidence sign in the unique adjacent edge; in 2D the sign of
  a boundary edge is its sign in the unique adjacent (counterclockwise) face.
* the twisted differential brackets against the endpoint-averaged gauge
  parameter, ``(d_A xi)_e = (d xi)_e + [A_e, (xi_head + xi_tail)/2]``.
* masses are diagonal (lumped): a primal k-cochain carries ``|*s|/|s|`` per
  cell, a dual-type field carries ``|s|/|*s|``.

The summation-by-parts identity of :func:`green_pairing` is an algebraic
rearrangement of ``sum_e tr(E_e (d_A xi)_e)`` by vertex: the interior part is
the (twisted) divergence, the boundary-vertex part is re-expressed through
per-boundary-cell densities.  On a closed 2D boundary loop the density
re-expression solves a cyclic midpoint system, which is invertible iff the
loop is odd; all builders produce odd boundary loops.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .algebra import LieAlgebra


class MeshError(ValueError):
    pass


# ---------------------------------------------------------------------------
# complex
# ---------------------------------------------------------------------------


@dataclass
class BoundaryInfo:
    """Boundary cells of a complex: ids, outward signs, adjacency."""

    vertex_ids: np.ndarray          # boundary vertex indices into the parent
    cell_ids: np.ndarray            # boundary (dim-1)-cell indices (1D: vertices, 2D: edges)
    signs: np.ndarray               # induced outward orientation per boundary cell
    cell_vertices: np.ndarray       # (ncells, dim) vertex ids per boundary cell
    components: np.ndarray          # boundary-component label per boundary cell
    adjacent_interior: np.ndarray   # 1D: unique adjacent edge per boundary vertex; 2D: unique face per boundary edge

    @property
    def n_cells(self) -> int:
        return len(self.cell_ids)

    @property
    def n_vertices(self) -> int:
        return len(self.vertex_ids)


@dataclass
class CellComplex:
    dim: int
    D0: np.ndarray                     # (n_edges, n_vertices), integer
    D1: Optional[np.ndarray] = None    # (n_faces, n_edges), integer, dim 2 only
    points: Optional[np.ndarray] = None
    volumes: dict = field(default_factory=dict)       # degree -> |cell|
    dual_volumes: dict = field(default_factory=dict)  # degree -> |*cell|
    name: str = "complex"

    def __post_init__(self):
        self.D0 = np.asarray(self.D0, dtype=int)
        if self.dim not in (1, 2):
            raise MeshError("dim must be 1 or 2")
        if self.dim == 2:
            if self.D1 is None:
                raise MeshError("dim-2 complex needs D1")
            self.D1 = np.asarray(self.D1, dtype=int)
            # float matmul is exact for these small integers and uses BLAS;
            # the integer path is prohibitively slow at moderate mesh sizes
            if np.any(self.D1.astype(float) @ self.D0.astype(float) != 0.0):
                raise MeshError("D1 @ D0 != 0")
        for k, v in self.volumes.items():
            if np.any(np.asarray(v) <= 0):
                raise MeshError(f"non-positive volume in degree {k}")
        for k, v in self.dual_volumes.items():
            if np.any(np.asarray(v) <= 0):
                raise MeshError(f"non-positive dual volume in degree {k}")
        self._build_boundary()
        self._build_components()

    # -- counts --

    @property
    def n_vertices(self) -> int:
        return self.D0.shape[1]

    @property
    def n_edges(self) -> int:
        return self.D0.shape[0]

    @property
    def n_faces(self) -> int:
        return 0 if self.D1 is None else self.D1.shape[0]

    def n_cells(self, degree: int) -> int:
        return {0: self.n_vertices, 1: self.n_edges, 2: self.n_faces}[degree]

    # -- boundary structure --

    def _build_boundary(self):
        if self.dim == 1:
            deg = np.abs(self.D0).sum(axis=0)
            bmask = deg == 1
            if np.any(deg == 0):
                raise MeshError("isolated vertex")
            ids = np.nonzero(bmask)[0]
            signs, adj, cellverts = [], [], []
            for v in ids:
                e = int(np.nonzero(self.D0[:, v])[0][0])
                signs.append(int(self.D0[e, v]))
                adj.append(e)
                cellverts.append([v])
            self.boundary = BoundaryInfo(
                vertex_ids=ids,
                cell_ids=ids.copy(),
                signs=np.asarray(signs, dtype=int),
                cell_vertices=np.asarray(cellverts, dtype=int).reshape(-1, 1),
                components=np.arange(len(ids)),
                adjacent_interior=np.asarray(adj, dtype=int),
            )
        else:
            counts = np.abs(self.D1).sum(axis=0)
            if np.any(counts > 2) or np.any(counts == 0):
                raise MeshError("each edge must bound one or two faces")
            bedges = np.nonzero(counts == 1)[0]
            signs, faces, cellverts = [], [], []
            for e in bedges:
                f = int(np.nonzero(self.D1[:, e])[0][0])
                signs.append(int(self.D1[f, e]))
                faces.append(f)
                head = int(np.nonzero(self.D0[e] == 1)[0][0])
                tail = int(np.nonzero(self.D0[e] == -1)[0][0])
                cellverts.append([tail, head])
            # interior edges must appear with opposite signs in their two faces
            for e in np.nonzero(counts == 2)[0]:
                if self.D1[:, e].sum() != 0:
                    raise MeshError("inconsistent face orientations at interior edge")
            bverts = np.unique(np.asarray(cellverts, dtype=int).ravel()) if len(cellverts) else np.zeros(0, int)
            comps = _edge_loop_components(np.asarray(cellverts, dtype=int)) if len(cellverts) else np.zeros(0, int)
            self.boundary = BoundaryInfo(
                vertex_ids=bverts,
                cell_ids=np.asarray(bedges, dtype=int),
                signs=np.asarray(signs, dtype=int),
                cell_vertices=np.asarray(cellverts, dtype=int).reshape(-1, 2),
                components=comps,
                adjacent_interior=np.asarray(faces, dtype=int),
            )
        mask = np.zeros(self.n_vertices, dtype=bool)
        mask[self.boundary.vertex_ids] = True
        self.boundary_vertex_mask = mask
        self.interior_vertex_ids = np.nonzero(~mask)[0]

    def _build_components(self):
        labels = -np.ones(self.n_vertices, dtype=int)
        adj = [[] for _ in range(self.n_vertices)]
        for e in range(self.n_edges):
            vs = np.nonzero(self.D0[e])[0]
            if len(vs) == 2:
                adj[vs[0]].append(vs[1])
                adj[vs[1]].append(vs[0])
        comp = 0
        for start in range(self.n_vertices):
            if labels[start] >= 0:
                continue
            stack = [start]
            labels[start] = comp
            while stack:
                v = stack.pop()
                for w in adj[v]:
                    if labels[w] < 0:
                        labels[w] = comp
                        stack.append(w)
            comp += 1
        self.vertex_components = labels
        self.n_components = comp

    @property
    def has_boundary(self) -> bool:
        return self.boundary.n_cells > 0

    def boundary_components_of_vertices(self) -> np.ndarray:
        """Boundary-component label per boundary vertex (aligned with vertex_ids)."""
        b = self.boundary
        out = np.zeros(b.n_vertices, dtype=int)
        where = {v: i for i, v in enumerate(b.vertex_ids)}
        for cell, comp in zip(b.cell_vertices, b.components):
            for v in cell:
                out[where[int(v)]] = comp
        return out

    # -- boundary complex (dim 2 only) --

    def boundary_complex(self) -> "CellComplex":
        """The boundary loop(s) as a 1D complex; edges keep parent orientation."""
        if self.dim != 2:
            raise MeshError("boundary_complex is defined for dim-2 complexes")
        b = self.boundary
        vmap = {int(v): i for i, v in enumerate(b.vertex_ids)}
        D0 = np.zeros((b.n_cells, b.n_vertices), dtype=int)
        for i, (tail, head) in enumerate(b.cell_vertices):
            D0[i, vmap[int(tail)]] = -1
            D0[i, vmap[int(head)]] = 1
        lengths = self.volumes[1][b.cell_ids]
        dualv = np.zeros(b.n_vertices)
        for i, (tail, head) in enumerate(b.cell_vertices):
            dualv[vmap[int(tail)]] += lengths[i] / 2
            dualv[vmap[int(head)]] += lengths[i] / 2
        pts = self.points[b.vertex_ids] if self.points is not None else None
        return CellComplex(
            dim=1,
            D0=D0,
            points=pts,
            volumes={0: np.ones(b.n_vertices), 1: lengths},
            dual_volumes={0: dualv, 1: np.ones(b.n_cells)},
            name=self.name + ".boundary",
        )


def _edge_loop_components(cell_vertices: np.ndarray) -> np.ndarray:
    n = len(cell_vertices)
    labels = -np.ones(n, dtype=int)
    vert_cells: dict = {}
    for i, vs in enumerate(cell_vertices):
        for v in vs:
            vert_cells.setdefault(int(v), []).append(i)
    comp = 0
    for start in range(n):
        if labels[start] >= 0:
            continue
        stack = [start]
        labels[start] = comp
        while stack:
            c = stack.pop()
            for v in cell_vertices[c]:
                for c2 in vert_cells[int(v)]:
                    if labels[c2] < 0:
                        labels[c2] = comp
                        stack.append(c2)
        comp += 1
    return labels


# ---------------------------------------------------------------------------
# cochains
# ---------------------------------------------------------------------------

VALUE_SPACES = ("scalar", "algebra", "dual")


@dataclass
class Cochain:
    """Degree-k field on k-cells; data has shape (n_cells(k), value dim)."""

    complex: CellComplex
    degree: int
    value_space: str
    data: np.ndarray
    algebra: Optional[LieAlgebra] = None

    def __post_init__(self):
        if self.value_space not in VALUE_SPACES:
            raise MeshError(f"unknown value space {self.value_space!r}")
        if self.value_space != "scalar" and self.algebra is None:
            raise MeshError("algebra-valued cochain needs an algebra")
        if not 0 <= self.degree <= self.complex.dim:
            raise MeshError("degree outside complex dimension")
        vd = 1 if self.value_space == "scalar" else self.algebra.dim
        self.data = np.asarray(self.data, dtype=float).reshape(self.complex.n_cells(self.degree), vd)

    @property
    def value_dim(self) -> int:
        return self.data.shape[1]

    def copy(self) -> "Cochain":
        return Cochain(self.complex, self.degree, self.value_space, self.data.copy(), self.algebra)

    def zeros_like(self) -> "Cochain":
        return Cochain(self.complex, self.degree, self.value_space, np.zeros_like(self.data), self.algebra)

    def _compat(self, other: "Cochain"):
        if self.complex is not other.complex or self.degree != other.degree \
                or self.value_space != other.value_space:
            raise MeshError("cochain mismatch")


def zeros(cx: CellComplex, degree: int, value_space: str = "scalar", algebra: Optional[LieAlgebra] = None) -> Cochain:
    vd = 1 if value_space == "scalar" else algebra.dim
    return Cochain(cx, degree, value_space, np.zeros((cx.n_cells(degree), vd)), algebra)


def random_cochain(cx, degree, value_space, algebra, rng, scale=1.0) -> Cochain:
    vd = 1 if value_space == "scalar" else algebra.dim
    return Cochain(cx, degree, value_space, scale * rng.standard_normal((cx.n_cells(degree), vd)), algebra)


def d(a: Cochain) -> Cochain:
    """Discrete exterior derivative: the incidence matrix applied blockwise."""
    cx = a.complex
    if a.degree >= cx.dim:
        raise MeshError("d of a top-degree cochain")
    D = cx.D0 if a.degree == 0 else cx.D1
    return Cochain(cx, a.degree + 1, a.value_space, D @ a.data, a.algebra)


def average_to_edges(xi: Cochain) -> np.ndarray:
    """Endpoint average of a 0-cochain per edge."""
    if xi.degree != 0:
        raise MeshError("expected a 0-cochain")
    return (np.abs(xi.complex.D0) @ xi.data) / 2.0


def d_twisted(A: Cochain, xi: Cochain) -> Cochain:
    """(d_A xi)_e = (d xi)_e + [A_e, avg(xi)_e]."""
    if A.degree != 1 or xi.degree != 0:
        raise MeshError("d_twisted expects (1-cochain, 0-cochain)")
    if A.value_space != "algebra" or xi.value_space != "algebra":
        raise MeshError("d_twisted expects algebra-valued fields")
    if A.algebra is not xi.algebra or A.complex is not xi.complex:
        raise MeshError("field mismatch")
    out = A.complex.D0 @ xi.data
    alg = A.algebra
    if not alg.is_abelian:
        xbar = average_to_edges(xi)
        out = out + np.einsum("kij,ei,ej->ek", alg.structure, A.data, xbar)
    return Cochain(A.complex, 1, "algebra", out, alg)


def vertex_functional(E: Cochain, A: Optional[Cochain] = None) -> np.ndarray:
    """Per-vertex dual coefficients T with sum_e tr(E_e,(d_A xi)_e) = sum_v <T_v, xi_v>.

    This is the exact vertex-wise rearrangement underlying the Green formula:
    T_v collects the signed incidence of E plus half of each incident edge's
    coadjoint bracket term.
    """
    cx = E.complex
    if E.degree != 1 or E.value_space != "dual":
        raise MeshError("expected a dual edge field")
    T = cx.D0.T @ E.data
    if A is not None and not E.algebra.is_abelian:
        if A.degree != 1 or A.value_space != "algebra":
            raise MeshError("expected an algebra 1-cochain")
        # <E_e, [A_e, xi]> = <ad*(A_e) E_e, xi>: half to each endpoint
        c = E.algebra.structure
        br = np.einsum("kij,ei,ek->ej", c, A.data, E.data)
        T = T + (np.abs(cx.D0).T @ br) / 2.0
    return T


def boundary_average_matrix(cx: CellComplex) -> np.ndarray:
    """W with (W xi_boundary)_b = average of xi over the vertices of boundary cell b."""
    b = cx.boundary
    vmap = {int(v): i for i, v in enumerate(b.vertex_ids)}
    W = np.zeros((b.n_cells, b.n_vertices))
    for i, vs in enumerate(b.cell_vertices):
        for v in vs:
            W[i, vmap[int(v)]] += 1.0 / len(vs)
    return W


def route_boundary_densities(cx: CellComplex, T_boundary: np.ndarray) -> np.ndarray:
    """Per-boundary-cell densities y with sum_b s_b <y_b, avg(xi)_b> = sum_v <T_v, xi_v>.

    Solved per boundary component; the 2D midpoint system on a closed loop is
    invertible iff the loop length is odd.
    """
    b = cx.boundary
    if b.n_cells == 0:
        return np.zeros((0, T_boundary.shape[1]))
    W = boundary_average_matrix(cx)
    A = (W * b.signs[:, None]).T  # (n_bverts, n_bcells): A @ y = T
    out = np.zeros((b.n_cells, T_boundary.shape[1]))
    vcomp = cx.boundary_components_of_vertices()
    for comp in np.unique(b.components):
        cells = np.nonzero(b.components == comp)[0]
        verts = np.nonzero(vcomp == comp)[0]
        M = A[np.ix_(verts, cells)]
        # the midpoint cycle matrix is singular iff the loop is even; its
        # determinant underflows for long odd loops, so test singular values
        svals = np.linalg.svd(M, compute_uv=False)
        if M.shape[0] != M.shape[1] or svals[-1] < 1e-8 * svals[0]:
            raise MeshError(
                "boundary density routing is singular (even boundary loop); "
                "use a builder mesh with odd boundary loops"
            )
        out[cells] = np.linalg.solve(M, T_boundary[verts])
    return out


def green_pairing(E: Cochain, xi: Optional[Cochain] = None, A: Optional[Cochain] = None):
    """Exact summation by parts of ``sum_e tr(E_e, (d_A xi)_e)``.

    Returns (bulk, bdry): ``bulk`` is a dual 0-cochain supported on interior
    vertices, ``bdry`` the per-boundary-cell dual densities, and

        sum_e tr(E_e,(d_A xi)_e) = -sum_v tr(bulk_v, xi_v)
                                   + sum_b s_b tr(bdry_b, avg(xi)_b)

    holds for every 0-cochain xi (xi is not consumed: the identity is an
    algebraic rearrangement; pass it to :func:`green_identity_residual` to
    check).  All boundary-vertex contributions are routed into ``bdry``.
    """
    cx = E.complex
    T = vertex_functional(E, A)
    bulk_data = np.zeros_like(T)
    bulk_data[cx.interior_vertex_ids] = -T[cx.interior_vertex_ids]
    bulk = Cochain(cx, 0, "dual", bulk_data, E.algebra)
    bdry = route_boundary_densities(cx, T[cx.boundary.vertex_ids])
    return bulk, bdry


def green_identity_residual(E: Cochain, xi: Cochain, A: Optional[Cochain] = None) -> float:
    """Residual of the Green identity for one xi (exactly zero up to rounding)."""
    cx = E.complex
    bulk, bdry = green_pairing(E, A=A)
    lhs = float(np.sum(E.data * d_twisted(A, xi).data)) if A is not None else float(np.sum(E.data * (cx.D0 @ xi.data)))
    rhs = -float(np.sum(bulk.data * xi.data))
    if cx.has_boundary:
        W = boundary_average_matrix(cx)
        xibar = W @ xi.data[cx.boundary.vertex_ids]
        rhs += float(np.sum(cx.boundary.signs[:, None] * bdry * xibar))
    return abs(lhs - rhs)


# ---------------------------------------------------------------------------
# traces, masses, inner products
# ---------------------------------------------------------------------------


def trace_t(a: Cochain) -> np.ndarray:
    """Tangential trace on the boundary.

    Degree-0 fields restrict to boundary vertices; 2D degree-1 fields restrict
    to boundary edges; 1D edge fields (0-form type) take the value of the
    unique adjacent edge per boundary vertex.
    """
    cx = a.complex
    if not cx.has_boundary:
        raise MeshError("complex has empty boundary")
    b = cx.boundary
    if a.degree == 0:
        return a.data[b.vertex_ids].copy()
    if a.degree == 1 and cx.dim == 2:
        return a.data[b.cell_ids].copy()
    if a.degree == 1 and cx.dim == 1:
        return a.data[b.adjacent_interior].copy()
    raise NotImplementedError("traces beyond degree 0/1 are not pinned down")


def trace_n(a: Cochain) -> np.ndarray:
    """Transverse (normal) trace via the unique adjacent interior cell.

    In 1D this is the outward-signed value of the adjacent edge; in 2D the
    Whitney-interpolated normal component of a 1-cochain at each boundary-edge
    midpoint, scaled by the edge length.
    """
    cx = a.complex
    if not cx.has_boundary:
        raise MeshError("complex has empty boundary")
    b = cx.boundary
    if a.degree != 1:
        raise NotImplementedError("normal trace implemented for 1-cochains")
    if cx.dim == 1:
        return b.signs[:, None] * a.data[b.adjacent_interior]
    if cx.points is None:
        raise MeshError("2D normal trace needs vertex coordinates")
    out = np.zeros((b.n_cells, a.value_dim))
    for i, e in enumerate(b.cell_ids):
        f = int(b.adjacent_interior[i])
        vec = _whitney_eval(cx, a, f, _edge_midpoint(cx, e))
        nrm = _outward_normal(cx, e, f)
        out[i] = (vec @ nrm) * cx.volumes[1][e]
    return out


def _edge_midpoint(cx, e):
    vs = np.nonzero(cx.D0[e])[0]
    return cx.points[vs].mean(axis=0)


def _face_vertices(cx, f):
    edges = np.nonzero(cx.D1[f])[0]
    vs = sorted({int(v) for e in edges for v in np.nonzero(cx.D0[e])[0]})
    return vs


def _outward_normal(cx, e, f):
    vs = np.nonzero(cx.D0[e])[0]
    p, q = cx.points[vs[0]], cx.points[vs[1]]
    t = q - p
    n = np.array([t[1], -t[0]])
    n = n / np.linalg.norm(n)
    bary = cx.points[_face_vertices(cx, f)].mean(axis=0)
    if np.dot(n, bary - 0.5 * (p + q)) > 0:
        n = -n
    return n


def _whitney_eval(cx, a, f, x):
    """Vector proxy of a 1-cochain at point x inside face f via Whitney forms."""
    vs = _face_vertices(cx, f)
    pts = cx.points[vs]
    T = np.column_stack([pts[1] - pts[0], pts[2] - pts[0]])
    lam12 = np.linalg.solve(T, x - pts[0])
    lam = np.array([1 - lam12.sum(), lam12[0], lam12[1]])
    grads = np.zeros((3, 2))
    Tinv = np.linalg.inv(T)
    grads[1] = Tinv[0]
    grads[2] = Tinv[1]
    grads[0] = -grads[1] - grads[2]
    vecs = np.zeros((a.value_dim, 2))
    for e in np.nonzero(cx.D1[f])[0]:
        head = int(np.nonzero(cx.D0[e] == 1)[0][0])
        tail = int(np.nonzero(cx.D0[e] == -1)[0][0])
        i, j = vs.index(tail), vs.index(head)
        w = lam[i] * grads[j] - lam[j] * grads[i]  # Whitney form of edge tail->head
        vecs += np.outer(a.data[e], w)
    return vecs


def mass(cx: CellComplex, degree: int, value_space: str = "algebra") -> np.ndarray:
    """Diagonal mass per k-cell: |*s|/|s| (primal) or |s|/|*s| (dual fields)."""
    vol = np.asarray(cx.volumes[degree], dtype=float)
    dvol = np.asarray(cx.dual_volumes[degree], dtype=float)
    return vol / dvol if value_space == "dual" else dvol / vol


def inner(a: Cochain, b: Cochain) -> float:
    """<<a, b>> = sum_s m_s tr(a_s, b_s); symmetric positive definite."""
    a._compat(b)
    m = mass(a.complex, a.degree, a.value_space)
    if a.value_space == "scalar":
        return float(np.sum(m * a.data[:, 0] * b.data[:, 0]))
    g = a.algebra.pairing
    if a.value_space == "dual":
        g = np.linalg.inv(g)
    return float(np.einsum("s,si,ij,sj->", m, a.data, g, b.data))


def hodge_edge(cx: CellComplex, alg: LieAlgebra):
    """Diagonal map from primal algebra 1-cochains to dual edge fields.

    Realizes (star d_A phi)-type fields: data_e -> (|*e|/|e|) g data_e with
    index lowering, so that <<star a, star b>>_dual = <<a, b>>_primal.
    """
    w = np.asarray(cx.dual_volumes[1], dtype=float) / np.asarray(cx.volumes[1], dtype=float)

    def fwd(a: Cochain) -> Cochain:
        return Cochain(cx, 1, "dual", (w[:, None] * a.data) @ alg.pairing.T, alg)

    def inv(E: Cochain) -> Cochain:
        return Cochain(cx, 1, "algebra", (E.data / w[:, None]) @ np.linalg.inv(alg.pairing).T, alg)

    return fwd, inv


# ---------------------------------------------------------------------------
# builders
# ---------------------------------------------------------------------------


def interval(N: int) -> CellComplex:
    """Uniform interval [0, 1] with N edges."""
    if N < 2:
        raise MeshError("interval needs N >= 2")
    h = 1.0 / N
    D0 = np.zeros((N, N + 1), dtype=int)
    for e in range(N):
        D0[e, e] = -1
        D0[e, e + 1] = 1
    dual0 = np.full(N + 1, h)
    dual0[0] = dual0[-1] = h / 2
    pts = np.linspace(0.0, 1.0, N + 1).reshape(-1, 1)
    return CellComplex(
        dim=1, D0=D0, points=pts,
        volumes={0: np.ones(N + 1), 1: np.full(N, h)},
        dual_volumes={0: dual0, 1: np.ones(N)},
        name=f"interval({N})",
    )


def circle(N: int) -> CellComplex:
    """N-gon circle; empty boundary."""
    if N < 3:
        raise MeshError("circle needs N >= 3")
    D0 = np.zeros((N, N), dtype=int)
    for e in range(N):
        D0[e, e] = -1
        D0[e, (e + 1) % N] = 1
    ang = 2 * np.pi * np.arange(N) / N
    pts = np.column_stack([np.cos(ang), np.sin(ang)])
    ell = np.linalg.norm(pts[(np.arange(N) + 1) % N] - pts, axis=1)
    dual0 = (ell + np.roll(ell, 1)) / 2
    return CellComplex(
        dim=1, D0=D0, points=pts,
        volumes={0: np.ones(N), 1: ell},
        dual_volumes={0: dual0, 1: np.ones(N)},
        name=f"circle({N})",
    )


def _cross2(u, v):
    return float(u[0] * v[1] - u[1] * v[0])


def _complex_from_triangles(points: np.ndarray, tris, name: str) -> CellComplex:
    points = np.asarray(points, dtype=float)
    tris = [tuple(int(v) for v in t) for t in tris]
    # enforce counterclockwise triangles
    fixed = []
    for (a, b, c) in tris:
        area2 = _cross2(points[b] - points[a], points[c] - points[a])
        fixed.append((a, b, c) if area2 > 0 else (a, c, b))
    edge_ix: dict = {}
    edges = []
    for (a, b, c) in fixed:
        for (p, q) in ((a, b), (b, c), (c, a)):
            key = (min(p, q), max(p, q))
            if key not in edge_ix:
                edge_ix[key] = len(edges)
                edges.append(key)  # canonical orientation low -> high
    nv, ne, nf = len(points), len(edges), len(fixed)
    D0 = np.zeros((ne, nv), dtype=int)
    for e, (p, q) in enumerate(edges):
        D0[e, p] = -1
        D0[e, q] = 1
    D1 = np.zeros((nf, ne), dtype=int)
    for f, (a, b, c) in enumerate(fixed):
        for (p, q) in ((a, b), (b, c), (c, a)):
            e = edge_ix[(min(p, q), max(p, q))]
            D1[f, e] = 1 if p < q else -1
    areas = np.array([
        0.5 * abs(_cross2(points[b] - points[a], points[c] - points[a])) for (a, b, c) in fixed
    ])
    elen = np.array([np.linalg.norm(points[q] - points[p]) for (p, q) in edges])
    dual0 = np.zeros(nv)
    for f, (a, b, c) in enumerate(fixed):
        for v in (a, b, c):
            dual0[v] += areas[f] / 3
    dual1 = np.zeros(ne)
    for f, (a, b, c) in enumerate(fixed):
        bary = points[[a, b, c]].mean(axis=0)
        for (p, q) in ((a, b), (b, c), (c, a)):
            e = edge_ix[(min(p, q), max(p, q))]
            mid = 0.5 * (points[p] + points[q])
            dual1[e] += np.linalg.norm(bary - mid)
    return CellComplex(
        dim=2, D0=D0, D1=D1, points=points,
        volumes={0: np.ones(nv), 1: elen, 2: areas},
        dual_volumes={0: dual0, 1: dual1, 2: np.ones(nf)},
        name=name,
    )


def _ring_sizes(r: int) -> int:
    # odd boundary loop so the boundary density routing is invertible
    return 2 * r + 3


def disk(r: int) -> CellComplex:
    """Triangulated unit disk with r concentric rings; odd boundary loop."""
    if r < 1:
        raise MeshError("disk needs r >= 1")
    M = _ring_sizes(r)
    pts = [(0.0, 0.0)]
    for j in range(1, r + 1):
        rho = j / r
        for i in range(M):
            th = 2 * np.pi * i / M
            pts.append((rho * np.cos(th), rho * np.sin(th)))
    idx = lambda j, i: 1 + (j - 1) * M + (i % M)
    tris = []
    for i in range(M):
        tris.append((0, idx(1, i), idx(1, i + 1)))
    for j in range(1, r):
        for i in range(M):
            tris.append((idx(j, i), idx(j + 1, i), idx(j + 1, i + 1)))
            tris.append((idx(j, i), idx(j + 1, i + 1), idx(j, i + 1)))
    return _complex_from_triangles(np.asarray(pts), tris, f"disk({r})")


def annulus(r: int) -> CellComplex:
    """Triangulated annulus (radii 1..2) with r radial strips; odd boundary loops."""
    if r < 1:
        raise MeshError("annulus needs r >= 1")
    M = _ring_sizes(r)
    pts = []
    for j in range(r + 1):
        rho = 1.0 + j / r
        for i in range(M):
            th = 2 * np.pi * i / M
            pts.append((rho * np.cos(th), rho * np.sin(th)))
    idx = lambda j, i: j * M + (i % M)
    tris = []
    for j in range(r):
        for i in range(M):
            tris.append((idx(j, i), idx(j + 1, i), idx(j + 1, i + 1)))
            tris.append((idx(j, i), idx(j + 1, i + 1), idx(j, i + 1)))
    return _complex_from_triangles(np.asarray(pts), tris, f"annulus({r})")


BUILDERS = {"interval": interval, "circle": circle, "disk": disk, "annulus": annulus}


def build(name: str, parameter: int) -> CellComplex:
    if name not in BUILDERS:
        raise MeshError(f"unknown mesh builder {name!r}")
    return BUILDERS[name](parameter)


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------


def to_json(cx: CellComplex) -> str:
    def triplets(D):
        rows, cols = np.nonzero(D)
        return [[int(r), int(c), int(D[r, c])] for r, c in zip(rows, cols)]

    doc = {
        "dim": cx.dim,
        "name": cx.name,
        "n_vertices": cx.n_vertices,
        "n_edges": cx.n_edges,
        "n_faces": cx.n_faces,
        "D0": triplets(cx.D0),
        "D1": triplets(cx.D1) if cx.D1 is not None else None,
        "points": cx.points.tolist() if cx.points is not None else None,
        "volumes": {str(k): np.asarray(v).tolist() for k, v in cx.volumes.items()},
        "dual_volumes": {str(k): np.asarray(v).tolist() for k, v in cx.dual_volumes.items()},
        # boundary markers (recomputed on load; recorded for consumers)
        "boundary_vertices": cx.boundary.vertex_ids.tolist(),
        "boundary_cells": cx.boundary.cell_ids.tolist(),
        "boundary_orientation": cx.boundary.signs.tolist(),
    }
    return json.dumps(doc)


def from_json(doc: str | dict) -> CellComplex:
    data = json.loads(doc) if isinstance(doc, str) else doc
    D0 = np.zeros((data["n_edges"], data["n_vertices"]), dtype=int)
    for r, c, v in data["D0"]:
        D0[r, c] = v
    D1 = None
    if data.get("D1") is not None:
        D1 = np.zeros((data["n_faces"], data["n_edges"]), dtype=int)
        for r, c, v in data["D1"]:
            D1[r, c] = v
    return CellComplex(
        dim=data["dim"],
        D0=D0,
        D1=D1,
        points=None if data.get("points") is None else np.asarray(data["points"], dtype=float),
        volumes={int(k): np.asarray(v) for k, v in data["volumes"].items()},
        dual_volumes={int(k): np.asarray(v) for k, v in data["dual_volumes"].items()},
        name=data.get("name", "complex"),
    )
