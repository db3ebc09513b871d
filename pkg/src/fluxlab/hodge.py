"""Equivariant Hodge machinery: twisted Laplacians, Neumann/Dirichlet solves,
radiative/Coulombic splits, the Coulomb connection, and the Faddeev-Popov
operator.

The twisted codifferential is *defined* as the plain transpose of the twisted
incidence operator against the boundary-routed Green pairing, so the discrete
Green formula is exact by construction: for every xi,

    sum_e tr(E_e, (d_A xi)_e) = <D_A^T E, xi>   (all vertices),

and the Neumann problem below is the normal equation of the L2-projection of
E onto the Coulombic space { star d_A phi }.  Dense factorizations are the
default (and the oracle) at desk scale; a diagonally-preconditioned conjugate
gradient handles anything larger.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.sparse.linalg import LinearOperator, cg

from . import cells
from ._linalg import nullspace, orth, principal_angles
from .algebra import LieAlgebra
from .cells import CellComplex, Cochain

DENSE_LIMIT = 2000
COMPAT_TOL = 1e-9


class CompatibilityError(ValueError):
    """Raised when Neumann data violates the integrated constraint; carries the
    violating kernel vector (the discrete Gauss-law obstruction)."""

    def __init__(self, message, kernel_vector):
        super().__init__(message)
        self.kernel_vector = kernel_vector


def twisted_incidence(cx: CellComplex, A: Cochain) -> np.ndarray:
    """Dense matrix of xi -> d_A xi from vertex to edge coefficients."""
    alg = A.algebra
    g = alg.dim
    out = np.kron(cx.D0.astype(float), np.eye(g))
    if not alg.is_abelian:
        half = np.abs(cx.D0) / 2.0
        for e in range(cx.n_edges):
            ad = alg.ad(A.data[e])  # [A_e, .]
            for v in np.nonzero(half[e])[0]:
                out[e * g : (e + 1) * g, v * g : (v + 1) * g] += half[e, v] * ad
    return out


@dataclass
class TwistedLaplacian:
    """L = D_A^T M1 D_A on algebra-valued 0-cochains.

    Neumann mode keeps all vertices (natural boundary condition built into the
    transpose); Dirichlet mode eliminates boundary-vertex rows and columns.
    """

    complex: CellComplex
    algebra: LieAlgebra
    A: Cochain
    boundary_mode: str = "neumann"

    def __post_init__(self):
        if self.boundary_mode not in ("neumann", "dirichlet"):
            raise ValueError("boundary_mode must be neumann or dirichlet")
        cx, g = self.complex, self.algebra.dim
        self.D = twisted_incidence(cx, self.A)
        m1 = cells.mass(cx, 1, "algebra")
        self.M1 = np.repeat(m1, g)
        self.L_full = self.D.T @ (self.M1[:, None] * self.D)
        self.free = np.arange(cx.n_vertices * g)
        if self.boundary_mode == "dirichlet":
            drop = np.concatenate([
                np.arange(v * g, (v + 1) * g) for v in cx.boundary.vertex_ids
            ]) if cx.has_boundary else np.zeros(0, dtype=int)
            self.free = np.setdiff1d(self.free, drop)
        self.L = self.L_full[np.ix_(self.free, self.free)]
        self.kernel = nullspace(self.L)

    @property
    def matrix(self) -> np.ndarray:
        return self.L

    def symmetry_defect(self) -> float:
        return float(np.max(np.abs(self.L - self.L.T)))

    def kernel_dim(self) -> int:
        return self.kernel.shape[1]

    def solve(self, rhs: np.ndarray, method: str = "auto") -> np.ndarray:
        """Solve L x = rhs (restricted to free indices), kernel-orthogonal.

        Raises :class:`CompatibilityError` when rhs has a component along the
        kernel beyond COMPAT_TOL (relative).
        """
        rhs = np.asarray(rhs, dtype=float)[self.free]
        if self.kernel.shape[1]:
            coef = self.kernel.T @ rhs
            if np.linalg.norm(coef) > COMPAT_TOL * max(np.linalg.norm(rhs), 1.0):
                cert = np.zeros(self.complex.n_vertices * self.algebra.dim)
                cert[self.free] = self.kernel @ coef
                raise CompatibilityError(
                    "incompatible source/boundary data: nonzero pairing with the "
                    "kernel of the twisted Laplacian", cert)
            rhs = rhs - self.kernel @ coef
        n = len(rhs)
        if method == "dense" or (method == "auto" and n <= DENSE_LIMIT):
            x, *_ = np.linalg.lstsq(self.L, rhs, rcond=None)
        else:
            diag = np.diag(self.L).copy()
            diag[diag <= 0] = 1.0
            M = LinearOperator((n, n), matvec=lambda v: v / diag)
            x, info = cg(self.L, rhs, rtol=1e-12, atol=0.0, maxiter=20 * n, M=M)
            if info != 0:
                x, *_ = np.linalg.lstsq(self.L, rhs, rcond=None)
        if self.kernel.shape[1]:
            x = x - self.kernel @ (self.kernel.T @ x)
        out = np.zeros(self.complex.n_vertices * self.algebra.dim)
        out[self.free] = x
        return out


def neumann_solve(A: Cochain, source: Optional[Cochain] = None,
                  bdry: Optional[np.ndarray] = None, method: str = "auto") -> Cochain:
    """Solve the twisted Neumann problem with dual-density source and
    per-boundary-cell flux data.

    The right-hand side is the vertex functional F with
    <F, xi> = sum_v tr(source_v, xi_v) + sum_b s_b tr(bdry_b, avg(xi)_b);
    compatibility (F orthogonal to ker d_A) is checked and violations are
    rejected with the kernel certificate.
    """
    cx, alg = A.complex, A.algebra
    g = alg.dim
    F = np.zeros((cx.n_vertices, g))
    if source is not None:
        F += source.data
    if bdry is not None and cx.has_boundary:
        W = cells.boundary_average_matrix(cx)
        contrib = (W * cx.boundary.signs[:, None]).T @ np.asarray(bdry, dtype=float).reshape(-1, g)
        F[cx.boundary.vertex_ids] += contrib
    lap = TwistedLaplacian(cx, alg, A, "neumann")
    phi = lap.solve(F.ravel(), method=method)
    return Cochain(cx, 0, "algebra", phi.reshape(cx.n_vertices, g), alg)


def split_E(A: Cochain, E: Cochain, method: str = "auto"):
    """Radiative/Coulombic split E = E_coul + E_rad.

    E_coul is the star of d_A phi for the Neumann potential phi; E_rad is
    divergence-free (all vertices, hence fluxless through every boundary
    cell) and orthogonal to E_coul in the dual-field inner product.
    Returns (E_coul, E_rad, phi).
    """
    cx, alg = A.complex, A.algebra
    T = cells.vertex_functional(E, A)
    lap = TwistedLaplacian(cx, alg, A, "neumann")
    phi = lap.solve(T.ravel(), method=method)
    phic = Cochain(cx, 0, "algebra", phi.reshape(cx.n_vertices, alg.dim), alg)
    fwd, _ = cells.hodge_edge(cx, alg)
    E_coul = fwd(cells.d_twisted(A, phic))
    E_rad = Cochain(cx, 1, "dual", E.data - E_coul.data, alg)
    return E_coul, E_rad, phic


def coulomb_connection(A: Cochain, dA: Cochain, method: str = "auto") -> Cochain:
    """Connection value Upsilon(dA): the vertical potential of the tangent dA.

    Solves L Upsilon = D_A^T M1 dA, the normal equation of the M1-orthogonal
    projection of dA onto the gauge directions Im(d_A); feeding a pure-gauge
    tangent d_A xi returns xi modulo the kernel.
    """
    cx, alg = A.complex, A.algebra
    lap = TwistedLaplacian(cx, alg, A, "neumann")
    rhs = lap.D.T @ (lap.M1 * dA.data.ravel())
    ups = lap.solve(rhs, method=method)
    return Cochain(cx, 0, "algebra", ups.reshape(cx.n_vertices, alg.dim), alg)


def faddeev_popov(A0: Cochain, A: Cochain) -> dict:
    """Assemble d_{A0}^* d_A in Neumann and Dirichlet modes with spectra.

    Near-singularity is reported as data, never raised.
    """
    cx, alg = A0.complex, A0.algebra
    g = alg.dim
    D0op = twisted_incidence(cx, A0)
    Dop = twisted_incidence(cx, A)
    m1 = np.repeat(cells.mass(cx, 1, "algebra"), g)
    full = D0op.T @ (m1[:, None] * Dop)
    report = {"n": full.shape[0]}
    free = np.arange(cx.n_vertices * g)
    drop = np.concatenate([
        np.arange(v * g, (v + 1) * g) for v in cx.boundary.vertex_ids
    ]) if cx.has_boundary else np.zeros(0, dtype=int)
    interior = np.setdiff1d(free, drop)
    for mode, ix in (("neumann", free), ("dirichlet", interior)):
        m = full[np.ix_(ix, ix)]
        s = np.linalg.svd(m, compute_uv=False) if m.size else np.zeros(1)
        smin = float(s[-1]) if s.size else 0.0
        smax = float(s[0]) if s.size else 0.0
        report[mode] = {
            "matrix": m,
            "smallest_sv": smin,
            "condition": float(smax / smin) if smin > 0 else float("inf"),
            "invertible": bool(smin > 1e-10 * max(smax, 1.0)),
        }
    return report


def faddeev_popov_ray(A0: Cochain, A1: Cochain, samples: int = 9) -> list:
    """Smallest singular values of the Faddeev-Popov operator along the segment
    A0 -> A1 (slice-margin scan; no neighborhood is certified)."""
    out = []
    for t in np.linspace(0.0, 1.0, samples):
        At = Cochain(A0.complex, 1, "algebra", (1 - t) * A0.data + t * A1.data, A0.algebra)
        rep = faddeev_popov(A0, At)
        out.append({
            "t": float(t),
            "neumann_smallest_sv": rep["neumann"]["smallest_sv"],
            "dirichlet_smallest_sv": rep["dirichlet"]["smallest_sv"],
        })
    return out


def hodge_checks(A: Cochain) -> dict:
    """Decompositions of the edge space at background A, as a report.

    Neumann split: Im(d_A) + ker(d_A^* .) (natural boundary condition);
    Dirichlet split: Im(d_A|_D) + interior-codifferential kernel.  Checks
    pairwise mass-orthogonality, dimension sums, kernel dimensions, and the
    dual-field splits obtained through the diagonal star map.
    """
    cx, alg = A.complex, A.algebra
    g = alg.dim
    ne = cx.n_edges * g
    D = twisted_incidence(cx, A)
    m1 = np.repeat(cells.mass(cx, 1, "algebra"), g)
    M1h = np.sqrt(m1)

    im_dA = orth(D)
    ker_delta_N = nullspace(D.T * m1[None, :])
    # Dirichlet: parameters vanishing on the boundary
    if cx.has_boundary:
        keep = np.concatenate([
            np.arange(v * g, (v + 1) * g) for v in cx.interior_vertex_ids
        ]) if len(cx.interior_vertex_ids) else np.zeros(0, dtype=int)
        DD = D[:, keep] if len(keep) else np.zeros((ne, 0))
    else:
        DD = D
    im_dA_D = orth(DD)
    codiff = D.T * m1[None, :]
    if cx.has_boundary:
        if len(cx.interior_vertex_ids):
            rows = np.concatenate([
                np.arange(v * g, (v + 1) * g) for v in cx.interior_vertex_ids
            ])
            ker_delta_int = nullspace(codiff[rows])
        else:
            ker_delta_int = np.eye(ne)  # no interior rows: no conditions
    else:
        ker_delta_int = nullspace(codiff)

    def m_orth_defect(U, V):
        if U.shape[1] == 0 or V.shape[1] == 0:
            return 0.0
        return float(np.max(np.abs((M1h[:, None] * U).T @ (M1h[:, None] * V))))

    ker_dA0 = nullspace(D)
    report = {
        "n_edge_dofs": ne,
        "dim_im_dA": im_dA.shape[1],
        "dim_ker_codiff_neumann": ker_delta_N.shape[1],
        "dim_im_dA_dirichlet": im_dA_D.shape[1],
        "dim_ker_codiff_interior": ker_delta_int.shape[1],
        "dim_ker_dA_degree0": ker_dA0.shape[1],
        "neumann_dims_sum": im_dA.shape[1] + ker_delta_N.shape[1],
        "dirichlet_dims_sum": im_dA_D.shape[1] + ker_delta_int.shape[1],
        "neumann_orthogonality_defect": m_orth_defect(im_dA, ker_delta_N),
        "dirichlet_orthogonality_defect": m_orth_defect(im_dA_D, ker_delta_int),
    }
    # harmonic space (Abelian, metric-independent count): closed and cofree
    if alg.is_abelian and cx.dim == 1:
        harmonic = ker_delta_N  # no 2-cells: every 1-cochain is closed
        report["dim_harmonic"] = harmonic.shape[1]
    elif alg.is_abelian and cx.dim == 2:
        curl = np.kron(cx.D1.astype(float), np.eye(g))
        closed = nullspace(curl)
        # intersection via stacked system
        both = nullspace(np.vstack([curl, codiff]))
        report["dim_harmonic"] = both.shape[1]
        report["dim_closed"] = closed.shape[1]
    # dual-field splits through the diagonal star
    w = np.repeat(np.asarray(cx.dual_volumes[1], float) / np.asarray(cx.volumes[1], float), g)
    gmat = np.kron(np.eye(cx.n_edges), alg.pairing)
    star = w[:, None] * gmat
    dual_coul = orth(star @ im_dA)
    report["dual_split_angle"] = float(np.max(principal_angles(dual_coul, star @ im_dA))) if im_dA.shape[1] else 0.0
    report["dim_dual_coulombic"] = dual_coul.shape[1]
    return report
