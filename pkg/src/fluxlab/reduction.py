"""Two-stage reduction engine.

First stage: the constraint ideal (= on-shell flux annihilator), its momentum
map and justness, the kernel of the restricted symplectic form, and the
reduced form on T C / ker.  Second stage: flux orbit charts, sector labels,
the sector 2-form with the coadjoint-orbit term subtracted, and the
two-path superselection square.

Every subspace here is an explicit orthonormal basis; every kernel comes from
a rank-revealing SVD with a relative threshold, and the sampled on-shell
annihilator reports its stabilization history instead of pretending to be a
universal kernel.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import cells, phasespace as ps
from ._linalg import (nullspace, orth, principal_angles, rank, smallest_sv,
                      subspace_contains)
from .algebra import LieAlgebra
from .cells import Cochain
from .phasespace import GaugeModel, PhasePoint


@dataclass
class Subspace:
    """Orthonormal basis (columns) of a linear subspace of R^ambient."""

    basis: np.ndarray

    def __post_init__(self):
        self.basis = np.atleast_2d(np.asarray(self.basis, dtype=float))
        if self.basis.shape[1]:
            defect = np.max(np.abs(self.basis.T @ self.basis - np.eye(self.basis.shape[1])))
            if defect > 1e-12:
                self.basis = orth(self.basis)

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    @property
    def ambient(self) -> int:
        return self.basis.shape[0]

    def contains(self, other: "Subspace", tol: float = 1e-8) -> bool:
        return subspace_contains(self.basis, other.basis, tol)

    def angles(self, other: "Subspace") -> np.ndarray:
        return principal_angles(self.basis, other.basis)

    def project(self, x: np.ndarray) -> np.ndarray:
        return self.basis @ (self.basis.T @ x)


def parameter_to_vector(xi: Cochain) -> np.ndarray:
    return xi.data.ravel()


def vector_to_parameter(model: GaugeModel, x: np.ndarray) -> Cochain:
    return Cochain(model.complex, 0, "algebra",
                   np.asarray(x, dtype=float).reshape(model.complex.n_vertices, model.gdim),
                   model.algebra)


# ---------------------------------------------------------------------------
# flux annihilators
# ---------------------------------------------------------------------------


def _flux_row(model: GaugeModel, phi: PhasePoint) -> np.ndarray:
    """Boundary-vertex flux coefficients embedded as a full parameter covector."""
    theta = model.momentum(phi).flux_vertex
    row = np.zeros(model.complex.n_vertices * model.gdim)
    for i, v in enumerate(model.complex.boundary.vertex_ids):
        row[v * model.gdim : (v + 1) * model.gdim] = theta[i]
    return row


def annihilator_offshell(model: GaugeModel, rng=None, extra_samples: int = 24):
    """ker of xi -> flux coefficients over the whole field space.

    Rows are collected at the reference, at every coordinate phase point, and
    at random points (covering bilinear terms); the returned record lists the
    rank-stabilization history.  For the shipped models this kernel is exactly
    the boundary-collar-vanishing subspace.
    """
    rng = np.random.default_rng(0) if rng is None else rng
    rows = [_flux_row(model, model.reference())]
    history = []
    eye = np.eye(model.phase_dim)
    for j in range(model.phase_dim):
        rows.append(_flux_row(model, model.unpack_point(eye[j])))
    history.append((len(rows), rank(np.vstack(rows))))
    for _ in range(extra_samples):
        rows.append(_flux_row(model, model.random_point(rng)))
    history.append((len(rows), rank(np.vstack(rows))))
    ker = nullspace(np.vstack(rows))
    record = {"samples": len(rows), "rank_history": history, "dim": ker.shape[1]}
    return Subspace(ker), record


@dataclass
class OnShellChart:
    """Linear chart of the constraint surface at a fixed background A.

    For the electric models the constraint is linear in E; the chart is the
    nullspace of the constraint matrix at A.  Connection-only models chart
    on-shell points directly (flat charts), with an empty E-basis.
    """

    model: GaugeModel
    A: Cochain
    E_basis: np.ndarray  # (n_e_coords, k); empty for connection-only models

    @classmethod
    def at(cls, model: GaugeModel, A: Optional[Cochain] = None) -> "OnShellChart":
        A = model.reference().A if A is None else A
        if not model.has_electric:
            return cls(model, A, np.zeros((0, 0)))
        R = model.constraint_matrix_E(A)
        basis = nullspace(R) if R.shape[0] else np.eye(R.shape[1])
        return cls(model, A, basis)

    def point(self, coeffs: np.ndarray) -> PhasePoint:
        cx, alg = self.model.complex, self.model.algebra
        E = Cochain(cx, 1, "dual",
                    (self.E_basis @ np.asarray(coeffs, float)).reshape(cx.n_edges, alg.dim), alg)
        return PhasePoint(self.A.copy(), E)

    def random_point(self, rng, scale: float = 1.0) -> PhasePoint:
        return self.point(scale * rng.standard_normal(self.E_basis.shape[1]))

    def residual(self) -> float:
        worst = 0.0
        for k in range(self.E_basis.shape[1]):
            worst = max(worst, self.model.constraint_residual(self.point(np.eye(self.E_basis.shape[1])[k])))
        return worst


def annihilator_onshell(model: GaugeModel, backgrounds: Sequence, rng=None):
    """Intersection over backgrounds of ker(on-shell adjusted flux).

    ``backgrounds`` holds either A-cochains (electric models: the full linear
    E-chart is used per background) or on-shell PhasePoints (connection-only
    models).  Returns (Subspace, record with the stabilization history).
    """
    if len(backgrounds) == 0:
        raise ValueError("need at least one on-shell background")
    rng = np.random.default_rng(0) if rng is None else rng
    ref_row = _flux_row(model, model.reference())
    rows = []
    history = []
    for bg in backgrounds:
        if isinstance(bg, PhasePoint):
            rows.append(_flux_row(model, bg) - ref_row)
        else:
            chart = OnShellChart.at(model, bg)
            base = _flux_row(model, chart.point(np.zeros(chart.E_basis.shape[1])))
            rows.append(base - ref_row)
            for k in range(chart.E_basis.shape[1]):
                e_k = np.eye(chart.E_basis.shape[1])[k]
                rows.append(_flux_row(model, chart.point(e_k)) - base)
        history.append((len(rows), rank(np.vstack(rows)) if rows else 0))
    ker = nullspace(np.vstack(rows))
    record = {"backgrounds": len(backgrounds), "rank_history": history, "dim": ker.shape[1]}
    return Subspace(ker), record


def stabilized_onshell_annihilator(model: GaugeModel, rng, max_backgrounds: int = 8):
    """On-shell annihilator with backgrounds added until the kernel stabilizes.

    The sampled kernel over-approximates the universal one; it is accepted
    once two consecutive background additions leave the dimension unchanged,
    and the stabilization history is part of the returned record.
    """
    backgrounds = [model.reference().A]
    sub, rec = annihilator_onshell(model, backgrounds, rng)
    dims = [sub.dim]
    if not model.algebra.is_abelian:
        stable = 0
        while stable < 2 and len(backgrounds) < max_backgrounds:
            backgrounds.append(
                cells.random_cochain(model.complex, 1, "algebra", model.algebra, rng, 0.5))
            sub, rec = annihilator_onshell(model, backgrounds, rng)
            stable = stable + 1 if sub.dim == dims[-1] else 0
            dims.append(sub.dim)
    rec = dict(rec)
    rec["dimension_history"] = dims
    rec["stabilization_backgrounds"] = len(backgrounds)
    return sub, rec


def ideal_stability_defect(alg: LieAlgebra, sub: Subspace, rng, samples: int = 10) -> float:
    """max distance of [xi, basis] from the subspace over random xi (pointwise bracket)."""
    nv = sub.ambient // alg.dim
    worst = 0.0
    for _ in range(samples):
        x = rng.standard_normal((nv, alg.dim))
        for j in range(sub.dim):
            col = sub.basis[:, j].reshape(nv, alg.dim)
            br = np.einsum("kij,vi,vj->vk", alg.structure, x, col).ravel()
            resid = br - sub.project(br)
            worst = max(worst, float(np.max(np.abs(resid))) if br.size else 0.0)
    return worst


# ---------------------------------------------------------------------------
# constraint momentum map and justness
# ---------------------------------------------------------------------------


def constraint_momentum_J0(model: GaugeModel, phi: PhasePoint, xi0: Cochain,
                           g0: Subspace, tol: float = 1e-8) -> float:
    """J0(phi)(xi0) = bulk(xi0) + adjusted flux(xi0), for xi0 in the constraint ideal."""
    v = parameter_to_vector(xi0)
    if np.max(np.abs(v - g0.project(v))) > tol * max(1.0, np.max(np.abs(v))):
        raise ValueError("parameter outside the constraint gauge ideal")
    m = model.momentum(phi)
    return m.bulk_pair(xi0) + ps.adjusted_flux(model, phi, xi0)


def justness_check(model: GaugeModel, A: Cochain, g0: Subspace) -> dict:
    """Two-sided rank statement: {J0(.)(xi0) = 0 for all xi0} == {constraint rows = 0}.

    Both sides are linear in E at fixed A; their kernels are compared exactly.
    """
    R = model.constraint_matrix_E(A)
    ne = R.shape[1]
    ref_flux = model.momentum(model.reference()).flux_vertex
    rows = np.zeros((g0.dim, ne))
    cx, g = model.complex, model.gdim
    for j in range(g0.dim):
        xi0 = vector_to_parameter(model, g0.basis[:, j])
        for c in range(ne):
            Eu = cells.zeros(cx, 1, "dual", model.algebra)
            Eu.data.ravel()[c] = 1.0
            m = model.momentum(PhasePoint(A.copy(), Eu))
            rows[j, c] = m.bulk_pair(xi0) + float(np.sum((m.flux_vertex - ref_flux) * xi0.data[cx.boundary.vertex_ids]))
    kerJ = nullspace(rows)
    kerC = nullspace(R)
    ang = principal_angles(kerJ, kerC)
    return {
        "rank_J0": rank(rows),
        "rank_constraint": rank(R),
        "dim_ker_J0": kerJ.shape[1],
        "dim_ker_constraint": kerC.shape[1],
        "kernel_angle": float(np.max(ang)) if ang.size else 0.0,
        "just": bool(kerJ.shape[1] == kerC.shape[1]
                     and (ang.size == 0 or np.max(ang) < 1e-8)),
    }


# ---------------------------------------------------------------------------
# characteristic kernel and the reduced symplectic form
# ---------------------------------------------------------------------------


def tangent_constraint_basis(model: GaugeModel, phi: PhasePoint) -> np.ndarray:
    """Orthonormal basis of T_phi C = ker(linearized constraint)."""
    J = model.constraint_jacobian(phi)
    return nullspace(J)


def characteristic_kernel(model: GaugeModel, phi: PhasePoint, g0: Subspace,
                          drop_vertex: Optional[int] = None) -> dict:
    """ker of the restricted symplectic form vs the constraint gauge directions.

    Also demonstrates the strict containment for the proper subideal obtained
    by additionally zeroing one interior vertex (dim gap >= 1).
    """
    if model.constraint_residual(phi) > 1e-8:
        raise ValueError("phi is not on shell")
    B = tangent_constraint_basis(model, phi)
    Om = model.omega_matrix(phi)
    OmC = B.T @ Om @ B
    K = B @ nullspace(OmC)
    rho = model.rho_matrix(phi)
    V0 = orth(rho @ g0.basis)
    ang = principal_angles(K, V0)
    # proper subideal: isotropy plus the interior-supported parameters away
    # from one dropped vertex (must contain the isotropy for the strictness
    # statement to apply)
    cx, g = model.complex, model.gdim
    if drop_vertex is None:
        if not len(cx.interior_vertex_ids):
            raise ValueError("no interior vertex to drop")
        drop_vertex = int(cx.interior_vertex_ids[0])
    iso = nullspace(rho)
    cols = []
    for v in cx.interior_vertex_ids:
        if int(v) == drop_vertex:
            continue
        for k in range(g):
            col = np.zeros(cx.n_vertices * g)
            col[v * g + k] = 1.0
            cols.append(col)
    interior_minus = np.column_stack(cols) if cols else np.zeros((cx.n_vertices * g, 0))
    sub = orth(np.hstack([iso, interior_minus]))
    VJ = orth(rho @ sub)
    return {
        "dim_TC": B.shape[1],
        "dim_K": K.shape[1],
        "dim_V0": V0.shape[1],
        "max_angle_K_V0": float(np.max(ang)) if ang.size else 0.0,
        "dim_VJ": VJ.shape[1],
        "VJ_strictly_smaller": bool(VJ.shape[1] < K.shape[1]),
        "K": Subspace(K),
        "V0": Subspace(V0),
        "TC": Subspace(B),
    }


def reduced_form(model: GaugeModel, phi: PhasePoint, kernel: Optional[Subspace] = None) -> dict:
    """omega restricted to T_phi C / ker, in an orthonormal complement chart.

    Returns the quotient basis Q (columns, ambient coordinates), the
    antisymmetric matrix of the reduced form, and its smallest singular value
    (nondegeneracy certificate).
    """
    B = tangent_constraint_basis(model, phi)
    Om = model.omega_matrix(phi)
    if kernel is None:
        kernel = Subspace(B @ nullspace(B.T @ Om @ B))
    Kb = B.T @ kernel.basis
    Qb = nullspace(Kb.T) if Kb.size else np.eye(B.shape[1])
    Q = B @ Qb
    red = Q.T @ Om @ Q
    return {
        "Q": Q,
        "matrix": red,
        "antisymmetry_defect": float(np.max(np.abs(red + red.T))),
        "smallest_sv": smallest_sv(red),
        "dim": red.shape[0],
    }


def flux_gradient_in_chart(model: GaugeModel, phi: PhasePoint, xi: Cochain, Q: np.ndarray) -> np.ndarray:
    """Directional derivatives of the adjusted flux paired with xi along the
    columns of Q (exact: the flux is polynomial in the fields)."""
    cx = model.complex
    out = np.zeros(Q.shape[1])
    bix = cx.boundary.vertex_ids
    for j in range(Q.shape[1]):
        v = model.unpack_tangent(Q[:, j])
        dtheta = model.momentum_vertex_dirderiv(phi, v)
        out[j] = float(np.sum(dtheta[bix] * xi.data[bix]))
    return out


def residual_flux_and_flow(model: GaugeModel, phi: PhasePoint, xi: Cochain,
                           red: Optional[dict] = None) -> float:
    """| i_{rho(xi)} omega_red - d<h, xi> | in the quotient chart of reduced_form."""
    red = reduced_form(model, phi) if red is None else red
    Q = red["Q"]
    q_rho = Q.T @ model.pack_tangent(model.rho(xi, phi))
    # i_{rho} omega_red paired with the j-th chart direction is rho^T Omega Q_j
    lhs = red["matrix"].T @ q_rho
    rhs = flux_gradient_in_chart(model, phi, xi, Q)
    return float(np.max(np.abs(lhs - rhs))) if lhs.size else 0.0


# ---------------------------------------------------------------------------
# KKS brackets
# ---------------------------------------------------------------------------


def kks_bracket(alg: LieAlgebra, f1: np.ndarray, f2: np.ndarray) -> np.ndarray:
    """Pointwise Lie-Poisson bracket of boundary dual data.

    f1, f2 are (n_cells, gdim) dual arrays; the bracket identifies duals with
    algebra elements through the invariant pairing, brackets pointwise, and
    lowers the index back.
    """
    f1 = np.atleast_2d(np.asarray(f1, dtype=float))
    f2 = np.atleast_2d(np.asarray(f2, dtype=float))
    if f1.shape != f2.shape:
        raise ValueError("mismatched boundary supports")
    ginv = np.linalg.inv(alg.pairing)
    x1 = f1 @ ginv.T
    x2 = f2 @ ginv.T
    br = np.einsum("kij,vi,vj->vk", alg.structure, x1, x2)
    return br @ alg.pairing.T


def kks_eval(alg: LieAlgebra, f: np.ndarray, xi: np.ndarray, eta: np.ndarray,
             K: Optional[np.ndarray] = None) -> float:
    """Poisson bracket of the linear functions <., xi>, <., eta> at f:
    sum_v <f_v, [xi_v, eta_v]> (+ K(xi, eta) on flattened data)."""
    f = np.atleast_2d(f)
    xi = np.atleast_2d(xi)
    eta = np.atleast_2d(eta)
    br = np.einsum("kij,vi,vj->vk", alg.structure, xi, eta)
    val = float(np.sum(f * br))
    if K is not None:
        val += float(xi.ravel() @ np.asarray(K) @ eta.ravel())
    return val


def kks_jacobi_defect(alg: LieAlgebra, f, xi, eta, zeta, K=None) -> float:
    """Cyclic Jacobi sum for linear functions (zero when K is a cocycle).

    {{F,G},H} at f evaluates to <f, [[xi,eta],zeta]> + K([xi,eta], zeta) for
    the linear functions F = <., xi> etc.; the cyclic sum is the brute-force
    expansion."""
    xi, eta, zeta = (np.atleast_2d(x) for x in (xi, eta, zeta))
    def pb(a, b):
        return np.einsum("kij,vi,vj->vk", alg.structure, a, b)
    total = 0.0
    for a, b, c in ((xi, eta, zeta), (eta, zeta, xi), (zeta, xi, eta)):
        total += kks_eval(alg, f, pb(a, b), c, K)
    return abs(total)


# ---------------------------------------------------------------------------
# sectors
# ---------------------------------------------------------------------------


@dataclass
class SectorLabel:
    """Per-boundary-cell Casimir vectors plus a component index."""

    casimirs: np.ndarray
    q: int = 0

    def __post_init__(self):
        self.casimirs = np.atleast_2d(np.asarray(self.casimirs, dtype=float))
        if not np.all(np.isfinite(self.casimirs)):
            raise ValueError("non-finite Casimirs")
        if self.q < 0:
            raise ValueError("component index must be >= 0")

    def distance(self, other: "SectorLabel") -> float:
        if self.casimirs.shape != other.casimirs.shape:
            return float("inf")
        return float(np.max(np.abs(self.casimirs - other.casimirs)))


def boundary_field(model: GaugeModel, phi: PhasePoint) -> np.ndarray:
    """The per-boundary-cell field whose orbit labels the sector.

    Electric models: the tangential trace of E (theta models: of E^theta);
    connection-only models: the trace of A - A_reference.
    """
    if model.has_electric:
        field = model.electric_for_momentum(phi) if hasattr(model, "electric_for_momentum") else phi.E
        return cells.trace_t(field)
    return cells.trace_t(phi.A) - cells.trace_t(model.reference().A)


def sector_label(model: GaugeModel, phi: PhasePoint, q: int = 0,
                 require_onshell: bool = True) -> SectorLabel:
    """Orbit label of the boundary flux.

    Electric models: pointwise Casimirs of the boundary trace of the electric
    field (one row per boundary cell).  Connection-only models: the orbit
    invariant is the boundary holonomy per boundary component (the circulation
    for Abelian presets, conjugation invariants of the ordered loop product
    otherwise); on a disk chart it vanishes and the census sees one sector.
    """
    from .algebra import casimirs
    if require_onshell and model.constraint_residual(phi) > 1e-8:
        raise ValueError("phi is not on shell")
    alg = model.algebra
    if model.has_electric:
        t = boundary_field(model, phi)
        cas = np.stack([casimirs(alg, t[i]) for i in range(t.shape[0])])
        return SectorLabel(cas, q)
    return SectorLabel(_holonomy_invariants(model, phi), q)


def _holonomy_invariants(model: GaugeModel, phi: PhasePoint) -> np.ndarray:
    """Per-boundary-component holonomy invariants of the boundary connection."""
    from scipy.linalg import expm
    cx, alg = model.complex, model.algebra
    b = cx.boundary
    tA = cells.trace_t(phi.A)
    comps = np.unique(b.components)
    rows = []
    for comp in comps:
        cell_ix = np.nonzero(b.components == comp)[0]
        if alg.is_abelian:
            circ = np.zeros(alg.dim)
            for i in cell_ix:
                circ += b.signs[i] * tA[i]
            rows.append(circ)
        else:
            # ordered loop product in the matrix representation; conjugation
            # invariants via the (complex) trace
            order = _loop_order(cx, cell_ix)
            hol = np.eye(alg.matrix_rep[0].shape[0], dtype=complex)
            for i in order:
                hol = hol @ expm(b.signs[i] * alg.rep(tA[i]))
            tr = np.trace(hol)
            rows.append(np.array([np.real(tr), np.imag(tr)]))
    width = max(len(r) for r in rows)
    out = np.zeros((len(rows), width))
    for i, r in enumerate(rows):
        out[i, : len(r)] = r
    return out


def _loop_order(cx, cell_ix):
    """Order boundary cells head-to-tail around their loop."""
    b = cx.boundary
    remaining = list(cell_ix)
    order = [remaining.pop(0)]
    while remaining:
        last = order[-1]
        tail, head = b.cell_vertices[last]
        endpoint = head if b.signs[last] > 0 else tail
        for j, cand in enumerate(remaining):
            t2, h2 = b.cell_vertices[cand]
            start = t2 if b.signs[cand] > 0 else h2
            if start == endpoint:
                order.append(remaining.pop(j))
                break
        else:
            order.append(remaining.pop(0))
    return order


def orbit_directions(model: GaugeModel, f: np.ndarray, K: Optional[np.ndarray] = None) -> np.ndarray:
    """Columns: ad*_K(basis).f tangent directions of the boundary-vertex flux orbit."""
    alg = model.algebra
    b = model.complex.boundary
    g = alg.dim
    n = b.n_vertices * g
    cols = []
    for v in range(b.n_vertices):
        for k in range(g):
            col = np.zeros(n)
            col[v * g : (v + 1) * g] = alg.adstar(np.eye(g)[k]) @ f[v]
            if K is not None:
                xi = np.zeros(n)
                xi[v * g + k] = 1.0
                col = col + xi @ np.asarray(K)
            cols.append(col)
    return np.column_stack(cols) if cols else np.zeros((n, 0))


def sector_form(model: GaugeModel, phi: PhasePoint, K: Optional[np.ndarray] = None,
                fbar: Optional[np.ndarray] = None, tol: float = 1e-8) -> dict:
    """Presymplectic form on the flux-orbit sector chart at phi.

    T_phi S = { X in T_phi C : d(flux)(X) lies along the coadjoint-orbit
    directions at f = flux(phi) }; the returned matrix is iota* omega minus
    the pulled-back orbit form, and ``basicness_residual`` is
    max_xi | i_{rho(xi)} (omega_sector) | over a full parameter basis.

    ``fbar`` optionally names the reference flux of the orbit; it is rejected
    when its pointwise Casimirs mismatch phi's flux beyond ``tol``.
    """
    from .algebra import casimirs
    cx, alg, g = model.complex, model.algebra, model.gdim
    B = tangent_constraint_basis(model, phi)
    f = ps.adjusted_flux_vertex(model, phi)
    if fbar is not None:
        fb = np.asarray(fbar, dtype=float).reshape(f.shape)
        for v in range(f.shape[0]):
            c1, c2 = casimirs(alg, f[v]), casimirs(alg, fb[v])
            if np.max(np.abs(c1 - c2)) > tol * max(1.0, float(np.max(np.abs(c1)))):
                raise ValueError("reference flux is not on the orbit of phi's flux "
                                 f"(Casimir mismatch at boundary site {v})")
    Orb = orbit_directions(model, f, K)
    Orb_basis = orth(Orb)
    # d(flux) along the TC basis
    nb = cx.boundary.n_vertices * g
    Dflux = np.zeros((nb, B.shape[1]))
    for j in range(B.shape[1]):
        v = model.unpack_tangent(B[:, j])
        dtheta = model.momentum_vertex_dirderiv(phi, v)
        Dflux[:, j] = dtheta[cx.boundary.vertex_ids].ravel()
    # solve Dflux x in span(Orb): ker([Dflux, -Orb]) projected to x-block
    if Orb_basis.shape[1]:
        ns = nullspace(np.hstack([Dflux, -Orb_basis]))
        TS_b = orth(ns[: B.shape[1]]) if ns.shape[1] else np.zeros((B.shape[1], 0))
    else:
        TS_b = nullspace(Dflux)
    TS = B @ TS_b
    Om = model.omega_matrix(phi)
    omega_sector = TS.T @ Om @ TS
    # subtract the pulled-back orbit form
    if Orb_basis.shape[1]:
        deltas = Dflux @ TS_b                       # (nb, t)
        U, *_ = np.linalg.lstsq(Orb, deltas, rcond=None)  # parameter directions
        fmat = f.reshape(cx.boundary.n_vertices, g)
        t = TS.shape[1]
        orbit_form = np.zeros((t, t))
        for i in range(t):
            for j in range(t):
                ui = U[:, i].reshape(cx.boundary.n_vertices, g)
                uj = U[:, j].reshape(cx.boundary.n_vertices, g)
                # orbit symplectic form: Omega(ad*_u1 f, ad*_u2 f) = <f,[u2,u1]> (+ K(u2,u1)),
                # the defining contraction i_{ad*_xi} Omega = d<i(.), xi>
                orbit_form[i, j] = kks_eval(alg, fmat, uj, ui, K)
        omega_sector = omega_sector - orbit_form
    # basicness: contract with every gauge direction
    worst = 0.0
    rho = model.rho_matrix(phi)
    for c in range(rho.shape[1]):
        x = rho[:, c]
        coef = TS.T @ x
        resid = omega_sector @ coef
        worst = max(worst, float(np.max(np.abs(resid))) if resid.size else 0.0)
    return {
        "TS": TS,
        "matrix": omega_sector,
        "dim": omega_sector.shape[0],
        "basicness_residual": worst,
    }


def superselection_square(model: GaugeModel, chart: OnShellChart, rng,
                          samples: int = 50, scale: float = 0.5) -> dict:
    """Two-path label evaluation: restrict-then-label vs transform-then-label.

    Labels are pointwise Casimirs of the boundary trace; the gauge transform
    is the exact exponential flow.  Returns the worst two-path mismatch and
    the census of realized labels.
    """
    worst = 0.0
    labels = []
    for _ in range(samples):
        phi = chart.random_point(rng) if model.has_electric else chart_point_cs(model, rng, scale)
        xi = model.random_parameter(rng, scale)
        lab1 = sector_label(model, phi, require_onshell=False)
        moved = ps.gauge_flow(model, phi, xi)
        lab2 = sector_label(model, moved, require_onshell=False)
        worst = max(worst, lab1.distance(lab2))
        labels.append(lab1.casimirs)
    return {"two_path_defect": worst, "labels": labels, "samples": samples}


def chart_point_cs(model, rng, scale=0.5) -> PhasePoint:
    from .models import cs_onshell_chart
    u = scale * rng.standard_normal((model.complex.n_vertices, model.gdim))
    return cs_onshell_chart(model, u)
