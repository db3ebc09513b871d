"""Concrete gauge models wiring algebra + complex + phase space.

* ``maxwell`` / ``ym_su2``: electric pair (A, E) with the ultralocal pairing
  omega(v, w) = sum_e [tr(v.dE_e, w.dA_e) - tr(w.dE_e, v.dA_e)] and momentum
  H(xi) = -sum_e tr(E_e, (d_A xi)_e).  The Hamiltonian flow equation holds
  exactly for any algebra.
* ``theta_ym``: same fields, momentum built on E^theta = E + (theta/2) D1^T F;
  the transfer has identically vanishing divergence ((D1 D0)^T = 0), so the
  constraint is theta-independent in the Abelian case.
* ``chern_simons_disk``: connection-only model on a triangulated disk with
  the Whitney-wedge symplectic pairing; the momentum is the exact primitive
  of the symmetrized contraction, so the flow equation is exact for Abelian
  presets and the non-Abelian defect is reported, not asserted.
* ``bf_corner``: corner-only model (see :mod:`fluxlab.corner`).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.linalg import expm, logm

from . import algebra as liealg
from . import cells
from .algebra import LieAlgebra
from .cells import CellComplex, Cochain
from .phasespace import GaugeModel, PhasePoint, TangentVector


class ModelError(ValueError):
    pass


# ---------------------------------------------------------------------------
# electric models (Maxwell / su2 Yang-Mills type)
# ---------------------------------------------------------------------------


class ElectricModel(GaugeModel):
    """Phase point (A, E); E is the densitized conjugate, metric-free pairing."""

    has_electric = True

    def __init__(self, cx: CellComplex, alg: LieAlgebra, name: str = "electric"):
        self.complex = cx
        self.algebra = alg
        self.name = name
        self.momentum_shift = None

    # omega(v, w) = sum_e <v.dE_e, w.dA_e> - <w.dE_e, v.dA_e>
    def omega(self, v, w, phi=None) -> float:
        return float(np.sum(v.dE.data * w.dA.data) - np.sum(w.dE.data * v.dA.data))

    def omega_matrix(self, phi=None) -> np.ndarray:
        n = self.n_a
        out = np.zeros((2 * n, 2 * n))
        out[:n, n:] = -np.eye(n)
        out[n:, :n] = np.eye(n)
        return out

    def rho(self, xi: Cochain, phi: PhasePoint) -> TangentVector:
        dA = cells.d_twisted(phi.A, xi)
        alg = self.algebra
        if alg.is_abelian:
            dE_data = np.zeros_like(phi.E.data)
        else:
            xbar = cells.average_to_edges(xi)
            dE_data = np.einsum("kij,ei,ek->ej", alg.structure, xbar, phi.E.data)
        return TangentVector(dA, Cochain(self.complex, 1, "dual", dE_data, alg))

    def electric_for_momentum(self, phi: PhasePoint) -> Cochain:
        return phi.E

    def momentum_vertex(self, phi: PhasePoint) -> np.ndarray:
        return -cells.vertex_functional(self.electric_for_momentum(phi), phi.A)

    def dH_covector(self, phi: PhasePoint, xi: Cochain) -> np.ndarray:
        alg = self.algebra
        E = self.electric_for_momentum(phi)
        dAxi = cells.d_twisted(phi.A, xi)
        gE = -dAxi.data
        if alg.is_abelian:
            gA = np.zeros_like(phi.A.data)
        else:
            xbar = cells.average_to_edges(xi)
            gA = np.einsum("kij,ei,ek->ej", alg.structure, xbar, E.data)
        return np.concatenate([gA.ravel(), gE.ravel()])

    def reference(self) -> PhasePoint:
        return PhasePoint(
            cells.zeros(self.complex, 1, "algebra", self.algebra),
            cells.zeros(self.complex, 1, "dual", self.algebra),
        )

    # -- constraint (linear in E at fixed A) --

    def constraint_matrix_E(self, A: Cochain) -> np.ndarray:
        """Rows: interior-vertex dual components of Theta as functions of E."""
        cx, g = self.complex, self.gdim
        ne = cx.n_edges
        cols = np.zeros((len(cx.interior_vertex_ids) * g, ne * g))
        for e in range(ne):
            for k in range(g):
                E = cells.zeros(cx, 1, "dual", self.algebra)
                E.data[e, k] = 1.0
                theta = -cells.vertex_functional(E, A)
                cols[:, e * g + k] = theta[cx.interior_vertex_ids].ravel()
        return cols

    def constraint_residual(self, phi: PhasePoint) -> float:
        theta = self.momentum_vertex(phi)
        ii = self.complex.interior_vertex_ids
        return float(np.max(np.abs(theta[ii]))) if len(ii) else 0.0

    def constraint_jacobian(self, phi: PhasePoint) -> np.ndarray:
        """d(interior bulk rows)/d(packed phase point), assembled exactly."""
        cx, g = self.complex, self.gdim
        rows = len(cx.interior_vertex_ids) * g
        out = np.zeros((rows, self.phase_dim))
        for j in range(self.phase_dim):
            unit = np.zeros(self.phase_dim)
            unit[j] = 1.0
            dt = self.momentum_vertex_dirderiv(phi, self.unpack_tangent(unit))
            out[:, j] = dt[cx.interior_vertex_ids].ravel()
        return out


def maxwell(cx: CellComplex) -> ElectricModel:
    return ElectricModel(cx, liealg.u1(), name="maxwell")


def ym_su2(cx: CellComplex) -> ElectricModel:
    return ElectricModel(cx, liealg.su2(), name="ym_su2")


# ---------------------------------------------------------------------------
# theta-deformed electric model
# ---------------------------------------------------------------------------


class ThetaModel(ElectricModel):
    """Electric model with momentum built on E^theta = E + (theta/2) D1^T F_A.

    The transfer (theta/2) D1^T has identically vanishing divergence, which is
    the exact discrete Bianchi mechanism; for non-Abelian presets the twisted
    transfer leaves a curvature-equivariance defect that is reported by
    :func:`theta_invariance_check` instead of being asserted away.
    """

    def __init__(self, cx: CellComplex, alg: LieAlgebra, theta: float, name: str = "theta_ym"):
        if cx.dim != 2:
            raise ModelError("theta deformation needs a 2D complex (no faces in 1D)")
        super().__init__(cx, alg, name=name)
        self.theta = float(theta)
        self._wedge = _WhitneyWedge(cx)

    def curvature(self, A: Cochain) -> np.ndarray:
        """Per-face curvature F = dA + (1/2)[A ^ A] (algebra coefficients)."""
        F = self.complex.D1 @ A.data
        if not self.algebra.is_abelian:
            F = F + self._wedge.bracket_wedge(self.algebra, A.data, A.data) / 2.0
        return F

    def theta_field(self, phi: PhasePoint) -> Cochain:
        F = self.curvature(phi.A)
        extra = 0.5 * self.theta * (self.complex.D1.T @ (F @ self.algebra.pairing.T))
        return Cochain(self.complex, 1, "dual", phi.E.data + extra, self.algebra)

    def electric_for_momentum(self, phi: PhasePoint) -> Cochain:
        return self.theta_field(phi)

    def _dtheta_field(self, phi: PhasePoint, v: TangentVector) -> np.ndarray:
        dF = self.complex.D1 @ v.dA.data
        if not self.algebra.is_abelian:
            dF = dF + self._wedge.bracket_wedge(self.algebra, phi.A.data, v.dA.data)
        return v.dE.data + 0.5 * self.theta * (self.complex.D1.T @ (dF @ self.algebra.pairing.T))

    def omega(self, v, w, phi=None) -> float:
        if phi is None:
            raise ModelError("theta omega needs the base point")
        dEv = self._dtheta_field(phi, v)
        dEw = self._dtheta_field(phi, w)
        return float(np.sum(dEv * w.dA.data) - np.sum(dEw * v.dA.data))

    def omega_matrix(self, phi=None) -> np.ndarray:
        if phi is None:
            raise ModelError("theta omega needs the base point")
        n = self.n_a
        # omega(v, w) = <S v, P w> - <S w, P v> with S v = dE^theta(v), P w = w.dA
        S = np.zeros((n, self.phase_dim))
        eye = np.eye(self.phase_dim)
        for j in range(self.phase_dim):
            S[:, j] = self._dtheta_field(phi, self.unpack_tangent(eye[j])).ravel()
        P = np.zeros((n, self.phase_dim))
        P[:, :n] = np.eye(n)
        return S.T @ P - P.T @ S

    def dH_covector(self, phi: PhasePoint, xi: Cochain) -> np.ndarray:
        alg, cx = self.algebra, self.complex
        Eth = self.theta_field(phi)
        dAxi = cells.d_twisted(phi.A, xi)
        gE = -dAxi.data
        gA = np.zeros_like(phi.A.data)
        if not alg.is_abelian:
            xbar = cells.average_to_edges(xi)
            gA = gA + np.einsum("kij,ei,ek->ej", alg.structure, xbar, Eth.data)
        # chain rule through E^theta(A): <face_dual, dF(dA)> with dF = D1 dA + [dA ^ A]
        face_dual = -0.5 * self.theta * ((cx.D1 @ dAxi.data) @ alg.pairing)
        gA = gA + cx.D1.T @ face_dual
        if not alg.is_abelian:
            gA = gA + self._wedge.bracket_wedge_transpose(alg, phi.A.data, face_dual)
        return np.concatenate([gA.ravel(), gE.ravel()])

    def bianchi_defect(self, phi: PhasePoint) -> float:
        """Divergence of the transferred curvature term (exact zero iff Abelian)."""
        F = self.curvature(phi.A)
        extra = Cochain(self.complex, 1, "dual",
                        0.5 * self.theta * (self.complex.D1.T @ (F @ self.algebra.pairing.T)),
                        self.algebra)
        T = cells.vertex_functional(extra, phi.A)
        return float(np.max(np.abs(T)))


# ---------------------------------------------------------------------------
# Chern-Simons on a disk
# ---------------------------------------------------------------------------


class _WhitneyWedge:
    """Per-face Whitney 1-form wedge integrals; local matrix G with
    int_F W_l ^ W_l' = G[l, l'] for CCW-ordered local edges [(01),(12),(02)]."""

    G_LOCAL = np.array([
        [0.0, 1.0 / 6.0, 1.0 / 6.0],
        [-1.0 / 6.0, 0.0, -1.0 / 6.0],
        [-1.0 / 6.0, 1.0 / 6.0, 0.0],
    ])

    def __init__(self, cx: CellComplex):
        if cx.dim != 2:
            raise ModelError("Whitney wedge needs a 2D complex")
        self.cx = cx
        self.faces = []
        for f in range(cx.n_faces):
            verts = _ccw_vertices(cx, f)
            local = [(verts[0], verts[1]), (verts[1], verts[2]), (verts[0], verts[2])]
            ids, signs = [], []
            for (p, q) in local:
                e = _find_edge(cx, p, q)
                ids.append(e)
                head = int(np.nonzero(cx.D0[e] == 1)[0][0])
                signs.append(1.0 if head == q else -1.0)
            self.faces.append((np.asarray(ids), np.asarray(signs)))

    def matrix(self) -> np.ndarray:
        """Global antisymmetric edge-pairing matrix W (scalar part)."""
        ne = self.cx.n_edges
        W = np.zeros((ne, ne))
        for ids, signs in self.faces:
            for a in range(3):
                for b in range(3):
                    W[ids[a], ids[b]] += signs[a] * signs[b] * self.G_LOCAL[a, b]
        return W

    def bracket_wedge(self, alg: LieAlgebra, a_data: np.ndarray, b_data: np.ndarray) -> np.ndarray:
        """Per-face wedge of the bracket: sum_{l,m} G[l,m] [a_l, b_m].

        curvature = D1 A + (1/2) bracket_wedge(A, A); its exact differential in
        the A-direction is D1 dA + bracket_wedge(dA, A)."""
        out = np.zeros((self.cx.n_faces, alg.dim))
        c = alg.structure
        for f, (ids, signs) in enumerate(self.faces):
            for l in range(3):
                for m in range(3):
                    g = self.G_LOCAL[l, m] * signs[l] * signs[m]
                    if g == 0.0:
                        continue
                    out[f] += g * np.einsum("kij,i,j->k", c, a_data[ids[l]], b_data[ids[m]])
        return out

    def bracket_wedge_transpose(self, alg: LieAlgebra, a_data: np.ndarray, face_coeff: np.ndarray) -> np.ndarray:
        """Adjoint of da -> bracket_wedge(da, a_data) against per-face dual coefficients."""
        ne = self.cx.n_edges
        out = np.zeros((ne, alg.dim))
        c = alg.structure
        for f, (ids, signs) in enumerate(self.faces):
            fc = face_coeff[f]
            for l in range(3):
                for m in range(3):
                    g = self.G_LOCAL[l, m] * signs[l] * signs[m]
                    if g == 0.0:
                        continue
                    # d/d da_{ids[l]} of <fc, [da_l, a_m]>
                    out[ids[l]] += g * np.einsum("kij,j,k->i", c, a_data[ids[m]], fc)
        return out


def _ccw_vertices(cx: CellComplex, f: int):
    edges = np.nonzero(cx.D1[f])[0]
    vs = sorted({int(v) for e in edges for v in np.nonzero(cx.D0[e])[0]})
    p = cx.points[vs]
    if (p[1] - p[0])[0] * (p[2] - p[0])[1] - (p[1] - p[0])[1] * (p[2] - p[0])[0] < 0:
        vs = [vs[0], vs[2], vs[1]]
    return vs


def _find_edge(cx: CellComplex, p: int, q: int) -> int:
    row = np.nonzero((np.abs(cx.D0[:, p]) == 1) & (np.abs(cx.D0[:, q]) == 1))[0]
    if len(row) != 1:
        raise ModelError("no unique edge between vertices")
    return int(row[0])


class ChernSimonsModel(GaugeModel):
    """Connection-only model on a triangulated disk.

    omega(v, w) = kappa * sum_F int_F Wh(v) ^ Wh(w) (invariant pairing inside),
    H(xi) = the exact primitive of the symmetrized contraction
    omega(rho0(xi), A) + (1/2) omega(L_xi A, A).  Flow is exact for Abelian
    presets; :meth:`flow_defect_bound` reports the non-Abelian obstruction.
    """

    has_electric = False
    KAPPA = -1.0  # calibrated so the boundary cocycle of Fourier modes is +k*pi

    def __init__(self, cx: CellComplex, alg: LieAlgebra, name: str = "chern_simons_disk"):
        if cx.dim != 2:
            raise ModelError("Chern-Simons model needs a 2D complex")
        self.complex = cx
        self.algebra = alg
        self.name = name
        self.momentum_shift = None
        self._wedge = _WhitneyWedge(cx)
        self._W = self.KAPPA * self._wedge.matrix()

    def _omega_apply(self, a_data: np.ndarray) -> np.ndarray:
        """Covector coefficients of omega(a, .): returns -(W (x) g) a."""
        return -(self._W @ (a_data @ self.algebra.pairing.T))

    def omega(self, v, w, phi=None) -> float:
        # omega(v, w) = sum_{e,f} W[e,f] tr(v_e, w_f)
        return float(np.sum(v.dA.data * (self._W @ (w.dA.data @ self.algebra.pairing.T))))

    def omega_matrix(self, phi=None) -> np.ndarray:
        g = self.algebra.pairing
        return np.kron(self._W, g)

    def rho(self, xi: Cochain, phi: PhasePoint) -> TangentVector:
        return TangentVector(cells.d_twisted(phi.A, xi), None)

    def _L_xi(self, xi: Cochain, a_data: np.ndarray) -> np.ndarray:
        """(L_xi a)_e = [a_e, avg(xi)_e]."""
        if self.algebra.is_abelian:
            return np.zeros_like(a_data)
        xbar = cells.average_to_edges(xi)
        return np.einsum("kij,ei,ej->ek", self.algebra.structure, a_data, xbar)

    def momentum_vertex(self, phi: PhasePoint) -> np.ndarray:
        """Theta with H(A)(xi) = omega(D0 xi, A) + 1/2 omega(L_xi A, A)."""
        cx, alg = self.complex, self.algebra
        u = self._W @ (phi.A.data @ alg.pairing.T)  # omega(., A)-pairing per edge
        theta = cx.D0.T @ u
        if not alg.is_abelian:
            # 1/2 <u_e, [A_e, avg(xi)_e]> = 1/2 <ad*(A_e) u_e, avg(xi)_e>
            br = np.einsum("kij,ei,ek->ej", alg.structure, phi.A.data, u)
            theta = theta + (np.abs(cx.D0).T @ br) / 2.0
        return theta

    def dH_covector(self, phi: PhasePoint, xi: Cochain) -> np.ndarray:
        cx, alg = self.complex, self.algebra
        dxi = cx.D0 @ xi.data
        gA = self._omega_apply(dxi)
        if not alg.is_abelian:
            xbar = cells.average_to_edges(xi)
            u = self._W @ (phi.A.data @ alg.pairing.T)
            # - 1/2 ad*(avg xi)(W A)  - 1/2 W(L_xi A)
            gA = gA - 0.5 * np.einsum("kij,ei,ek->ej", alg.structure, xbar, u)
            gA = gA - 0.5 * self._W @ (self._L_xi(xi, phi.A.data) @ alg.pairing.T)
        return gA.ravel()

    def reference(self) -> PhasePoint:
        return PhasePoint(cells.zeros(self.complex, 1, "algebra", self.algebra), None)

    def curvature(self, A: Cochain) -> np.ndarray:
        F = self.complex.D1 @ A.data
        if not self.algebra.is_abelian:
            F = F + self._wedge.bracket_wedge(self.algebra, A.data, A.data) / 2.0
        return F

    def constraint_residual(self, phi: PhasePoint) -> float:
        return float(np.max(np.abs(self.curvature(phi.A))))

    def constraint_jacobian(self, phi: PhasePoint) -> np.ndarray:
        """d(per-face curvature)/d(packed A)."""
        cx, g = self.complex, self.gdim
        out = np.zeros((cx.n_faces * g, self.phase_dim))
        eye = np.eye(self.phase_dim)
        for j in range(self.phase_dim):
            v = self.unpack_tangent(eye[j])
            dF = cx.D1 @ v.dA.data
            if not self.algebra.is_abelian:
                dF = dF + self._wedge.bracket_wedge(self.algebra, phi.A.data, v.dA.data)
            out[:, j] = dF.ravel()
        return out

    def flow_defect_bound(self, phi: PhasePoint, rng, samples: int = 5) -> float:
        """Measured Hamiltonian-flow defect (zero for Abelian presets)."""
        from .phasespace import flow_residual
        worst = 0.0
        for _ in range(samples):
            xi = self.random_parameter(rng)
            v = self.random_tangent(rng)
            worst = max(worst, flow_residual(self, phi, xi, v))
        return worst


# ---------------------------------------------------------------------------
# model specs and instantiation
# ---------------------------------------------------------------------------


@dataclass
class ModelSpec:
    """Top-level configuration object for a model."""

    name: str                 # maxwell | ym_su2 | chern_simons_disk | theta_ym | bf_corner
    mesh: str = "interval"
    mesh_parameter: int = 4
    algebra: Optional[str] = None  # preset name; defaults depend on the model
    theta: float = 0.0

    def __post_init__(self):
        if not np.isfinite(self.theta):
            raise ModelError("theta must be finite")


_DEFAULT_ALGEBRA = {
    "maxwell": "u1",
    "ym_su2": "su2",
    "chern_simons_disk": "u1",
    "theta_ym": "u1",
    "bf_corner": "su2+dual",
}


def _resolve_algebra(name: str) -> LieAlgebra:
    """Preset name, or a path to a JSON document with a custom algebra."""
    if name.endswith(".json"):
        with open(name) as fh:
            return liealg.from_json(fh.read())
    return liealg.preset(name)


def instantiate(spec: ModelSpec):
    """Build the model named by the spec (raises on unknown names / bad combos)."""
    if spec.name not in _DEFAULT_ALGEBRA:
        raise ModelError(f"unknown model {spec.name!r}")
    if spec.theta != 0.0 and spec.name != "theta_ym":
        raise ModelError("theta is only meaningful for theta_ym")
    alg_name = spec.algebra or _DEFAULT_ALGEBRA[spec.name]
    alg = _resolve_algebra(alg_name)
    if spec.name == "bf_corner":
        from .corner import BFCornerModel
        cx = cells.build(spec.mesh if spec.mesh != "interval" else "disk", spec.mesh_parameter)
        return BFCornerModel(cx, alg)
    cx = cells.build(spec.mesh, spec.mesh_parameter)
    if spec.name == "maxwell":
        return ElectricModel(cx, alg, name="maxwell")
    if spec.name == "ym_su2":
        return ElectricModel(cx, alg, name="ym_su2")
    if spec.name == "theta_ym":
        return ThetaModel(cx, alg, spec.theta, name="theta_ym")
    if spec.name == "chern_simons_disk":
        if cx.dim != 2:
            raise ModelError("chern_simons_disk needs a 2D mesh")
        return ChernSimonsModel(cx, alg)
    raise ModelError(f"unknown model {spec.name!r}")


# ---------------------------------------------------------------------------
# model-level operations
# ---------------------------------------------------------------------------


def theta_invariance_check(model: ThetaModel, rng, samples: int = 20) -> dict:
    """Constraint residuals of (A, E) vs (A, E^theta), and the flux/label shift.

    Abelian: identical residuals (exact Bianchi); the label shift at each
    boundary edge equals (theta/2) * (signed adjacent-face curvature), checked
    against an independent direct summation.  Non-Abelian: the Bianchi defect
    is reported instead of asserted.
    """
    base = ElectricModel(model.complex, model.algebra, name="ym_base")
    worst_resid = 0.0
    worst_shift = 0.0
    bianchi = 0.0
    for _ in range(samples):
        phi = model.random_point(rng)
        r_theta = model.constraint_residual(phi)
        r_base = base.constraint_residual(phi)
        worst_resid = max(worst_resid, abs(r_theta - r_base))
        bianchi = max(bianchi, model.bianchi_defect(phi))
        # label shift oracle: direct per-boundary-edge transfer sum
        F = model.curvature(phi.A)
        tE_theta = cells.trace_t(model.theta_field(phi))
        tE = cells.trace_t(phi.E)
        b = model.complex.boundary
        for i, e in enumerate(b.cell_ids):
            f = int(b.adjacent_interior[i])
            expect = 0.5 * model.theta * model.complex.D1[f, e] * (model.algebra.pairing @ F[f])
            worst_shift = max(worst_shift, float(np.max(np.abs(tE_theta[i] - tE[i] - expect))))
    return {
        "constraint_residual_difference": worst_resid,
        "label_shift_oracle_defect": worst_shift,
        "bianchi_defect": bianchi,
        "abelian": model.algebra.is_abelian,
    }


def cs_onshell_chart(model: ChernSimonsModel, u_vertex: np.ndarray) -> PhasePoint:
    """Flat-chart point A_e = log(u_tail^{-1} u_head) from a vertex group field.

    ``u_vertex`` holds algebra coefficients x_v with u_v = exp(x_v); Abelian
    charts are exact (A = d lambda), su(2) uses the principal logarithm with a
    branch guard.  The per-face curvature of the result is the chart's
    discretization defect (reported by the caller).
    """
    cx, alg = model.complex, model.algebra
    u_vertex = np.asarray(u_vertex, dtype=float).reshape(cx.n_vertices, alg.dim)
    if alg.is_abelian:
        A = cx.D0 @ u_vertex
        return PhasePoint(Cochain(cx, 1, "algebra", A, alg), None)
    if alg.matrix_rep is None:
        raise ModelError("non-Abelian chart needs a matrix representation")
    mats = [expm(alg.rep(u_vertex[v])) for v in range(cx.n_vertices)]
    basis = np.stack([np.asarray(m).ravel() for m in alg.matrix_rep], axis=1)
    A = np.zeros((cx.n_edges, alg.dim))
    for e in range(cx.n_edges):
        head = int(np.nonzero(cx.D0[e] == 1)[0][0])
        tail = int(np.nonzero(cx.D0[e] == -1)[0][0])
        m = np.linalg.inv(mats[tail]) @ mats[head]
        lg = logm(m)
        coef, res, *_ = np.linalg.lstsq(basis, lg.ravel(), rcond=None)
        recon = (basis @ coef).reshape(lg.shape)
        if np.max(np.abs(recon - lg)) > 1e-8:
            raise ModelError("logarithm left the algebra span (branch violation)")
        if np.linalg.norm(np.real(coef)) >= np.pi - 1e-6:
            raise ModelError("principal-branch guard: |angle| must stay below pi")
        A[e] = np.real(coef)
    return PhasePoint(Cochain(cx, 1, "algebra", A, alg), None)


def isotropy_basis(model: GaugeModel, phi: PhasePoint) -> np.ndarray:
    """Orthonormal basis of {xi : rho(xi, phi) = 0} (vertex-parameter columns)."""
    from ._linalg import nullspace
    return nullspace(model.rho_matrix(phi))


def el_locus_check(model: GaugeModel, phi: PhasePoint, xi: Cochain) -> dict:
    """Source parts of the momentum's total variation at (phi, xi).

    The field-direction part vanishes iff rho(xi, phi) is omega-null (for the
    electric models: iff xi is an isotropy parameter); the parameter-direction
    part vanishes iff the interior constraint density vanishes.
    """
    v = model.rho(xi, phi)
    if model.has_electric:
        field_part = float(np.max(np.abs(model.pack_tangent(v))))
    else:
        field_part = float(np.max(np.abs(model.omega_matrix(phi) @ model.pack_tangent(v))))
    theta = model.momentum_vertex(phi)
    ii = model.complex.interior_vertex_ids
    param_part = float(np.max(np.abs(theta[ii]))) if len(ii) else 0.0
    return {
        "field_source_part": field_part,
        "parameter_source_part": param_part,
        "on_shell": model.constraint_residual(phi),
    }
