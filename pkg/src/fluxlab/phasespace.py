"""Discrete locally Hamiltonian gauge phase spaces.

A model bundles a cell complex, a Lie algebra, a symplectic pairing on
tangent vectors, the infinitesimal gauge action, and a momentum functional
H(phi)(xi) = sum_v <Theta_v(phi), xi_v> given by per-vertex dual
coefficients.  This module holds the model-independent machinery:

* the exact constraint/flux decomposition of the momentum functional
  (interior vertices vs boundary vertices, with per-boundary-cell densities
  routed through the Green-formula plumbing of :mod:`fluxlab.cells`),
* the Hamiltonian-flow residual,
* adjusted fluxes, algebra and group cocycles, and finite gauge flows.

Sign convention: total = -sum_e tr(E_e, (d_A xi)_e) for the electric models,
fixed so that flux(xi) = -sum_b s_b tr(bdry_b, avg(xi)_b) with the outward
induced orientation; the dimension-dependent sign of the continuum momentum
form is absorbed.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.linalg import expm

from . import cells
from .algebra import LieAlgebra
from .cells import CellComplex, Cochain


@dataclass
class PhasePoint:
    """A pair (A, E); E is absent for connection-only models."""

    A: Cochain
    E: Optional[Cochain] = None

    def copy(self):
        return PhasePoint(self.A.copy(), None if self.E is None else self.E.copy())


def point_to_json(phi: PhasePoint) -> str:
    """Serialize as JSON arrays keyed by cell ids."""
    import json
    doc = {"A": {str(e): phi.A.data[e].tolist() for e in range(phi.A.data.shape[0])}}
    if phi.E is not None:
        doc["E"] = {str(e): phi.E.data[e].tolist() for e in range(phi.E.data.shape[0])}
    return json.dumps(doc, sort_keys=True)


def point_from_json(doc: str, cx: CellComplex, alg: LieAlgebra) -> PhasePoint:
    import json
    data = json.loads(doc)
    A = np.array([data["A"][str(e)] for e in range(cx.n_edges)], dtype=float)
    phi = PhasePoint(Cochain(cx, 1, "algebra", A, alg))
    if "E" in data:
        E = np.array([data["E"][str(e)] for e in range(cx.n_edges)], dtype=float)
        phi.E = Cochain(cx, 1, "dual", E, alg)
    return phi


@dataclass
class TangentVector:
    dA: Cochain
    dE: Optional[Cochain] = None


@dataclass
class MomentumEval:
    """Momentum functional split into bulk and flux parts, exactly.

    ``bulk`` is a dual 0-cochain supported on interior vertices (the
    constraint density), ``flux_vertex`` the boundary-vertex coefficients of
    the flux functional, and ``flux_densities`` the per-boundary-cell dual
    values with flux(xi) = -sum_b s_b <flux_densities_b, avg(xi)_b>.
    total(xi) = bulk(xi) + flux(xi) holds for every xi by construction.
    """

    complex: CellComplex
    algebra: LieAlgebra
    vertex_coefficients: np.ndarray      # Theta, shape (n_vertices, gdim)
    bulk: Cochain
    flux_vertex: np.ndarray              # shape (n_boundary_vertices, gdim)
    flux_densities: np.ndarray           # shape (n_boundary_cells, gdim)

    def total(self, xi: Cochain) -> float:
        return float(np.sum(self.vertex_coefficients * xi.data))

    def bulk_pair(self, xi: Cochain) -> float:
        return float(np.sum(self.bulk.data * xi.data))

    def flux_pair(self, xi: Cochain) -> float:
        b = self.complex.boundary
        return float(np.sum(self.flux_vertex * xi.data[b.vertex_ids]))

    def flux_pair_from_densities(self, xi: Cochain) -> float:
        cx = self.complex
        if not cx.has_boundary:
            return 0.0
        W = cells.boundary_average_matrix(cx)
        xibar = W @ xi.data[cx.boundary.vertex_ids]
        return -float(np.sum(cx.boundary.signs[:, None] * self.flux_densities * xibar))


def decompose_momentum(cx: CellComplex, alg: LieAlgebra, theta: np.ndarray) -> MomentumEval:
    """Split per-vertex momentum coefficients into bulk + routed flux."""
    bulk_data = np.zeros_like(theta)
    bulk_data[cx.interior_vertex_ids] = theta[cx.interior_vertex_ids]
    flux_vertex = theta[cx.boundary.vertex_ids]
    dens = cells.route_boundary_densities(cx, -flux_vertex)
    return MomentumEval(
        complex=cx,
        algebra=alg,
        vertex_coefficients=theta,
        bulk=Cochain(cx, 0, "dual", bulk_data, alg),
        flux_vertex=flux_vertex,
        flux_densities=dens,
    )


class GaugeModel:
    """Interface shared by the concrete models in :mod:`fluxlab.models`.

    Subclasses provide ``omega``, ``rho``, ``momentum_vertex`` (the Theta
    coefficients), the analytic differential ``dH_covector``, the constraint
    description, and packing helpers; everything else lives here.
    """

    name: str = "model"
    complex: CellComplex
    algebra: LieAlgebra
    has_electric: bool = True

    # -- packing ------------------------------------------------------------

    @property
    def gdim(self) -> int:
        return self.algebra.dim

    @property
    def n_a(self) -> int:
        return self.complex.n_edges * self.gdim

    @property
    def n_e(self) -> int:
        return self.complex.n_edges * self.gdim if self.has_electric else 0

    @property
    def phase_dim(self) -> int:
        return self.n_a + self.n_e

    def pack_tangent(self, v: TangentVector) -> np.ndarray:
        parts = [v.dA.data.ravel()]
        if self.has_electric:
            parts.append(v.dE.data.ravel())
        return np.concatenate(parts)

    def unpack_tangent(self, x: np.ndarray) -> TangentVector:
        ne = self.complex.n_edges
        dA = Cochain(self.complex, 1, "algebra", x[: self.n_a].reshape(ne, self.gdim), self.algebra)
        dE = None
        if self.has_electric:
            dE = Cochain(self.complex, 1, "dual", x[self.n_a :].reshape(ne, self.gdim), self.algebra)
        return TangentVector(dA, dE)

    def pack_point(self, phi: PhasePoint) -> np.ndarray:
        parts = [phi.A.data.ravel()]
        if self.has_electric:
            parts.append(phi.E.data.ravel())
        return np.concatenate(parts)

    def unpack_point(self, x: np.ndarray) -> PhasePoint:
        v = self.unpack_tangent(x)
        return PhasePoint(v.dA, v.dE)

    def shift_point(self, phi: PhasePoint, v: TangentVector, t: float = 1.0) -> PhasePoint:
        return self.unpack_point(self.pack_point(phi) + t * self.pack_tangent(v))

    # -- random data ----------------------------------------------------------

    def random_point(self, rng, scale: float = 1.0) -> PhasePoint:
        return self.unpack_point(scale * rng.standard_normal(self.phase_dim))

    def random_tangent(self, rng, scale: float = 1.0) -> TangentVector:
        return self.unpack_tangent(scale * rng.standard_normal(self.phase_dim))

    def random_parameter(self, rng, scale: float = 1.0) -> Cochain:
        return cells.random_cochain(self.complex, 0, "algebra", self.algebra, rng, scale)

    # -- to be provided by subclasses ------------------------------------------

    def omega(self, v: TangentVector, w: TangentVector, phi: Optional[PhasePoint] = None) -> float:
        raise NotImplementedError

    def omega_matrix(self, phi: Optional[PhasePoint] = None) -> np.ndarray:
        raise NotImplementedError

    def rho(self, xi: Cochain, phi: PhasePoint) -> TangentVector:
        raise NotImplementedError

    def momentum_vertex(self, phi: PhasePoint) -> np.ndarray:
        raise NotImplementedError

    def dH_covector(self, phi: PhasePoint, xi: Cochain) -> np.ndarray:
        raise NotImplementedError

    def reference(self) -> PhasePoint:
        raise NotImplementedError

    def constraint_residual(self, phi: PhasePoint) -> float:
        raise NotImplementedError

    # -- generic operations -----------------------------------------------------

    def momentum(self, phi: PhasePoint) -> MomentumEval:
        theta = self.momentum_vertex(phi)
        if getattr(self, "momentum_shift", None) is not None:
            theta = theta.copy()
            theta[self.complex.boundary.vertex_ids] += self.momentum_shift
        return decompose_momentum(self.complex, self.algebra, theta)

    def momentum_vertex_dirderiv(self, phi: PhasePoint, v: TangentVector) -> np.ndarray:
        """Exact directional derivative of Theta along v.

        Theta is polynomial of degree <= 3 in the fields for every shipped
        model, so the 4-point difference rule with unit steps is exact up to
        rounding.
        """
        f = lambda t: self.momentum_vertex(self.shift_point(phi, v, t))
        return (8.0 * (f(1.0) - f(-1.0)) - (f(2.0) - f(-2.0))) / 12.0

    def rho_matrix(self, phi: PhasePoint) -> np.ndarray:
        """Matrix of xi -> rho(xi, phi) from vertex parameters to packed tangents."""
        nv, g = self.complex.n_vertices, self.gdim
        out = np.zeros((self.phase_dim, nv * g))
        for v in range(nv):
            for k in range(g):
                data = np.zeros((nv, g))
                data[v, k] = 1.0
                xi = Cochain(self.complex, 0, "algebra", data, self.algebra)
                out[:, v * g + k] = self.pack_tangent(self.rho(xi, phi))
        return out


# ---------------------------------------------------------------------------
# model-independent operations
# ---------------------------------------------------------------------------


def flow_residual(model: GaugeModel, phi: PhasePoint, xi: Cochain, v: TangentVector) -> float:
    """omega(rho(xi, phi), v) - D_v <H(phi), xi> with the analytic differential."""
    lhs = model.omega(model.rho(xi, phi), v, phi)
    rhs = float(np.dot(model.dH_covector(phi, xi), model.pack_tangent(v)))
    return abs(lhs - rhs)


def adjusted_flux(model: GaugeModel, phi: PhasePoint, xi: Cochain,
                  ref: Optional[PhasePoint] = None) -> float:
    """flux(phi)(xi) - flux(ref)(xi); vanishes at the reference point."""
    ref = model.reference() if ref is None else ref
    return model.momentum(phi).flux_pair(xi) - model.momentum(ref).flux_pair(xi)


def adjusted_flux_vertex(model: GaugeModel, phi: PhasePoint,
                         ref: Optional[PhasePoint] = None) -> np.ndarray:
    """Boundary-vertex coefficients of the adjusted flux functional."""
    ref = model.reference() if ref is None else ref
    return model.momentum(phi).flux_vertex - model.momentum(ref).flux_vertex


def algebra_cocycle_k(model: GaugeModel, xi: Cochain, eta: Cochain,
                      phi: Optional[PhasePoint] = None) -> float:
    """k(xi, eta) = <L_{rho(xi)} h, eta> - <h, [xi, eta]> at phi (default: reference).

    For Abelian presets the value is exactly phi-independent; non-Abelian
    models carry an O(h^2) field-dependent discretization defect, measured by
    :func:`cocycle_phi_dependence`.
    """
    phi = model.reference() if phi is None else phi
    cx = model.complex
    dtheta = model.momentum_vertex_dirderiv(phi, model.rho(xi, phi))
    lie = float(np.sum(dtheta[cx.boundary.vertex_ids] * eta.data[cx.boundary.vertex_ids]))
    br = vertex_bracket(model.algebra, xi, eta)
    coad = model.momentum(phi).flux_pair(br)
    return lie - coad


def vertex_bracket(alg: LieAlgebra, xi: Cochain, eta: Cochain) -> Cochain:
    data = np.einsum("kij,vi,vj->vk", alg.structure, xi.data, eta.data)
    return Cochain(xi.complex, 0, "algebra", data, alg)


def cocycle_phi_dependence(model: GaugeModel, xi, eta, rng, samples: int = 10, scale: float = 1.0) -> float:
    """Spread of k(xi, eta) across sampled phase points (weak-equivariance probe)."""
    vals = [algebra_cocycle_k(model, xi, eta, model.random_point(rng, scale)) for _ in range(samples)]
    vals.append(algebra_cocycle_k(model, xi, eta))
    return float(np.max(vals) - np.min(vals))


# -- finite gauge flow --------------------------------------------------------


def gauge_flow(model: GaugeModel, phi: PhasePoint, xi: Cochain, t: float = 1.0) -> PhasePoint:
    """Time-t flow of rho(xi): exact per-edge block exponentials.

    A follows the affine edge ODE dA_e/dt = (d xi)_e - ad(avg xi_e) A_e,
    E follows dE_e/dt = ad*(avg xi_e) E_e; both are integrated exactly.
    """
    alg = model.algebra
    cx = model.complex
    g = alg.dim
    xbar = cells.average_to_edges(xi)
    dxi = cx.D0 @ xi.data
    Adata = np.zeros_like(phi.A.data)
    for e in range(cx.n_edges):
        ad = alg.ad(xbar[e])
        blk = np.zeros((g + 1, g + 1))
        blk[:g, :g] = -t * ad
        blk[:g, g] = t * dxi[e]
        m = expm(blk)
        Adata[e] = m[:g, :g] @ phi.A.data[e] + m[:g, g]
    A = Cochain(cx, 1, "algebra", Adata, alg)
    E = None
    if model.has_electric:
        Edata = np.zeros_like(phi.E.data)
        for e in range(cx.n_edges):
            Edata[e] = expm(t * alg.adstar(xbar[e])) @ phi.E.data[e]
        E = Cochain(cx, 1, "dual", Edata, alg)
    return PhasePoint(A, E)


def group_cocycle_c(model: GaugeModel, xi: Cochain, t: float = 1.0) -> np.ndarray:
    """c(exp(t xi)) as boundary-vertex dual coefficients: the adjusted flux of
    the gauge-transported reference point."""
    ref = model.reference()
    moved = gauge_flow(model, ref, xi, t)
    return adjusted_flux_vertex(model, moved, ref)


def group_cocycle_identity_defect(model: GaugeModel, xi: Cochain, eta: Cochain) -> float:
    """|C(gh) - Ad*(h).C(g) - C(h)| for g = exp(xi), h = exp(eta).

    The pullback Ad*(h) acts pointwise at boundary vertices.  Exact for
    Abelian presets; flow-accuracy limited otherwise.
    """
    cx, alg = model.complex, model.algebra
    ref = model.reference()
    fg = gauge_flow(model, ref, xi)
    fgh = gauge_flow(model, fg, eta)
    c_gh = adjusted_flux_vertex(model, fgh, ref)
    c_g = group_cocycle_c(model, xi)
    c_h = group_cocycle_c(model, eta)
    transported = np.zeros_like(c_g)
    for i, v in enumerate(cx.boundary.vertex_ids):
        adj = expm(alg.ad(eta.data[v]))
        transported[i] = adj.T @ c_g[i]
    return float(np.max(np.abs(c_gh - transported - c_h)))


# -- structural checks ---------------------------------------------------------


def bulk_rank0_defect(model: GaugeModel, phi: PhasePoint, xi: Cochain) -> float:
    """bulk(xi) must only see interior vertex values: zero the boundary values
    of xi and compare (exact)."""
    m = model.momentum(phi)
    chopped = xi.copy()
    chopped.data[model.complex.boundary.vertex_ids] = 0.0
    return abs(m.bulk_pair(xi) - m.bulk_pair(chopped))


def decomposition_residual(model: GaugeModel, phi: PhasePoint, xi: Cochain) -> float:
    """| total - bulk - flux | and the density re-expression, combined."""
    m = model.momentum(phi)
    r1 = abs(m.total(xi) - m.bulk_pair(xi) - m.flux_pair(xi))
    r2 = abs(m.flux_pair(xi) - m.flux_pair_from_densities(xi))
    return max(r1, r2)


def bulk_equivariance_defect(model: GaugeModel, phi: PhasePoint, eta: Cochain, xi: Cochain) -> float:
    """<L_{rho(eta)} H0, xi> - <H0, [eta, xi]>, the constraint-form equivariance.

    Exact (up to rounding) for Abelian models; O(h^2) discretization defect
    for non-Abelian ones.
    """
    cx = model.complex
    dtheta = model.momentum_vertex_dirderiv(phi, model.rho(eta, phi))
    ii = cx.interior_vertex_ids
    lie = float(np.sum(dtheta[ii] * xi.data[ii]))
    br = vertex_bracket(model.algebra, eta, xi)
    coad = model.momentum(phi).bulk_pair(br)
    return abs(lie - coad)


def orbit_tangency_defect(model: GaugeModel, phi: PhasePoint, xi: Cochain) -> float:
    """Directional derivative of the bulk coefficients along rho(xi) at an
    on-shell point, restricted to interior vertices (gauge orbits stay in C)."""
    cx = model.complex
    dtheta = model.momentum_vertex_dirderiv(phi, model.rho(xi, phi))
    return float(np.max(np.abs(dtheta[cx.interior_vertex_ids]))) if len(cx.interior_vertex_ids) else 0.0
