"""Finite-dimensional real Lie algebras with a fixed generator basis.

Every abstract statement downstream (coadjoint orbits, cocycles, central
extensions, Casimir invariance) is reduced to matrix identities in the
generator basis fixed at construction time:

* algebra elements are coefficient vectors ``x`` with ``x = sum_i x_i e_i``,
* dual elements are coefficient vectors ``f`` with ``<f, e_j> = f_j``,
* the bracket is ``[e_i, e_j] = sum_k c[k, i, j] e_k``.

Shipped presets cover the gauge models: ``u1``, ``rn(n)`` (Abelian), ``su2``
(epsilon structure constants, pairing from -2 tr on the 2x2 representation)
and the semidirect sum ``g (x) g*`` used by the BF corner model.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.linalg import expm

CONSTRUCT_TOL = 1e-12


class AlgebraError(ValueError):
    pass


@dataclass(frozen=True)
class LieAlgebra:
    """Structure constants, invariant pairing and a matrix representation.

    ``structure[k, i, j]`` is the coefficient of ``e_k`` in ``[e_i, e_j]``.
    ``pairing`` realizes the invariant bilinear form tr(.,.) used to identify
    algebra and dual where requested.  ``matrix_rep`` (optional) realizes the
    bracket as a commutator and feeds the exponential map.
    """

    name: str
    dim: int
    structure: np.ndarray
    pairing: np.ndarray
    matrix_rep: Optional[tuple] = None
    casimir_degrees: tuple = (2,)
    invariant_pairing: bool = True
    center_index: Optional[int] = None  # set for central extensions

    def __post_init__(self):
        c = np.asarray(self.structure, dtype=float)
        g = np.asarray(self.pairing, dtype=float)
        object.__setattr__(self, "structure", c)
        object.__setattr__(self, "pairing", g)
        d = self.dim
        if c.shape != (d, d, d):
            raise AlgebraError(f"structure constants must be ({d},{d},{d}), got {c.shape}")
        if g.shape != (d, d):
            raise AlgebraError("pairing shape mismatch")
        if np.max(np.abs(c + np.swapaxes(c, 1, 2))) > CONSTRUCT_TOL:
            raise AlgebraError("structure constants not antisymmetric")
        if np.max(np.abs(g - g.T)) > CONSTRUCT_TOL:
            raise AlgebraError("pairing not symmetric")
        if np.linalg.matrix_rank(g) < d:
            raise AlgebraError("pairing degenerate")
        jac = self._jacobi_defect()
        if jac > CONSTRUCT_TOL:
            raise AlgebraError(f"Jacobi identity violated by {jac:.3e}")
        if self.invariant_pairing:
            inv = self._pairing_invariance_defect()
            if inv > CONSTRUCT_TOL:
                raise AlgebraError(f"pairing not ad-invariant ({inv:.3e})")
        if self.matrix_rep is not None:
            mats = tuple(np.asarray(m) for m in self.matrix_rep)
            object.__setattr__(self, "matrix_rep", mats)
            defect = 0.0
            for i in range(d):
                for j in range(d):
                    comm = mats[i] @ mats[j] - mats[j] @ mats[i]
                    target = sum(c[k, i, j] * mats[k] for k in range(d))
                    defect = max(defect, float(np.max(np.abs(comm - target))))
            if defect > CONSTRUCT_TOL:
                raise AlgebraError(f"matrix_rep is not a homomorphism ({defect:.3e})")

    # -- construction checks ------------------------------------------------

    def _jacobi_defect(self) -> float:
        c = self.structure
        # sum_m (c[m,i,j] c[l,m,k] + c[m,j,k] c[l,m,i] + c[m,k,i] c[l,m,j]) = 0
        t1 = np.einsum("mij,lmk->lijk", c, c)
        t2 = np.einsum("mjk,lmi->lijk", c, c)
        t3 = np.einsum("mki,lmj->lijk", c, c)
        return float(np.max(np.abs(t1 + t2 + t3)))

    def _pairing_invariance_defect(self) -> float:
        c, g = self.structure, self.pairing
        # g(ad(e_i) e_j, e_k) + g(e_j, ad(e_i) e_k) = 0
        t = np.einsum("mij,mk->ijk", c, g) + np.einsum("mik,jm->ijk", c, g)
        return float(np.max(np.abs(t)))

    # -- basic maps ----------------------------------------------------------

    @property
    def is_abelian(self) -> bool:
        return bool(np.max(np.abs(self.structure)) == 0.0)

    def ad(self, x: np.ndarray) -> np.ndarray:
        """Matrix of ad(x) = [x, .] in the generator basis."""
        x = self._check_vec(x)
        return np.einsum("kij,i->kj", self.structure, x)

    def adstar(self, x: np.ndarray) -> np.ndarray:
        """Matrix of ad*(x) on dual coefficients: <ad*(x) f, y> = <f, [x, y]>."""
        x = self._check_vec(x)
        # (ad*(x) f)_j = sum_k f_k c[k, i, j] x_i
        return np.einsum("kij,i->jk", self.structure, x)

    def rep(self, x: np.ndarray) -> np.ndarray:
        if self.matrix_rep is None:
            raise AlgebraError(f"algebra {self.name!r} carries no matrix representation")
        x = self._check_vec(x)
        return sum(xi * m for xi, m in zip(x, self.matrix_rep))

    def pair(self, f: np.ndarray, x: np.ndarray) -> float:
        """Canonical pairing of a dual vector with an algebra vector."""
        return float(np.dot(np.asarray(f, float), self._check_vec(x)))

    def raise_index(self, f: np.ndarray) -> np.ndarray:
        """Identify a dual vector with an algebra vector through the pairing."""
        return np.linalg.solve(self.pairing, np.asarray(f, dtype=float))

    def lower_index(self, x: np.ndarray) -> np.ndarray:
        return self.pairing @ self._check_vec(x)

    def _check_vec(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim,):
            raise AlgebraError(f"expected coefficient vector of length {self.dim}, got shape {x.shape}")
        return x


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------


def bracket(alg: LieAlgebra, x, y) -> np.ndarray:
    """[x, y] from the structure constants."""
    x, y = alg._check_vec(x), alg._check_vec(y)
    return np.einsum("kij,i,j->k", alg.structure, x, y)


def coadjoint(alg: LieAlgebra, x, f) -> np.ndarray:
    """ad*(x).f, defined by <ad*(x).f, y> = <f, [x, y]> for all y."""
    return alg.adstar(x) @ np.asarray(f, dtype=float)


def check_cocycle(alg: LieAlgebra, K: np.ndarray, tol: float = CONSTRUCT_TOL):
    """Validate a 2-cocycle: antisymmetry and the cyclic identity on basis triples.

    Returns (ok, worst_defect, violating_triple_or_None).
    """
    K = np.asarray(K, dtype=float)
    if K.shape != (alg.dim, alg.dim):
        raise AlgebraError("cocycle shape mismatch")
    anti = float(np.max(np.abs(K + K.T)))
    if anti > tol:
        return False, anti, None
    c = alg.structure
    # cyc[i,j,k] = K([e_i,e_j], e_k) + K([e_j,e_k], e_i) + K([e_k,e_i], e_j)
    t = np.einsum("mij,mk->ijk", c, K)
    cyc = t + np.transpose(t, (1, 2, 0)) + np.transpose(t, (2, 0, 1))
    worst = float(np.max(np.abs(cyc)))
    if worst > tol:
        idx = np.unravel_index(np.argmax(np.abs(cyc)), cyc.shape)
        return False, worst, tuple(int(i) for i in idx)
    return True, max(anti, worst), None


def affine_coadjoint(alg: LieAlgebra, x, f, K) -> np.ndarray:
    """ad*(x).f + K(x, .) for an antisymmetric bilinear form K."""
    K = np.asarray(K, dtype=float)
    if np.max(np.abs(K + K.T)) > CONSTRUCT_TOL:
        raise AlgebraError("K is not antisymmetric")
    x = alg._check_vec(x)
    return coadjoint(alg, x, f) + x @ K


@dataclass(frozen=True)
class GroupElement:
    """exp of an algebra element, carried as adjoint/coadjoint matrices.

    ``adjoint`` acts on algebra coefficient vectors (Ad), ``adjoint.T`` on dual
    coefficients (Ad*, via <Ad*(g) f, y> = <f, Ad(g) y>).  ``matrix`` is the
    image in the matrix representation when one is available.
    """

    algebra: LieAlgebra
    adjoint: np.ndarray
    matrix: Optional[np.ndarray] = None

    def ad_action(self, y) -> np.ndarray:
        return self.adjoint @ np.asarray(y, dtype=float)

    def coad_action(self, f) -> np.ndarray:
        return self.adjoint.T @ np.asarray(f, dtype=float)

    def __matmul__(self, other: "GroupElement") -> "GroupElement":
        m = None
        if self.matrix is not None and other.matrix is not None:
            m = self.matrix @ other.matrix
        return GroupElement(self.algebra, self.adjoint @ other.adjoint, m)

    def inverse(self) -> "GroupElement":
        m = None if self.matrix is None else np.linalg.inv(self.matrix)
        return GroupElement(self.algebra, np.linalg.inv(self.adjoint), m)


def exp_action(alg: LieAlgebra, x, t: float = 1.0) -> GroupElement:
    """Group element exp(t x): matrix exponential in the representation,
    adjoint action exp(t ad(x)) on the algebra.

    Always converges for finite matrices; the scaling-and-squaring
    exponential is accurate to ~1e-13 relative at the norms used here.
    """
    x = alg._check_vec(x)
    mat = expm(t * alg.rep(x)) if alg.matrix_rep is not None else None
    return GroupElement(alg, expm(t * alg.ad(x)), mat)


def adjoint_from_rep(alg: LieAlgebra, g_matrix: np.ndarray) -> np.ndarray:
    """Extract Ad(g) in the generator basis by conjugating the representation.

    Independent of :func:`exp_action`'s exp(ad) path; used as an oracle.
    """
    if alg.matrix_rep is None:
        raise AlgebraError("needs a matrix representation")
    basis = [np.asarray(m) for m in alg.matrix_rep]
    cols = np.stack([m.ravel() for m in basis], axis=1)  # (N, dim), maybe complex
    out = np.zeros((alg.dim, alg.dim))
    for j, m in enumerate(basis):
        conj = g_matrix @ m @ np.linalg.inv(g_matrix)
        coef, *_ = np.linalg.lstsq(cols, conj.ravel(), rcond=None)
        out[:, j] = np.real(coef)
    return out


def casimirs(alg: LieAlgebra, f) -> np.ndarray:
    """Casimir values of a dual vector.

    Abelian algebras: every coefficient is a Casimir.  Otherwise the quadratic
    Casimir g^{-1}(f, f) built from the invariant pairing; central extensions
    additionally expose the (invariant) center component.
    """
    f = np.asarray(f, dtype=float)
    if f.shape != (alg.dim,):
        raise AlgebraError("dual vector shape mismatch")
    if alg.is_abelian:
        return f.copy()
    vals = []
    if alg.invariant_pairing:
        vals.append(float(f @ np.linalg.solve(alg.pairing, f)))
    if alg.center_index is not None:
        vals.append(float(f[alg.center_index]))
    if not vals:
        raise AlgebraError("no Casimir available: pairing not invariant and no center")
    return np.asarray(vals)


def central_extend(alg: LieAlgebra, K: np.ndarray) -> LieAlgebra:
    """Central extension g + R c with bracket [(x,r),(y,s)] = ([x,y], K(x,y)).

    K must pass the cocycle test; Jacobi of the extension is then inherited.
    The block pairing diag(g, 1) is a plain inner product (an ad-invariant
    nondegenerate pairing need not exist on the extension), so the extension
    carries ``invariant_pairing=False`` unless K vanishes.
    """
    ok, defect, triple = check_cocycle(alg, K)
    if not ok:
        if triple is None:
            raise AlgebraError(f"K fails antisymmetry by {defect:.3e}")
        raise AlgebraError(f"K fails the cocycle identity by {defect:.3e} on basis triple {triple}")
    d = alg.dim
    c = np.zeros((d + 1, d + 1, d + 1))
    c[:d, :d, :d] = alg.structure
    c[d, :d, :d] = np.asarray(K, dtype=float)
    g = np.zeros((d + 1, d + 1))
    g[:d, :d] = alg.pairing
    g[d, d] = 1.0
    trivial = bool(np.max(np.abs(K)) == 0.0)
    return LieAlgebra(
        name=f"{alg.name}^",
        dim=d + 1,
        structure=c,
        pairing=g,
        matrix_rep=None,
        casimir_degrees=tuple(alg.casimir_degrees) + (1,),
        invariant_pairing=trivial and alg.invariant_pairing,
        center_index=d,
    )


def coadjoint_flow(alg: LieAlgebra, x, f, t: float = 1.0) -> np.ndarray:
    """Ad*(exp(t x)) . f computed as the flow of f' = ad*(x) f."""
    return expm(t * alg.adstar(x)) @ np.asarray(f, dtype=float)


def orbit_membership(alg: LieAlgebra, f1, f2, tol: float = 1e-8):
    """Decide whether two dual vectors lie on the same coadjoint orbit.

    Compact presets (u1, rn, su2) decide exactly: Abelian orbits are points;
    su2 orbits are the connected spheres of fixed quadratic Casimir.  For
    other algebras only the necessary Casimir test is available and the
    returned verdict is "undecided" when it passes.
    """
    f1 = np.asarray(f1, dtype=float)
    f2 = np.asarray(f2, dtype=float)
    c1, c2 = casimirs(alg, f1), casimirs(alg, f2)
    scale = max(np.max(np.abs(c1)), 1.0)
    if np.max(np.abs(c1 - c2)) > tol * scale:
        return False
    if alg.is_abelian:
        return bool(np.max(np.abs(f1 - f2)) <= tol * max(np.max(np.abs(f1)), 1.0))
    if alg.name == "su2":
        return True  # spheres of fixed radius are single orbits
    return "undecided"


def affine_orbit_point(alg: LieAlgebra, K, x, f, t: float = 1.0) -> np.ndarray:
    """Affine coadjoint action of exp(t x) on f: Ad*(exp tx).f + C(exp tx).

    The group 1-cocycle C(exp tx) integrates c' = ad*(x) c + K(x,.), c(0)=0;
    both pieces come from one block matrix exponential.
    """
    x = alg._check_vec(x)
    K = np.asarray(K, dtype=float)
    d = alg.dim
    A = alg.adstar(x)
    Kx = x @ K
    blk = np.zeros((d + 1, d + 1))
    blk[:d, :d] = t * A
    blk[:d, d] = t * Kx
    e = expm(blk)
    return e[:d, :d] @ np.asarray(f, dtype=float) + e[:d, d]


def group_cocycle_quadrature(alg: LieAlgebra, K, x, t: float = 1.0, order: int = 20) -> np.ndarray:
    """C(exp(t x)) = int_0^t Ad*(exp(s x)) K(x,.) ds by Gauss-Legendre quadrature.

    Deliberately avoids the block-exponential closed form so it can serve as an
    independent oracle for :func:`affine_orbit_point`.
    """
    x = alg._check_vec(x)
    Kx = x @ np.asarray(K, dtype=float)
    nodes, weights = np.polynomial.legendre.leggauss(order)
    s = 0.5 * t * (nodes + 1.0)
    w = 0.5 * t * weights
    A = alg.adstar(x)
    return sum(wi * (expm(si * A) @ Kx) for si, wi in zip(s, w))


# ---------------------------------------------------------------------------
# presets
# ---------------------------------------------------------------------------


def u1() -> LieAlgebra:
    """One-dimensional Abelian algebra; rotation generator as the 2x2 real rep."""
    rot = np.array([[0.0, -1.0], [1.0, 0.0]])
    return LieAlgebra(
        name="u1",
        dim=1,
        structure=np.zeros((1, 1, 1)),
        pairing=np.eye(1),
        matrix_rep=(rot,),
        casimir_degrees=(1,),
    )


def rn(n: int) -> LieAlgebra:
    """R^n Abelian algebra, block-rotation representation (faithful)."""
    if n < 1:
        raise AlgebraError("n must be positive")
    rot = np.array([[0.0, -1.0], [1.0, 0.0]])
    mats = []
    for i in range(n):
        m = np.zeros((2 * n, 2 * n))
        m[2 * i : 2 * i + 2, 2 * i : 2 * i + 2] = rot
        mats.append(m)
    return LieAlgebra(
        name=f"r{n}",
        dim=n,
        structure=np.zeros((n, n, n)),
        pairing=np.eye(n),
        matrix_rep=tuple(mats),
        casimir_degrees=tuple([1] * n),
    )


def su2() -> LieAlgebra:
    """Real su(2): [e_i, e_j] = eps_ijk e_k, pairing -2 tr on the 2x2 rep."""
    c = np.zeros((3, 3, 3))
    for i in range(3):
        for j in range(3):
            for k in range(3):
                c[k, i, j] = _levi_civita(i, j, k)
    sigma = [
        np.array([[0, 1], [1, 0]], dtype=complex),
        np.array([[0, -1j], [1j, 0]], dtype=complex),
        np.array([[1, 0], [0, -1]], dtype=complex),
    ]
    mats = tuple(-0.5j * s for s in sigma)
    g = np.zeros((3, 3))
    for i in range(3):
        for j in range(3):
            g[i, j] = float(np.real(-2.0 * np.trace(mats[i] @ mats[j])))
    return LieAlgebra(name="su2", dim=3, structure=c, pairing=g, matrix_rep=mats, casimir_degrees=(2,))


def _levi_civita(i, j, k):
    if (i, j, k) in [(0, 1, 2), (1, 2, 0), (2, 0, 1)]:
        return 1.0
    if (i, j, k) in [(0, 2, 1), (2, 1, 0), (1, 0, 2)]:
        return -1.0
    return 0.0


def semidirect_dual(base: LieAlgebra) -> LieAlgebra:
    """g (x) g* with bracket ([x,y], coad(x) beta - coad(y) alpha).

    coad(x) = -ad*(x) is the coadjoint representation.  The hyperbolic pairing
    <(x,a),(y,b)> = <a,y> + <b,x> is ad-invariant and nondegenerate.  This is
    the gauge algebra of the BF corner model, specialized pointwise.
    """
    d = base.dim
    n = 2 * d
    c = np.zeros((n, n, n))
    c[:d, :d, :d] = base.structure
    # [(e_i,0),(0,e^j)] has dual part coad(e_i) e^j: coefficients -(adstar basis)
    for i in range(d):
        A = -np.einsum("kij,i->jk", base.structure, _unit(d, i))  # coad(e_i) on duals
        c[d:, i, d:] = A  # [ (e_i,0), (0,e^j) ]_dual-part = A[:, j]
        c[d:, d:, i] = -A
    g = np.zeros((n, n))
    g[:d, d:] = np.eye(d)
    g[d:, :d] = np.eye(d)
    # faithful rep: base rep on x, plus the affine block [[coad(x), alpha],[0,0]]
    mats = []
    if base.matrix_rep is not None:
        bdim = base.matrix_rep[0].shape[0]
        cplx = any(np.iscomplexobj(m) for m in base.matrix_rep)
        dtype = complex if cplx else float
        size = bdim + d + 1
        for i in range(n):
            m = np.zeros((size, size), dtype=dtype)
            if i < d:
                m[:bdim, :bdim] = base.matrix_rep[i]
                m[bdim : bdim + d, bdim : bdim + d] = -np.einsum(
                    "kij,i->jk", base.structure, _unit(d, i)
                )
            else:
                m[bdim + (i - d), bdim + d] = 1.0
            mats.append(m)
        rep = tuple(mats)
    else:
        rep = None
    return LieAlgebra(
        name=f"{base.name}+dual",
        dim=n,
        structure=c,
        pairing=g,
        matrix_rep=rep,
        casimir_degrees=(2,),
    )


def _unit(n, i):
    v = np.zeros(n)
    v[i] = 1.0
    return v


_PRESETS = {
    "u1": u1,
    "su2": su2,
    "u1+dual": lambda: semidirect_dual(u1()),
    "su2+dual": lambda: semidirect_dual(su2()),
}


def preset(name: str, **kwargs) -> LieAlgebra:
    """Algebra presets selected by name (``u1``, ``su2``, ``rn``, ``*+dual``)."""
    if name in _PRESETS:
        return _PRESETS[name]()
    if name.startswith("r") and name[1:].isdigit():
        return rn(int(name[1:]))
    raise AlgebraError(f"unknown algebra preset {name!r}")


def from_json(doc: str | dict) -> LieAlgebra:
    """Load a custom algebra from a JSON document.

    Expected keys: ``name``, ``structure_constants`` (nested lists, c[k][i][j]),
    ``pairing``; optional ``matrix_rep`` (list of matrices, each possibly a
    pair [re, im]), ``casimir_degrees``, ``invariant_pairing``.
    """
    data = json.loads(doc) if isinstance(doc, str) else doc
    rep = None
    if data.get("matrix_rep") is not None:
        mats = []
        for entry in data["matrix_rep"]:
            arr = np.asarray(entry, dtype=float)
            if arr.ndim == 3:  # [re, im]
                arr = arr[0] + 1j * arr[1]
            mats.append(arr)
        rep = tuple(mats)
    c = np.asarray(data["structure_constants"], dtype=float)
    return LieAlgebra(
        name=data.get("name", "custom"),
        dim=c.shape[0],
        structure=c,
        pairing=np.asarray(data["pairing"], dtype=float),
        matrix_rep=rep,
        casimir_degrees=tuple(data.get("casimir_degrees", (2,))),
        invariant_pairing=bool(data.get("invariant_pairing", True)),
    )


def to_json(alg: LieAlgebra) -> str:
    rep = None
    if alg.matrix_rep is not None:
        rep = []
        for m in alg.matrix_rep:
            if np.iscomplexobj(m):
                rep.append([np.real(m).tolist(), np.imag(m).tolist()])
            else:
                rep.append(np.asarray(m, dtype=float).tolist())
    return json.dumps(
        {
            "name": alg.name,
            "structure_constants": alg.structure.tolist(),
            "pairing": alg.pairing.tolist(),
            "matrix_rep": rep,
            "casimir_degrees": list(alg.casimir_degrees),
            "invariant_pairing": alg.invariant_pairing,
        }
    )
