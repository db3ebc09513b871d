"""Dense linear-algebra helpers shared by the reduction and corner machinery.

Rank decisions use a relative threshold tied to the largest singular value,
so every kernel/intersection below is reproducible given the same inputs.
"""
from __future__ import annotations

import numpy as np

RANK_RTOL = 1e-10


def _svd_cut(s, rtol):
    if s.size == 0:
        return 0
    return int(np.sum(s > rtol * max(s[0], 1.0)))


def rank(a: np.ndarray, rtol: float = RANK_RTOL) -> int:
    a = np.atleast_2d(np.asarray(a, dtype=float))
    if a.size == 0:
        return 0
    s = np.linalg.svd(a, compute_uv=False)
    return _svd_cut(s, rtol)


def orth(a: np.ndarray, rtol: float = RANK_RTOL) -> np.ndarray:
    """Orthonormal basis (columns) of the column span of `a`."""
    a = np.atleast_2d(np.asarray(a, dtype=float))
    if a.size == 0 or a.shape[1] == 0:
        return np.zeros((a.shape[0], 0))
    u, s, _ = np.linalg.svd(a, full_matrices=False)
    r = _svd_cut(s, rtol)
    return u[:, :r]


def nullspace(a: np.ndarray, rtol: float = RANK_RTOL) -> np.ndarray:
    """Orthonormal basis (columns) of ker(a)."""
    a = np.atleast_2d(np.asarray(a, dtype=float))
    m, n = a.shape
    if n == 0:
        return np.zeros((0, 0))
    if m == 0:
        return np.eye(n)
    u, s, vh = np.linalg.svd(a)
    r = _svd_cut(s, rtol)
    return vh[r:].T.conj()


def principal_angles(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Principal angles (radians, ascending) between two column spans.

    Small angles come from the sine formulation (Björck-Golub), which keeps
    full precision where arccos of a near-unit cosine would lose half of it.
    """
    qu, qv = orth(u), orth(v)
    if qu.shape[1] == 0 or qv.shape[1] == 0:
        return np.zeros(0)
    c = np.clip(np.linalg.svd(qu.T @ qv, compute_uv=False), -1.0, 1.0)
    theta = np.arccos(c)
    s = np.linalg.svd(qv - qu @ (qu.T @ qv), compute_uv=False)
    s = np.sort(np.clip(s, -1.0, 1.0))  # ascending sines pair with descending cosines
    small = c > np.sqrt(0.5)
    take = np.arcsin(s[: int(np.sum(small))])
    theta_sorted = np.sort(theta)
    theta_sorted[: len(take)] = take
    return theta_sorted


def subspace_contains(big: np.ndarray, small: np.ndarray, tol: float = 1e-8) -> bool:
    """True iff span(small) is contained in span(big) up to `tol`."""
    qb, qs = orth(big), orth(small)
    if qs.shape[1] == 0:
        return True
    resid = qs - qb @ (qb.T @ qs)
    return bool(np.linalg.norm(resid, 2) <= tol)


def intersect(u: np.ndarray, v: np.ndarray, rtol: float = RANK_RTOL) -> np.ndarray:
    """Orthonormal basis of span(u) & span(v)."""
    qu, qv = orth(u, rtol), orth(v, rtol)
    if qu.shape[1] == 0 or qv.shape[1] == 0:
        return np.zeros((qu.shape[0], 0))
    # vectors x = qu a = qv b  <=>  [qu, -qv] [a; b] = 0
    ns = nullspace(np.hstack([qu, -qv]), rtol)
    if ns.shape[1] == 0:
        return np.zeros((qu.shape[0], 0))
    return orth(qu @ ns[: qu.shape[1]], rtol)


def project_onto(basis: np.ndarray, x: np.ndarray) -> np.ndarray:
    q = orth(basis)
    return q @ (q.T @ x)


def smallest_sv(a: np.ndarray) -> float:
    a = np.atleast_2d(np.asarray(a, dtype=float))
    if a.size == 0:
        return 0.0
    s = np.linalg.svd(a, compute_uv=False)
    return float(s[-1]) if s.size else 0.0
