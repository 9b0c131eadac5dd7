"""Small dense two-phase simplex method.

Solves ``min c.x  s.t.  A x = b, x >= 0`` with Bland's rule, which rules
out cycling on the highly degenerate problems produced by support-function
queries (most right-hand sides are zero).  Problems here have a handful of
rows and at most a few thousand columns, so a full tableau is fine.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

PIVOT_TOL = 1e-11
OPT_TOL = 1e-10


@dataclass
class LPResult:
    status: str  # "optimal", "infeasible" or "unbounded"
    value: float
    x: Optional[np.ndarray]


def _pivot(T, row, col):
    T[row] /= T[row, col]
    piv = T[row]
    for r in range(T.shape[0]):
        if r != row:
            f = T[r, col]
            if f != 0.0:
                T[r] -= f * piv
                T[r, col] = 0.0


def _run(T, basis, ncols, max_iter):
    """Iterate on tableau ``T`` (objective in the last row) until optimal.

    Returns False when the objective is unbounded below.
    """
    m = T.shape[0] - 1
    scale = max(1.0, np.abs(T[m, :ncols]).max(initial=0.0))
    for _ in range(max_iter):
        cost = T[m, :ncols]
        cand = np.flatnonzero(cost < -OPT_TOL * scale)
        if cand.size == 0:
            return True
        col = int(cand[0])
        column = T[:m, col]
        pos = np.flatnonzero(column > PIVOT_TOL)
        if pos.size == 0:
            return False
        ratios = T[pos, -1] / column[pos]
        best = ratios.min()
        # Bland: among ties pick the smallest basic variable index
        ties = pos[ratios <= best + 1e-12 * max(1.0, abs(best))]
        row = int(min(ties, key=lambda r: basis[r]))
        _pivot(T, row, col)
        basis[row] = col
    raise RuntimeError("simplex iteration limit reached")


def linprog_std(c, A, b, max_iter=50000) -> LPResult:
    """Minimise ``c.x`` subject to ``A x = b`` and ``x >= 0``."""
    A = np.array(A, dtype=float, ndmin=2)
    b = np.array(b, dtype=float).ravel()
    c = np.array(c, dtype=float).ravel()
    m, n = A.shape
    if m == 0:
        if (c < -OPT_TOL).any():
            return LPResult("unbounded", -np.inf, None)
        return LPResult("optimal", 0.0, np.zeros(n))
    neg = b < 0
    A[neg] *= -1.0
    b[neg] *= -1.0

    # phase I: artificial basis
    T = np.zeros((m + 1, n + m + 1))
    T[:m, :n] = A
    T[:m, n:n + m] = np.eye(m)
    T[:m, -1] = b
    T[m, :n] = -A.sum(axis=0)
    T[m, -1] = -b.sum()
    basis = list(range(n, n + m))
    _run(T, basis, n + m, max_iter)
    infeas = -T[m, -1]
    if infeas > 1e-9 * max(1.0, np.abs(b).max()):
        return LPResult("infeasible", np.inf, None)

    # drive remaining artificials out, dropping redundant rows
    keep = []
    for r in range(m):
        if basis[r] >= n:
            nz = np.flatnonzero(np.abs(T[r, :n]) > PIVOT_TOL)
            if nz.size:
                _pivot(T, r, int(nz[0]))
                basis[r] = int(nz[0])
                keep.append(r)
        else:
            keep.append(r)
    rows = keep + [m]
    T = np.hstack([T[rows, :n], T[rows, -1:]])
    basis = [basis[r] for r in keep]
    m2 = len(keep)

    # phase II
    T[m2, :n] = c
    T[m2, -1] = 0.0
    for r, j in enumerate(basis):
        if T[m2, j] != 0.0:
            T[m2] -= T[m2, j] * T[r]
    if not _run(T, basis, n, max_iter):
        return LPResult("unbounded", -np.inf, None)
    x = np.zeros(n)
    for r, j in enumerate(basis):
        x[j] = T[r, -1]
    return LPResult("optimal", float(c @ x), x)


def hrep_feasible(A, b, tol=1e-9) -> bool:
    """Whether ``{x : A x <= b}`` is nonempty.

    By Farkas' lemma the system is infeasible exactly when some ``y >= 0``
    with ``A^T y = 0`` has ``b.y < 0``; normalising ``sum(y) = 1`` turns
    this into a bounded LP.
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    if A.shape[0] == 0:
        return True
    M = np.vstack([A.T, np.ones(A.shape[0])])
    rhs = np.zeros(A.shape[1] + 1)
    rhs[-1] = 1.0
    res = linprog_std(b, M, rhs)
    if res.status != "optimal":
        return True
    return res.value >= -tol * (1.0 + np.abs(b).max())


def hrep_support(A, b, w) -> float:
    """``sup{<w,x> : A x <= b}`` via the dual ``min b.y, A^T y = w, y >= 0``."""
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    w = np.asarray(w, dtype=float)
    if not hrep_feasible(A, b):
        return -np.inf
    if A.shape[0] == 0:
        return 0.0 if not np.any(w) else np.inf
    res = linprog_std(b, A.T, w)
    if res.status == "infeasible":
        return np.inf
    if res.status == "unbounded":
        return -np.inf
    return res.value
