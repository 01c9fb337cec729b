"""Dense two-phase primal simplex for small standard-form LPs.

    minimize    c @ x
    subject to  A @ x == b,  x >= 0

Bland's rule is used for both the entering and leaving variable, which rules
out cycling on the heavily degenerate problems that conjugation columns
produce.  Intended for a few hundred columns at most.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

FEAS_TOL = 1e-9
PIVOT_TOL = 1e-11
MAX_ITER = 50_000


class InfeasibleError(ValueError):
    """The constraint set is empty."""


class UnboundedError(ValueError):
    """The objective is unbounded below."""


@dataclass
class LPResult:
    x: np.ndarray
    objective: float
    basis: list[int]
    iterations: int


def _pivot(T, basis, row, col):
    T[row] /= T[row, col]
    for r in range(T.shape[0]):
        if r != row and T[r, col] != 0.0:
            T[r] -= T[r, col] * T[row]
    basis[row] = col


def _run(T, basis, allowed, tol):
    """Iterate on tableau ``T`` whose last row holds reduced costs and -objective."""
    m = T.shape[0] - 1
    it = 0
    while True:
        costs = T[-1, :-1]
        entering = -1
        for j in allowed:
            if costs[j] < -tol:
                entering = j
                break
        if entering < 0:
            return it
        col = T[:m, entering]
        best_row, best_ratio = -1, np.inf
        for r in range(m):
            if col[r] > PIVOT_TOL:
                ratio = T[r, -1] / col[r]
                if ratio < best_ratio - tol or (
                    abs(ratio - best_ratio) <= tol and basis[r] < basis[best_row]
                ):
                    best_row, best_ratio = r, ratio
        if best_row < 0:
            raise UnboundedError("objective is unbounded below")
        _pivot(T, basis, best_row, entering)
        it += 1
        if it > MAX_ITER:
            raise RuntimeError("simplex iteration limit reached")


def solve(c, A, b, tol: float = FEAS_TOL) -> LPResult:
    """Solve the standard-form LP; raises :class:`InfeasibleError` / :class:`UnboundedError`."""
    c = np.asarray(c, dtype=float)
    A = np.array(A, dtype=float)
    b = np.array(b, dtype=float)
    m, n = A.shape
    neg = b < 0
    A[neg] *= -1
    b[neg] *= -1

    # Phase I: artificials n..n+m-1, minimize their sum.
    T = np.zeros((m + 1, n + m + 1))
    T[:m, :n] = A
    T[:m, n : n + m] = np.eye(m)
    T[:m, -1] = b
    T[-1, :n] = -A.sum(axis=0)
    T[-1, -1] = -b.sum()
    basis = list(range(n, n + m))
    iters = _run(T, basis, range(n + m), tol)
    scale = max(1.0, float(np.abs(b).max(initial=0.0)))
    if -T[-1, -1] > tol * scale:
        raise InfeasibleError(f"phase I optimum {-T[-1, -1]:.3e} > 0")

    # Drive remaining (zero-level) artificials out; drop redundant rows.
    keep = []
    for r in range(m):
        if basis[r] >= n:
            cand = [j for j in range(n) if abs(T[r, j]) > PIVOT_TOL * 1e3]
            if cand:
                _pivot(T, basis, r, cand[0])
                keep.append(r)
        else:
            keep.append(r)
    T = np.vstack([T[keep][:, list(range(n)) + [n + m]], np.zeros((1, n + 1))])
    basis = [basis[r] for r in keep]

    # Phase II objective row: c - c_B B^{-1} A.
    T[-1, :n] = c
    T[-1, -1] = 0.0
    for r, j in enumerate(basis):
        if T[-1, j] != 0.0:
            T[-1] -= T[-1, j] * T[r]
    iters += _run(T, basis, range(n), tol)

    x = np.zeros(n)
    x[basis] = T[:-1, -1]
    # Polish the basic solution against the original system.
    if basis:
        xb, *_ = np.linalg.lstsq(A[:, basis], b, rcond=None)
        if np.all(xb >= -tol):
            x[basis] = np.clip(xb, 0.0, None)
    x[np.abs(x) < tol * 1e-3] = 0.0
    return LPResult(x, float(c @ x), basis, iters)
