"""Simulating one two-party interaction by another with local controls.

Every control is a product ``U (x) V`` with ``U`` from a transformer group on
the left factor and ``V`` from one on the right (or, for the local-term
step, from an annihilator).  Each product term ``C (x) D`` of the target is
produced by pushing the first Schmidt factor of ``H`` to ``C`` on the left
and projecting the right factors onto ``D``; local terms are then fixed up
by annihilating one side while steering the other.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errorbasis import annihilator_sequence, heisenberg_basis
from .groups import GroupError, MatrixGroup, decompose_linear_map, is_transformer
from .linalg import as_hamiltonian, dagger, gell_mann_basis, unvec_su, vec_su
from .synthesis import SimulationError, SimulationInfeasible

__all__ = [
    "BipartiteError",
    "BipartitePlan",
    "OperatorSchmidt",
    "bipartite_synthesize",
    "combine_plans",
    "operator_schmidt",
    "product_coefficients",
    "simulate_product_term",
]

SVD_CUTOFF = 1e-10
COUPLING_TOL = 1e-10
LOCAL_TOL = 1e-12
RESIDUAL_TOL = 1e-6


class BipartiteError(ValueError):
    pass


def _local_dim(D: int, d: int | None) -> int:
    if d is None:
        d = int(round(np.sqrt(D)))
    if d * d != D:
        raise BipartiteError(f"dimension {D} is not d^2 for d={d}")
    return d


def product_coefficients(H, d: int | None = None):
    """Split ``H`` into ``a (x) 1 + 1 (x) b + sum J_ab s_a (x) s_b``.

    Returns ``(a, b, J)`` with ``J`` real, indexed in the
    :func:`~hamsim.linalg.gell_mann_basis` order on both factors.
    """
    H = np.asarray(H, dtype=complex)
    d = _local_dim(H.shape[0], d)
    basis = gell_mann_basis(d)
    T = H.reshape(d, d, d, d)  # T[i, k, j, l] = <ik|H|jl>
    left = np.einsum("ikjk->ij", T) / d
    right = np.einsum("ikil->kl", T) / d
    a = left - np.trace(left) / d * np.eye(d)
    b = right - np.trace(right) / d * np.eye(d)
    # J_ab = tr((s_a (x) s_b) H) / d^2
    J = np.einsum("aji,blk,ikjl->ab", basis, basis, T).real / d**2
    return a, b, J


@dataclass(frozen=True, eq=False)
class OperatorSchmidt:
    left: np.ndarray  # (r, d, d), A_j, mutually orthogonal
    right: np.ndarray  # (r, d, d), B_j, orthonormal
    singular_values: np.ndarray

    def __len__(self):
        return self.left.shape[0]

    def coupling(self) -> np.ndarray:
        if len(self) == 0:
            d = self.left.shape[1]
            return np.zeros((d * d, d * d), dtype=complex)
        return np.einsum("rij,rkl->ikjl", self.left, self.right).reshape(
            self.left.shape[1] ** 2, -1
        )

    @property
    def gram_condition(self) -> float:
        """Condition number of the trace-inner-product Gram matrix of the ``B_j``."""
        if len(self) == 0:
            return 1.0
        V = np.array([vec_su(B) for B in self.right])
        return float(np.linalg.cond(V @ V.T))


def operator_schmidt(H, d: int | None = None):
    """Local parts and Schmidt-decomposed coupling of a bipartite Hamiltonian.

    Returns ``(a, b, schmidt)`` where the coupling ``H - a(x)1 - 1(x)b``
    equals ``sum_j A_j (x) B_j``.
    """
    H = as_hamiltonian(H)
    d = _local_dim(H.shape[0], d)
    a, b, J = product_coefficients(H, d)
    U, s, Vt = np.linalg.svd(J)
    keep = s > SVD_CUTOFF * max(float(np.linalg.norm(J)), 1e-300)
    if np.linalg.norm(J) <= COUPLING_TOL:
        keep[:] = False
    A = np.array([s[k] * unvec_su(U[:, k]) for k in np.nonzero(keep)[0]]).reshape(-1, d, d)
    B = np.array([unvec_su(Vt[k]) for k in np.nonzero(keep)[0]]).reshape(-1, d, d)
    return a, b, OperatorSchmidt(A, B, s[keep])


@dataclass(frozen=True, eq=False)
class BipartitePlan:
    H: np.ndarray
    H_target: np.ndarray
    taus: np.ndarray
    left: np.ndarray  # (k, d, d)
    right: np.ndarray  # (k, d, d)

    def __len__(self):
        return len(self.taus)

    @property
    def achieved_overhead(self) -> float:
        return float(np.sum(self.taus))

    def average(self, H=None) -> np.ndarray:
        """``sum_j tau_j (U_j (x) V_j)^dagger H (U_j (x) V_j)``."""
        H = self.H if H is None else np.asarray(H, dtype=complex)
        if len(self) == 0:
            return np.zeros_like(H)
        d = self.left.shape[1]
        # Contract factor-wise instead of forming the Kronecker products.
        T = H.reshape(d, d, d, d)
        out = np.einsum(
            "n,nai,nbk,ikjl,njc,nld->abcd",
            self.taus,
            dagger(self.left),
            dagger(self.right),
            T,
            self.left,
            self.right,
            optimize=True,
        )
        return out.reshape(d * d, d * d)

    @property
    def residual(self) -> float:
        return float(np.linalg.norm(self.average() - self.H_target))

    def controls(self) -> np.ndarray:
        return np.einsum("nij,nkl->nikjl", self.left, self.right).reshape(len(self), *self.H.shape)


def _empty(H, T, d) -> BipartitePlan:
    z = np.zeros((0, d, d), dtype=complex)
    return BipartitePlan(H, T, np.zeros(0), z, z.copy())


def combine_plans(plans, weights, H_target=None) -> BipartitePlan:
    """Concatenate plans for the same ``H`` with non-negative weights."""
    plans = list(plans)
    weights = [float(w) for w in weights]
    if any(w < 0 for w in weights):
        raise ValueError("weights must be non-negative")
    H = plans[0].H
    if H_target is None:
        H_target = sum(w * p.H_target for w, p in zip(weights, plans))
    return BipartitePlan(
        H,
        np.asarray(H_target),
        np.concatenate([w * p.taus for w, p in zip(weights, plans)]),
        np.concatenate([p.left for p in plans]),
        np.concatenate([p.right for p in plans]),
    )


def _require_transformer(G: MatrixGroup, name: str):
    ok, value = is_transformer(G)
    if not ok:
        raise GroupError(f"{name} is not a universal transformer (sum |chi|^4 = {value:.6g})")


def _rank_one_map(target, source) -> np.ndarray:
    """Real linear map on su(d) sending ``source`` to ``target``, zero on its complement."""
    s = vec_su(source)
    return np.outer(vec_su(target), s) / float(s @ s)


def simulate_product_term(T1: MatrixGroup, T2: MatrixGroup, H, C, D) -> BipartitePlan:
    """Plan turning the coupling of ``H`` into ``C (x) D``.

    Left map sends the leading Schmidt factor ``A_1`` to ``C``; right map
    sends ``B_1`` to ``D`` and every other ``B_j`` to zero.  The plan also
    carries whatever local terms of ``H`` survive the two maps.
    """
    H = as_hamiltonian(H)
    d = T1.dim
    if T2.dim != d or H.shape[0] != d * d:
        raise BipartiteError("group and Hamiltonian dimensions do not match")
    _require_transformer(T1, "T1")
    _require_transformer(T2, "T2")
    _, _, sch = operator_schmidt(H, d)
    if len(sch) == 0:
        raise BipartiteError("Hamiltonian has no coupling to transform")
    C = np.asarray(C, dtype=complex)
    D = np.asarray(D, dtype=complex)
    target = np.kron(C, D)
    if np.linalg.norm(C) <= LOCAL_TOL or np.linalg.norm(D) <= LOCAL_TOL:
        return _empty(H, target, d)
    p = decompose_linear_map(T1, _rank_one_map(C, sch.left[0]))
    f = decompose_linear_map(T2, _rank_one_map(D, sch.right[0]))
    taus = np.outer(p, f).ravel()
    left = np.repeat(T1.elements, T2.order, axis=0)
    right = np.tile(T2.elements, (T1.order, 1, 1))
    return BipartitePlan(H, target, taus, left, right)


def bipartite_synthesize(T1: MatrixGroup, T2: MatrixGroup, H, H_target) -> BipartitePlan:
    """Plan simulating an arbitrary ``H_target`` from ``H`` with local transformer controls.

    Coupling terms ``J~_ab s_a (x) s_b`` are simulated one by one.  The
    local terms that come along are then corrected: ``(a~ - a') (x) 1`` is
    produced by annihilating the right factor while mapping ``a`` on the
    left, and symmetrically on the right.  This needs ``a != 0`` (resp.
    ``b != 0``) only when a correction is actually required.
    """
    H = as_hamiltonian(H)
    T = as_hamiltonian(H_target)
    d = T1.dim
    if T2.dim != d or H.shape != (d * d, d * d) or T.shape != H.shape:
        raise BipartiteError("group and Hamiltonian dimensions do not match")
    _require_transformer(T1, "T1")
    _require_transformer(T2, "T2")
    a, b, sch = operator_schmidt(H, d)
    if len(sch) == 0:
        raise BipartiteError("Hamiltonian has no non-trivial coupling")
    eye = np.eye(d, dtype=complex)[None]
    scale = max(1.0, float(np.linalg.norm(T)))
    if np.linalg.norm(T - H) <= 1e-12 * scale:
        return BipartitePlan(H, T, np.ones(1), eye.copy(), eye.copy())

    ta, tb, tJ = product_coefficients(T, d)
    basis = gell_mann_basis(d)
    parts = []
    m = d * d - 1
    for alpha in range(m):
        for beta in range(m):
            if abs(tJ[alpha, beta]) > LOCAL_TOL * scale:
                parts.append(simulate_product_term(T1, T2, H, tJ[alpha, beta] * basis[alpha], basis[beta]))
    coupling_plan = combine_plans(parts, [1.0] * len(parts)) if parts else _empty(H, T, d)
    a_inc, b_inc, _ = product_coefficients(coupling_plan.average(), d)

    ann = annihilator_sequence(heisenberg_basis(d)).frames()
    n_ann = len(ann)
    fixes = []
    da = ta - a_inc
    if np.linalg.norm(da) > LOCAL_TOL * scale:
        if np.linalg.norm(a) <= LOCAL_TOL:
            raise SimulationInfeasible("target needs a left local term but H has none (a = 0)")
        p = decompose_linear_map(T1, _rank_one_map(da, a))
        fixes.append(
            BipartitePlan(
                H,
                np.kron(da, eye[0]),
                np.repeat(p, n_ann) / n_ann,
                np.repeat(T1.elements, n_ann, axis=0),
                np.tile(ann, (T1.order, 1, 1)),
            )
        )
    db = tb - b_inc
    if np.linalg.norm(db) > LOCAL_TOL * scale:
        if np.linalg.norm(b) <= LOCAL_TOL:
            raise SimulationInfeasible("target needs a right local term but H has none (b = 0)")
        f = decompose_linear_map(T2, _rank_one_map(db, b))
        fixes.append(
            BipartitePlan(
                H,
                np.kron(eye[0], db),
                np.tile(f, n_ann) / n_ann,
                np.repeat(ann, T2.order, axis=0),
                np.tile(T2.elements, (n_ann, 1, 1)),
            )
        )
    plans = [coupling_plan] + fixes
    plan = combine_plans(plans, [1.0] * len(plans), H_target=T)
    res = plan.residual
    if res > RESIDUAL_TOL * scale:
        raise SimulationError(f"bipartite plan residual {res:.3e} exceeds tolerance")
    return plan
