"""Finite unitary matrix groups and the universal-transformer criterion.

A group is stored as an explicit stack of unitary matrices.  The natural
representation's character decides whether the group can realize every real
linear map on traceless Hermitian matrices as a positive combination of
conjugations: for an irreducible character this holds exactly when
``sum_g |chi(g)|^4 == 2 |G|``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linalg import (
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
    dagger,
    gell_mann_basis,
)

__all__ = [
    "Character",
    "GroupError",
    "GroupOrderError",
    "MatrixGroup",
    "NotIrreducibleError",
    "DecompositionError",
    "adjoint_irreducible",
    "adjoint_stack",
    "character",
    "close_group",
    "decompose_linear_map",
    "gl3f2_generators",
    "gl3f2_transformer",
    "group_average",
    "is_transformer",
    "pauli_group",
    "sl2f3_generators",
    "sl2f3_transformer",
]

UNITARY_TOL = 1e-9
MATCH_TOL = 1e-7
KEY_GRID = 1e-6
CRITERION_TOL = 1e-6
DECOMP_TOL = 1e-7
SHIFT_MARGIN = 1e-12


class GroupError(ValueError):
    pass


class GroupOrderError(GroupError):
    """Closure exceeded ``max_order``."""


class NotIrreducibleError(GroupError):
    """Natural representation is reducible; the character criterion does not apply."""


class DecompositionError(RuntimeError):
    """Linear map could not be written as a combination of conjugations."""


@dataclass(frozen=True, eq=False)
class MatrixGroup:
    elements: np.ndarray  # shape (n, d, d)
    identity_index: int = 0
    generators: tuple[int, ...] = ()
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def dim(self) -> int:
        return self.elements.shape[1]

    @property
    def order(self) -> int:
        return self.elements.shape[0]

    def __len__(self):
        return self.order

    def index(self, M, tol: float = MATCH_TOL) -> int:
        """Index of the element equal to ``M`` within ``tol``, or -1."""
        dist = np.linalg.norm(self.elements - np.asarray(M)[None], axis=(1, 2))
        k = int(np.argmin(dist))
        return k if dist[k] <= tol else -1

    @property
    def cayley(self) -> np.ndarray:
        """Multiplication table ``cayley[i, j] = index(elements[i] @ elements[j])``."""
        if "cayley" not in self._cache:
            lookup = _Lookup(self.elements)
            n = self.order
            table = np.empty((n, n), dtype=int)
            for i in range(n):
                prods = self.elements[i][None] @ self.elements
                for j in range(n):
                    k = lookup.find(prods[j])
                    if k < 0:
                        raise GroupError("element set is not closed under multiplication")
                    table[i, j] = k
            self._cache["cayley"] = table
        return self._cache["cayley"]

    @property
    def adjoint_matrices(self) -> np.ndarray:
        """Adjoint action of each element on su(d) coordinates, shape (n, m, m)."""
        if "adjoint" not in self._cache:
            self._cache["adjoint"] = adjoint_stack(self.elements)
        return self._cache["adjoint"]


def _key(M) -> tuple:
    r = np.rint(np.concatenate([M.real.ravel(), M.imag.ravel()]) / KEY_GRID).astype(np.int64)
    return tuple(r.tolist())


class _Lookup:
    """Hash-grid index over a growing list of matrices."""

    def __init__(self, mats=()):
        self.mats: list[np.ndarray] = []
        self.table: dict[tuple, list[int]] = {}
        self._buf = None
        for M in mats:
            self.add(M)

    def add(self, M) -> int:
        n = len(self.mats)
        if self._buf is None:
            self._buf = np.empty((16,) + M.shape, dtype=complex)
        elif n == self._buf.shape[0]:
            self._buf = np.concatenate([self._buf, np.empty_like(self._buf)])
        self._buf[n] = M
        self.mats.append(M)
        self.table.setdefault(_key(M), []).append(n)
        return n

    def find(self, M) -> int:
        for idx in self.table.get(_key(M), ()):
            if np.linalg.norm(self.mats[idx] - M) < MATCH_TOL:
                return idx
        # Rounding noise can straddle a grid boundary; confirm a miss by scanning.
        n = len(self.mats)
        if n:
            dist = np.linalg.norm(self._buf[:n] - M[None], axis=(1, 2))
            k = int(np.argmin(dist))
            if dist[k] < MATCH_TOL:
                return k
        return -1


def close_group(generators, max_order: int = 10_000) -> MatrixGroup:
    """Breadth-first closure of a set of unitary generators.

    Raises :class:`GroupOrderError` if more than ``max_order`` distinct
    elements appear (an infinite group, or just a large one).
    """
    gens = [np.asarray(g, dtype=complex) for g in generators]
    if not gens:
        raise GroupError("at least one generator is required")
    d = gens[0].shape[0]
    for g in gens:
        if g.shape != (d, d):
            raise GroupError("generators must be square matrices of equal dimension")
        if np.linalg.norm(dagger(g) @ g - np.eye(d)) > UNITARY_TOL:
            raise GroupError("generator is not unitary")

    lookup = _Lookup([np.eye(d, dtype=complex)])
    gen_idx = []
    for g in gens:
        k = lookup.find(g)
        if k < 0:
            k = lookup.add(g)
        gen_idx.append(k)
    frontier = list(range(len(lookup.mats)))
    while frontier:
        new = []
        for i in frontier:
            for g in gens:
                P = lookup.mats[i] @ g
                if lookup.find(P) < 0:
                    new.append(lookup.add(P))
                    if len(lookup.mats) > max_order:
                        raise GroupOrderError(
                            f"group order exceeds max_order={max_order}"
                        )
        frontier = new
    return MatrixGroup(np.array(lookup.mats), 0, tuple(gen_idx))


@dataclass(frozen=True)
class Character:
    values: np.ndarray

    @property
    def fourth_power_sum(self) -> float:
        return float(np.sum(np.abs(self.values) ** 4))

    @property
    def norm_squared(self) -> float:
        """``<chi, chi> = (1/|G|) sum |chi(g)|^2``; equals 1 iff irreducible."""
        return float(np.mean(np.abs(self.values) ** 2))


def character(group: MatrixGroup) -> Character:
    return Character(np.trace(group.elements, axis1=1, axis2=2))


def is_transformer(group: MatrixGroup) -> tuple[bool, float]:
    """Character test for a universal transformer.

    Returns ``(verdict, sum_g |chi(g)|^4)``.  Only valid for an irreducible
    natural representation; raises :class:`NotIrreducibleError` otherwise.
    """
    chi = character(group)
    if abs(chi.norm_squared - 1.0) > CRITERION_TOL:
        raise NotIrreducibleError(
            f"natural representation is reducible (<chi,chi> = {chi.norm_squared:.6g})"
        )
    s = chi.fourth_power_sum
    return abs(s - 2 * group.order) <= CRITERION_TOL * group.order, s


def adjoint_irreducible(group: MatrixGroup) -> bool:
    """True iff conjugation acts irreducibly on the traceless matrices.

    The traceless part of the adjoint action has character ``|chi|^2 - 1``;
    its norm is computed directly, without going through the fourth-power
    identity.
    """
    chi_ad = np.abs(character(group).values) ** 2 - 1.0
    return abs(float(np.mean(chi_ad**2)) - 1.0) <= CRITERION_TOL


def group_average(group: MatrixGroup, M) -> np.ndarray:
    """``(1/|G|) sum_g U_g^dagger M U_g``."""
    M = np.asarray(M, dtype=complex)
    if M.shape != (group.dim, group.dim):
        raise ValueError("matrix dimension does not match the group")
    U = group.elements
    return np.mean(dagger(U) @ M[None] @ U, axis=0)


def adjoint_stack(unitaries) -> np.ndarray:
    U = np.asarray(unitaries, dtype=complex)
    d = U.shape[1]
    basis = gell_mann_basis(d)
    # conj[n, b] = U_n^dagger s_b U_n ; coordinates via tr(s_a X) / d.
    conj = dagger(U)[:, None] @ basis[None] @ U[:, None]
    return np.einsum("aji,nbij->nab", basis, conj).real / d


def decompose_linear_map(group: MatrixGroup, L, tol: float = DECOMP_TOL) -> np.ndarray:
    """Write a real linear map on su(d) as ``sum_j p_j Ad(U_j)`` with ``p_j >= 0``.

    ``L`` is the ``(d^2-1) x (d^2-1)`` matrix of the map in
    :func:`~hamsim.linalg.vec_su` coordinates.  Returns one coefficient per
    group element (aligned with ``group.elements``).

    Real coefficients come from a least-squares fit over the adjoint
    matrices.  Adding the same constant to every coefficient adds a multiple
    of the uniform group average, which vanishes on traceless matrices for an
    irreducible group, so the coefficients are then shifted to be positive.
    """
    L = np.asarray(L, dtype=float)
    m = group.dim**2 - 1
    if L.shape != (m, m):
        raise ValueError(f"linear map must be {m}x{m}")
    Ad = group.adjoint_matrices
    A = Ad.reshape(group.order, m * m).T
    q, *_ = np.linalg.lstsq(A, L.ravel(), rcond=None)
    shift = max(0.0, -float(q.min())) + SHIFT_MARGIN
    p = q + shift
    residual = float(np.linalg.norm(np.einsum("n,nab->ab", p, Ad) - L))
    if residual > tol * max(1.0, float(np.linalg.norm(L))):
        raise DecompositionError(
            f"map is not a combination of conjugations (residual {residual:.3e})"
        )
    return p


def pauli_group() -> MatrixGroup:
    """Quaternion group generated by ``i sx, i sy, i sz`` (order 8)."""
    return close_group([1j * PAULI_X, 1j * PAULI_Y, 1j * PAULI_Z], max_order=8)


SL2F3_R = (1j - 1) / 2 * np.array([[1j, 1j], [-1, 1]], dtype=complex)


def sl2f3_generators() -> list[np.ndarray]:
    return [1j * PAULI_X, 1j * PAULI_Y, 1j * PAULI_Z, SL2F3_R.copy()]


def sl2f3_transformer() -> MatrixGroup:
    """Order-24 qubit transformer: the Pauli quaternions plus the cyclic automorphism ``R``."""
    G = close_group(sl2f3_generators(), max_order=24)
    if G.order != 24:
        raise GroupError(f"SL(2,3) closure has order {G.order}, expected 24")
    return G


def gl3f2_generators() -> list[np.ndarray]:
    """Images of the order-2 and order-7 generators of GL(3, 2) in its 3-dim irrep."""
    z = np.exp(2j * np.pi / 7)
    c1, c3, c5 = (np.cos(k * np.pi / 14) for k in (1, 3, 5))
    x = (2 / np.sqrt(7)) * np.array(
        [
            [c5, -(z**3) * c1, -(z**2) * c3],
            [-(z**4) * c1, -c3, z**6 * c5],
            [-(z**5) * c3, z * c5, -c1],
        ],
        dtype=complex,
    )
    y = np.diag([z, z**2, z**4]).astype(complex)
    return [x, y]


def gl3f2_transformer() -> MatrixGroup:
    """Order-168 qutrit transformer."""
    G = close_group(gl3f2_generators(), max_order=168)
    if G.order != 168:
        raise GroupError(f"GL(3,2) closure has order {G.order}, expected 168")
    return G
