"""First-order simulation of a target Hamiltonian by a given one.

A plan is a list of ``(tau_j, U_j)`` with ``sum_j tau_j U_j^dagger H U_j``
equal to the target; ``sum_j tau_j`` is the time overhead.  Spectra give a
lower bound on that overhead (majorization), which is attained when the
controls may permute the eigenvectors of ``H`` and rotate into the target's
eigenbasis; over a finite group the optimal plan is a linear program.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching

from . import simplex
from .groups import MatrixGroup
from .linalg import as_hamiltonian, dagger, hermitian_eig, vec_su
from .sequences import PulseSequence

__all__ = [
    "BirkhoffDecomposition",
    "SimulationError",
    "SimulationInfeasible",
    "SimulationPlan",
    "average_hamiltonian",
    "birkhoff_decompose",
    "eigenbasis_synthesis",
    "is_majorized",
    "lp_synthesize",
    "majorization_lower_bound",
    "majorization_transfer",
    "plan_to_sequence",
]

ZERO_TOL = 1e-12
RESIDUAL_TOL = 1e-7
STOCHASTIC_TOL = 1e-9
MAJOR_TOL = 1e-9


class SimulationError(RuntimeError):
    """A synthesized plan missed its tolerance."""


class SimulationInfeasible(ValueError):
    """The target is not reachable with the available controls."""


@dataclass(frozen=True, eq=False)
class SimulationPlan:
    H: np.ndarray
    H_target: np.ndarray
    taus: np.ndarray  # (k,)
    unitaries: np.ndarray  # (k, d, d)
    lower_bound: float = 0.0
    residual: float = 0.0
    status: str = "success"

    @property
    def achieved_overhead(self) -> float:
        return float(np.sum(self.taus))

    @property
    def terms(self):
        return list(zip(self.taus, self.unitaries))

    def __len__(self):
        return len(self.taus)


@dataclass(frozen=True, eq=False)
class BirkhoffDecomposition:
    weights: np.ndarray
    permutations: list = field(default_factory=list)  # perm[i] = column of the 1 in row i
    source: np.ndarray | None = None

    def matrices(self) -> np.ndarray:
        n = len(self.permutations[0]) if self.permutations else 0
        out = np.zeros((len(self.permutations), n, n))
        for k, perm in enumerate(self.permutations):
            out[k, np.arange(n), perm] = 1.0
        return out

    def reconstruct(self) -> np.ndarray:
        return np.einsum("k,kij->ij", self.weights, self.matrices())


def _is_zero(H) -> bool:
    return float(np.linalg.norm(H)) <= ZERO_TOL


def is_majorized(x, y, tol: float = MAJOR_TOL) -> bool:
    """``x`` is majorized by ``y``: sorted prefix sums bounded, totals equal."""
    xs = np.cumsum(np.sort(np.asarray(x, dtype=float))[::-1])
    ys = np.cumsum(np.sort(np.asarray(y, dtype=float))[::-1])
    if xs.shape != ys.shape:
        raise ValueError("vectors must have equal length")
    scale = max(1.0, float(np.abs(ys).max(initial=0.0)))
    return bool(np.all(xs[:-1] <= ys[:-1] + tol * scale) and abs(xs[-1] - ys[-1]) <= tol * scale)


def majorization_lower_bound(H, H_target) -> float:
    """Smallest ``tau`` with ``Spec(H_target)`` majorized by ``tau * Spec(H)``."""
    H = as_hamiltonian(H)
    T = as_hamiltonian(H_target)
    if _is_zero(T):
        return 0.0
    if _is_zero(H):
        raise SimulationInfeasible("zero Hamiltonian cannot simulate a nonzero target")
    lam = np.cumsum(hermitian_eig(H)[0])[:-1]
    mu = np.cumsum(hermitian_eig(T)[0])[:-1]
    return max(0.0, float(np.max(mu / lam)))


def _perfect_matching(support) -> np.ndarray | None:
    n = support.shape[0]
    match = maximum_bipartite_matching(csr_matrix(support.astype(np.int8)), perm_type="column")
    if np.any(match < 0) or len(match) != n:
        return None
    return match


def birkhoff_decompose(D, tol: float = 1e-13) -> BirkhoffDecomposition:
    """Peel permutation matrices off a doubly stochastic matrix.

    Each step picks the perfect matching on the positive support whose
    smallest entry is largest, then subtracts that entry times the
    permutation; at least one entry drops to zero per step.
    """
    D = np.array(D, dtype=float)
    if D.ndim != 2 or D.shape[0] != D.shape[1]:
        raise ValueError("doubly stochastic matrix must be square")
    n = D.shape[0]
    if (
        D.min() < -1e-12
        or np.abs(D.sum(axis=0) - 1).max() > STOCHASTIC_TOL
        or np.abs(D.sum(axis=1) - 1).max() > STOCHASTIC_TOL
    ):
        raise ValueError("matrix is not doubly stochastic")
    source = D.copy()
    R = np.clip(D, 0.0, None)
    weights, perms = [], []
    while R.max() > tol and len(perms) <= n * n:
        values = np.unique(R[R > tol])
        lo, hi = 0, len(values) - 1
        best = None
        # Binary search for the largest threshold admitting a perfect matching.
        while lo <= hi:
            mid = (lo + hi) // 2
            match = _perfect_matching(R >= values[mid])
            if match is None:
                hi = mid - 1
            else:
                best, lo = match, mid + 1
        if best is None:
            raise ValueError("no perfect matching on the positive support; not doubly stochastic")
        w = float(R[np.arange(n), best].min())
        R[np.arange(n), best] -= w
        R[R <= tol] = 0.0
        weights.append(w)
        perms.append(np.asarray(best, dtype=int))
    if R.max() > tol:
        raise ValueError("Birkhoff peeling did not terminate; input not doubly stochastic")
    return BirkhoffDecomposition(np.array(weights), perms, source)


def majorization_transfer(x, y, tol: float = MAJOR_TOL) -> np.ndarray:
    """Doubly stochastic ``D`` with ``D @ y == x`` for ``x`` majorized by ``y``.

    ``D`` is a product of at most ``n - 1`` T-transforms, each averaging two
    coordinates of ``y``.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if not is_majorized(x, y, tol):
        raise ValueError("x is not majorized by y")
    n = len(x)
    px = np.argsort(-x, kind="stable")
    py = np.argsort(-y, kind="stable")
    xs, z = x[px], y[py].copy()
    scale = max(1.0, float(np.abs(y).max(initial=0.0)))
    eps = 1e-14 * scale
    Dsorted = np.eye(n)
    for _ in range(n - 1):
        diff = z - xs
        above = np.nonzero(diff > eps)[0]
        if len(above) == 0:
            break
        j = above[-1]
        below = [k for k in range(j + 1, n) if diff[k] < -eps]
        if not below:
            break
        k = below[0]
        delta = min(z[j] - xs[j], xs[k] - z[k])
        t = 1.0 - delta / (z[j] - z[k])
        Tm = np.eye(n)
        Tm[[j, k], [j, k]] = t
        Tm[j, k] = Tm[k, j] = 1.0 - t
        z = Tm @ z
        Dsorted = Tm @ Dsorted
    # x = Px xs, xs = Dsorted ys, ys = Py^T y.
    Px = np.zeros((n, n))
    Px[px, np.arange(n)] = 1.0
    Py = np.zeros((n, n))
    Py[py, np.arange(n)] = 1.0
    return Px @ Dsorted @ Py.T


def _residual(taus, unitaries, H, T) -> float:
    if len(taus) == 0:
        return float(np.linalg.norm(T))
    U = np.asarray(unitaries)
    avg = np.einsum("n,nij->ij", np.asarray(taus), dagger(U) @ H[None] @ U)
    return float(np.linalg.norm(avg - T))


def _check(plan: SimulationPlan) -> SimulationPlan:
    if plan.residual > RESIDUAL_TOL * max(1.0, float(np.linalg.norm(plan.H_target))):
        raise SimulationError(f"plan residual {plan.residual:.3e} exceeds tolerance")
    if plan.achieved_overhead < plan.lower_bound - RESIDUAL_TOL:
        raise SimulationError("plan beats the spectral lower bound; numerical failure")
    return plan


def _empty_plan(H, T) -> SimulationPlan:
    d = H.shape[0]
    return SimulationPlan(H, T, np.zeros(0), np.zeros((0, d, d), dtype=complex), 0.0, float(np.linalg.norm(T)))


def eigenbasis_synthesis(H, H_target) -> SimulationPlan:
    """Plan attaining the majorization bound with unrestricted controls.

    Eigenvalue permutations of ``H`` are mixed by a Birkhoff decomposition
    of the transfer matrix between the scaled spectra, then rotated into the
    target's eigenbasis.
    """
    H = as_hamiltonian(H)
    T = as_hamiltonian(H_target)
    if H.shape != T.shape:
        raise ValueError("dimension mismatch")
    tau = majorization_lower_bound(H, T)
    if _is_zero(T):
        return _empty_plan(H, T)
    lam, W = hermitian_eig(H)
    mu, Wt = hermitian_eig(T)
    D = majorization_transfer(mu, tau * lam)
    bd = birkhoff_decompose(D)
    taus = tau * bd.weights
    # P diag(lam) P^T = diag(P lam); conjugator maps H's eigenbasis onto the target's.
    unitaries = np.array([W @ P.T @ dagger(Wt) for P in bd.matrices()])
    plan = SimulationPlan(H, T, taus, unitaries, tau, _residual(taus, unitaries, H, T))
    return _check(plan)


def lp_synthesize(group: MatrixGroup, H, H_target) -> SimulationPlan:
    """Minimum-overhead plan using conjugations by elements of ``group``.

    Solves ``min sum tau_j`` subject to ``sum_j tau_j vec(U_j^dagger H U_j)
    = vec(H_target)``, ``tau >= 0``.  Raises :class:`SimulationInfeasible`
    when the target is outside the cone of conjugates.
    """
    H = as_hamiltonian(H)
    T = as_hamiltonian(H_target)
    if H.shape != T.shape or group.dim != H.shape[0]:
        raise ValueError("dimension mismatch between group and Hamiltonians")
    bound = majorization_lower_bound(H, T)
    if _is_zero(T):
        return _empty_plan(H, T)
    U = group.elements
    conj = dagger(U) @ H[None] @ U
    cols = np.array([vec_su(M) for M in conj])
    # Identical conjugates (e.g. from central phases) add nothing but degeneracy.
    _, first = np.unique(np.round(cols, 9), axis=0, return_index=True)
    first = np.sort(first)
    sH, sT = float(np.linalg.norm(H)), float(np.linalg.norm(T))
    A = cols[first].T / sH
    b = vec_su(T) / sT
    try:
        res = simplex.solve(np.ones(len(first)), A, b)
    except simplex.InfeasibleError as exc:
        raise SimulationInfeasible("target is not a positive combination of conjugates") from exc
    x = res.x * (sT / sH)
    nz = np.nonzero(x > 0)[0]
    taus = x[nz]
    unitaries = U[first[nz]]
    plan = SimulationPlan(H, T, taus, unitaries, bound, _residual(taus, unitaries, H, T))
    return _check(plan)


def average_hamiltonian(obj, H) -> np.ndarray:
    """``sum tau_i U_i^dagger H U_i`` over a plan's terms or a sequence's frames.

    For a plan the weights carry the overhead; for a :class:`PulseSequence`
    the relative times are used, so multiply by ``seq.overhead`` to compare
    with a target.
    """
    H = np.asarray(H, dtype=complex)
    if isinstance(obj, PulseSequence):
        if obj.dim != H.shape[0]:
            raise ValueError("dimension mismatch")
        return obj.average(H)
    if isinstance(obj, SimulationPlan):
        if obj.H.shape != H.shape:
            raise ValueError("dimension mismatch")
        if len(obj) == 0:
            return np.zeros_like(H)
        U = obj.unitaries
        return np.einsum("n,nij->ij", obj.taus, dagger(U) @ H[None] @ U)
    raise TypeError(f"expected SimulationPlan or PulseSequence, got {type(obj).__name__}")


def plan_to_sequence(plan: SimulationPlan) -> PulseSequence:
    """Cyclic pulse sequence whose toggling frames are the plan's unitaries."""
    if len(plan) == 0:
        raise ValueError("cannot build a pulse sequence from an empty plan")
    total = plan.achieved_overhead
    return PulseSequence.from_frames(plan.unitaries, plan.taus / total, total)
