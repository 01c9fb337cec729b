"""Dense complex linear algebra used throughout the package.

Matrices are plain ``numpy`` arrays of dtype ``complex128``.  A Hamiltonian is
a Hermitian traceless matrix; :func:`as_hamiltonian` validates (and absorbs
float noise in) candidate matrices.  Coordinates on the traceless Hermitian
matrices are taken in a generalized Gell-Mann basis normalized so that
``trace_inner(s_a, s_b) = delta_ab``; for ``d = 2`` this is the Pauli basis
``(sx, sy, sz)``.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

__all__ = [
    "ConvergenceError",
    "HamiltonianError",
    "adjoint_matrix",
    "as_hamiltonian",
    "conjugate",
    "dagger",
    "expm",
    "gell_mann_basis",
    "hermitian_eig",
    "random_hamiltonian",
    "random_unitary",
    "spectrum",
    "trace_inner",
    "unvec_su",
    "vec_su",
    "PAULI_I",
    "PAULI_X",
    "PAULI_Y",
    "PAULI_Z",
]

PAULI_I = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)

# Hamiltonian validation: symmetrize below this deviation, reject above.
REPAIR_TOL = 1e-8

JACOBI_MAX_SWEEPS = 100
JACOBI_TOL = 1e-12


class HamiltonianError(ValueError):
    """Matrix is not (close enough to) Hermitian and traceless."""


class ConvergenceError(RuntimeError):
    """Iterative routine hit its iteration cap."""


def _square(A, name="matrix"):
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] < 1:
        raise ValueError(f"{name} must be a non-empty square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError(f"{name} has non-finite entries")
    return A


def dagger(A):
    return np.conj(np.swapaxes(A, -1, -2))


def conjugate(U, H):
    """Return ``U^dagger H U``."""
    return dagger(U) @ H @ U


def trace_inner(A, B) -> complex:
    """Normalized trace inner product ``tr(A^dagger B) / d``."""
    A = _square(A, "A")
    B = _square(B, "B")
    if A.shape != B.shape:
        raise ValueError(f"dimension mismatch: {A.shape} vs {B.shape}")
    return complex(np.vdot(A, B) / A.shape[0])


def as_hamiltonian(M, tol: float = REPAIR_TOL) -> np.ndarray:
    """Validate ``M`` as a Hamiltonian and return a cleaned copy.

    Deviations from hermiticity or tracelessness smaller than
    ``tol * max(1, ||M||_F)`` are projected away; larger ones raise
    :class:`HamiltonianError`.
    """
    M = _square(M, "Hamiltonian")
    d = M.shape[0]
    scale = max(1.0, float(np.linalg.norm(M)))
    herm_dev = float(np.linalg.norm(M - dagger(M)))
    if herm_dev > tol * scale:
        raise HamiltonianError(f"matrix is not Hermitian (deviation {herm_dev:.3e})")
    tr = np.trace(M)
    if abs(tr) > tol * scale:
        raise HamiltonianError(f"matrix is not traceless (trace {tr:.3e})")
    H = 0.5 * (M + dagger(M))
    H = H - (np.trace(H).real / d) * np.eye(d)
    return H


def _jacobi_rotate(A, V, p, q):
    b = A[p, q]
    r = abs(b)
    if r == 0.0:
        return
    phase = b / r
    a, c = A[p, p].real, A[q, q].real
    theta = 0.5 * np.arctan2(2.0 * r, c - a)
    cs, sn = np.cos(theta), np.sin(theta)
    # Unitary acting on coordinates (p, q): phase-fix column q, then rotate.
    J = np.array([[cs, sn], [-sn * np.conj(phase), cs * np.conj(phase)]], dtype=complex)
    idx = [p, q]
    A[:, idx] = A[:, idx] @ J
    A[idx, :] = dagger(J) @ A[idx, :]
    A[q, p] = 0.0
    A[p, q] = 0.0
    V[:, idx] = V[:, idx] @ J


def _offdiag_norm(A):
    return float(np.linalg.norm(A - np.diag(np.diag(A))))


def hermitian_eig(H):
    """Eigendecomposition of a Hermitian matrix by cyclic Jacobi sweeps.

    Returns ``(eigenvalues, V)`` with eigenvalues sorted non-increasing (ties
    kept in diagonal order) and ``H = V diag(eigenvalues) V^dagger``.
    """
    A = _square(H, "H").copy()
    if np.linalg.norm(A - dagger(A)) > REPAIR_TOL * max(1.0, np.linalg.norm(A)):
        raise HamiltonianError("hermitian_eig requires a Hermitian matrix")
    A = 0.5 * (A + dagger(A))
    d = A.shape[0]
    V = np.eye(d, dtype=complex)
    target = JACOBI_TOL * float(np.linalg.norm(A))
    for _ in range(JACOBI_MAX_SWEEPS):
        if _offdiag_norm(A) <= target:
            break
        for p in range(d - 1):
            for q in range(p + 1, d):
                _jacobi_rotate(A, V, p, q)
    else:
        if _offdiag_norm(A) > target:
            raise ConvergenceError(f"Jacobi did not converge in {JACOBI_MAX_SWEEPS} sweeps")
    evals = np.diag(A).real.copy()
    order = np.argsort(-evals, kind="stable")
    return evals[order], V[:, order]


def spectrum(H) -> np.ndarray:
    """Eigenvalues of ``H`` sorted non-increasing."""
    return hermitian_eig(H)[0]


def expm(A) -> np.ndarray:
    """Matrix exponential by scaling and squaring of a truncated Taylor series.

    Accurate to ~1e-12 relative for ``||A||_F <= 50``.
    """
    if not np.all(np.isfinite(np.asarray(A))):
        raise OverflowError("matrix has non-finite entries")
    A = _square(A, "A")
    d = A.shape[0]
    norm = float(np.linalg.norm(A, 1))
    if not np.isfinite(norm):
        raise OverflowError("matrix norm is not finite")
    s = 0
    if norm > 0.5:
        s = int(np.ceil(np.log2(norm / 0.5)))
    B = A / (2.0**s)
    result = np.eye(d, dtype=complex)
    term = np.eye(d, dtype=complex)
    for k in range(1, 60):
        term = term @ B / k
        result = result + term
        if np.linalg.norm(term, 1) <= np.finfo(float).eps * np.linalg.norm(result, 1):
            break
    for _ in range(s):
        result = result @ result
    if not np.all(np.isfinite(result)):
        raise OverflowError("matrix exponential overflowed")
    return result


@lru_cache(maxsize=None)
def _gell_mann(d: int) -> np.ndarray:
    mats = []
    scale = np.sqrt(d / 2.0)
    for j in range(d):
        for k in range(j + 1, d):
            m = np.zeros((d, d), dtype=complex)
            m[j, k] = m[k, j] = scale
            mats.append(m)
    for j in range(d):
        for k in range(j + 1, d):
            m = np.zeros((d, d), dtype=complex)
            m[j, k] = -1j * scale
            m[k, j] = 1j * scale
            mats.append(m)
    for l in range(1, d):
        diag = np.zeros(d)
        diag[:l] = 1.0
        diag[l] = -l
        mats.append(np.diag(diag * np.sqrt(d / (l * (l + 1)))).astype(complex))
    basis = np.array(mats).reshape(d * d - 1, d, d)
    basis.setflags(write=False)
    return basis


def gell_mann_basis(d: int) -> np.ndarray:
    """Orthonormal basis of traceless Hermitian ``d x d`` matrices.

    Order: symmetric ``(j, k)`` pairs, antisymmetric pairs, then the
    ``d - 1`` diagonal elements.  Shape ``(d**2 - 1, d, d)``, read-only.
    """
    if d < 2:
        raise ValueError("su(d) basis requires d >= 2")
    return _gell_mann(int(d))


def vec_su(H) -> np.ndarray:
    """Real coordinates of a traceless Hermitian matrix in :func:`gell_mann_basis`."""
    H = np.asarray(H, dtype=complex)
    d = H.shape[0]
    basis = gell_mann_basis(d)
    # tr(s_a H) / d; s_a Hermitian, so this is <s_a, H>.
    return np.einsum("aji,ij->a", basis, H).real / d


def unvec_su(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    n = v.shape[0] + 1
    d = int(round(np.sqrt(n)))
    if d * d != n:
        raise ValueError(f"vector length {v.shape[0]} is not d^2 - 1")
    return np.einsum("a,aij->ij", v, gell_mann_basis(d))


def adjoint_matrix(U) -> np.ndarray:
    """Real matrix of ``A -> U^dagger A U`` acting on :func:`vec_su` coordinates."""
    U = np.asarray(U, dtype=complex)
    d = U.shape[0]
    basis = gell_mann_basis(d)
    conj = dagger(U)[None] @ basis @ U[None]
    # Column b holds the coordinates of U^dagger s_b U.
    return (np.einsum("aji,bij->ab", basis, conj).real / d)


def random_hamiltonian(d: int, rng=None, scale: float = 1.0) -> np.ndarray:
    """Random traceless Hermitian matrix from a GUE-like ensemble."""
    rng = np.random.default_rng(rng)
    X = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    H = 0.5 * (X + dagger(X))
    H -= (np.trace(H).real / d) * np.eye(d)
    return scale * H


def random_unitary(d: int, rng=None) -> np.ndarray:
    """Haar-random unitary via QR with phase correction."""
    rng = np.random.default_rng(rng)
    Z = (rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))) / np.sqrt(2)
    Q, R = np.linalg.qr(Z)
    ph = np.diag(R) / np.abs(np.diag(R))
    return Q * ph
