"""Nice error bases and the sequences built from them.

Averaging ``U^dagger M U`` over a nice error basis projects onto multiples
of the identity, so one period through all ``d^2`` basis elements switches
off any traceless Hamiltonian (an annihilator), skipping the identity
inverts it, and acting on one tensor factor decouples a system from a bath.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import as_hamiltonian, dagger, hermitian_eig
from .sequences import PulseSequence

__all__ = [
    "NiceErrorBasis",
    "annihilator_sequence",
    "cyclic_shift",
    "cyclic_switch_off",
    "decouple",
    "decoupling_sequence",
    "heisenberg_basis",
    "inversion_lower_bound",
    "inversion_sequence",
]

ZERO_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class NiceErrorBasis:
    """Weyl-Heisenberg basis ``U_(i,j) = S^i T^j`` indexed by ``Z_d x Z_d``."""

    d: int
    labels: tuple[tuple[int, int], ...]
    matrices: np.ndarray  # (d*d, d, d), aligned with labels

    def __len__(self):
        return len(self.labels)

    def __getitem__(self, label) -> np.ndarray:
        i, j = label
        return self.matrices[(i % self.d) * self.d + (j % self.d)]

    def factor(self, g, h) -> complex:
        """Factor system: ``U_g U_h = factor(g, h) U_(g+h)``."""
        omega = np.exp(2j * np.pi / self.d)
        return complex(omega ** (-(g[1] * h[0]) % self.d))

    @property
    def identity_index(self) -> int:
        return 0


def cyclic_shift(d: int) -> np.ndarray:
    """``S`` with ones on the superdiagonal and in the bottom-left corner."""
    return np.roll(np.eye(d, dtype=complex), 1, axis=1)


def heisenberg_basis(d: int) -> NiceErrorBasis:
    if d < 2:
        raise ValueError("error basis requires d >= 2")
    S = cyclic_shift(d)
    T = np.diag(np.exp(2j * np.pi * np.arange(d) / d))
    labels, mats = [], []
    for i in range(d):
        Si = np.linalg.matrix_power(S, i)
        for j in range(d):
            labels.append((i, j))
            mats.append(Si @ np.linalg.matrix_power(T, j))
    return NiceErrorBasis(d, tuple(labels), np.array(mats))


def annihilator_sequence(basis: NiceErrorBasis) -> PulseSequence:
    """Minimal annihilator: all ``d^2`` frames with equal weight, identity last."""
    n = len(basis)
    order = [k for k in range(n) if k != basis.identity_index] + [basis.identity_index]
    return PulseSequence.from_frames(basis.matrices[order], np.full(n, 1.0 / n), 1.0)


def inversion_sequence(basis: NiceErrorBasis) -> PulseSequence:
    """Frames over the non-identity basis elements; simulates ``-H`` with overhead ``d^2 - 1``."""
    n = len(basis)
    order = [k for k in range(n) if k != basis.identity_index]
    return PulseSequence.from_frames(basis.matrices[order], np.full(n - 1, 1.0 / (n - 1)), n - 1)


def inversion_lower_bound(H) -> float:
    """``r / (-q)`` for the largest and smallest eigenvalues of ``H``."""
    H = as_hamiltonian(H)
    if np.linalg.norm(H) <= ZERO_TOL:
        raise ValueError("inversion bound is undefined for the zero Hamiltonian")
    evals = hermitian_eig(H)[0]
    return float(evals[0] / -evals[-1])


def _split_dims(D: int, d_sys: int) -> int:
    if d_sys < 1 or D % d_sys:
        raise ValueError(f"dimension {D} does not factor with system dimension {d_sys}")
    return D // d_sys


def decouple(basis: NiceErrorBasis, H_joint) -> np.ndarray:
    """Average ``(U_g^dagger x 1) H (U_g x 1)`` over the basis acting on the system factor.

    The result is ``1_S x H_B`` with ``H_B`` the normalized partial trace of
    ``H_joint`` over the system.
    """
    H = as_hamiltonian(H_joint)
    d_bath = _split_dims(H.shape[0], basis.d)
    U = np.kron(basis.matrices, np.eye(d_bath)[None])
    return np.mean(dagger(U) @ H[None] @ U, axis=0)


def decoupling_sequence(basis: NiceErrorBasis, d_bath: int) -> PulseSequence:
    """Annihilator frames on the system tensored with the bath identity."""
    seq = annihilator_sequence(basis)
    frames = np.kron(seq.frames(), np.eye(d_bath)[None])
    return PulseSequence.from_frames(frames, seq.times, seq.overhead)


def cyclic_switch_off(H) -> PulseSequence:
    """Length-``d`` sequence cycling the eigenbasis of a known ``H``.

    Frames are ``W S^j W^dagger`` for ``j = 1..d-1`` and finally ``j = 0``.
    """
    H = as_hamiltonian(H)
    if np.linalg.norm(H) <= ZERO_TOL:
        raise ValueError("cannot build a switch-off sequence for the zero Hamiltonian")
    d = H.shape[0]
    _, W = hermitian_eig(H)
    S = cyclic_shift(d)
    frames = [W @ np.linalg.matrix_power(S, j % d) @ dagger(W) for j in range(1, d + 1)]
    return PulseSequence.from_frames(np.array(frames), np.full(d, 1.0 / d), 1.0)
