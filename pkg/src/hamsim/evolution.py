"""Exact piecewise evolution of pulse sequences and first-order checks."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linalg import dagger, expm
from .sequences import PulseSequence
from .synthesis import SimulationPlan, plan_to_sequence

__all__ = [
    "EvolutionReport",
    "FirstOrderCheck",
    "evolve_sequence",
    "phase_aligned_distance",
    "toggling_product",
    "verify_first_order",
]

RATIO_RANGE = (3.0, 5.0)
EXACT_TOL = 1e-13


def _duration(seq: PulseSequence, t: float) -> float:
    return seq.overhead * t if seq.overhead > 0 else t


def evolve_sequence(seq: PulseSequence, H, t: float, include_closing: bool = True) -> np.ndarray:
    """Ordered product ``exp(-i H tau_N T) V_N ... exp(-i H tau_1 T) V_1``.

    ``T = overhead * t`` is the physical duration of one period, so a
    sequence simulating ``H_target`` yields ``~exp(-i H_target t)``.
    """
    H = np.asarray(H, dtype=complex)
    if H.shape != (seq.dim, seq.dim):
        raise ValueError("dimension mismatch between sequence and Hamiltonian")
    T = _duration(seq, t)
    U = np.eye(seq.dim, dtype=complex)
    for V, tau in zip(seq.controls, seq.times):
        U = expm(-1j * H * tau * T) @ V @ U
    if include_closing:
        U = seq.closing @ U
    return U


def toggling_product(seq: PulseSequence, H, t: float) -> np.ndarray:
    """``prod_{i=N..1} U_i^dagger exp(-i H tau_i T) U_i`` in the toggling frame."""
    H = np.asarray(H, dtype=complex)
    T = _duration(seq, t)
    U = np.eye(seq.dim, dtype=complex)
    for F, tau in zip(seq.frames(), seq.times):
        U = dagger(F) @ expm(-1j * H * tau * T) @ F @ U
    return U


def phase_aligned_distance(A, B) -> float:
    """``min_phi ||exp(i phi) A - B||_F``."""
    overlap = np.vdot(A, B)
    phase = overlap / abs(overlap) if abs(overlap) > 0 else 1.0
    return float(np.linalg.norm(phase * A - B))


@dataclass(frozen=True)
class EvolutionReport:
    t: float
    exact: np.ndarray
    sequenced: np.ndarray
    error: float
    aligned_error: float
    scaling_ratio: float | None = None


@dataclass(frozen=True)
class FirstOrderCheck:
    reports: list[EvolutionReport]
    passed: bool
    reason: str = ""

    def __iter__(self):
        return iter(self.reports)


def verify_first_order(obj, t: float | None = None, halvings: int = 3, H=None) -> FirstOrderCheck:
    """Halve ``t`` repeatedly and check the sequence error shrinks like ``t^2``.

    ``obj`` is a :class:`SimulationPlan` (target taken from the plan) or a
    :class:`PulseSequence` with ``H`` given (target ``overhead * average``).
    Passes when every consecutive error ratio lies in ``[3, 5]``, or when
    both errors are below ``1e-13`` (exact plans).  Errors are compared up to
    a global phase.
    """
    if halvings < 2:
        raise ValueError("need at least two halvings")
    if isinstance(obj, SimulationPlan):
        if len(obj) == 0:
            raise ValueError("empty plan has nothing to evolve")
        seq = plan_to_sequence(obj)
        H = obj.H if H is None else np.asarray(H, dtype=complex)
        target = obj.H_target
    elif isinstance(obj, PulseSequence):
        if H is None:
            raise ValueError("a Hamiltonian is required to verify a pulse sequence")
        seq = obj
        H = np.asarray(H, dtype=complex)
        target = seq.overhead * seq.average(H)
    else:
        raise TypeError(f"expected SimulationPlan or PulseSequence, got {type(obj).__name__}")
    if t is None:
        t = 0.1 / max(float(np.linalg.norm(H)), 1e-300)
    if t <= 0:
        raise ValueError("t must be positive")

    reports = []
    prev = None
    for k in range(halvings + 1):
        tk = t / 2**k
        U = evolve_sequence(seq, H, tk)
        E = expm(-1j * target * tk)
        err = float(np.linalg.norm(U - E))
        aligned = phase_aligned_distance(U, E)
        ratio = None
        if prev is not None and aligned > 0:
            ratio = prev.aligned_error / aligned
        elif prev is not None:
            ratio = np.inf
        rep = EvolutionReport(tk, E, U, err, aligned, ratio)
        reports.append(rep)
        prev = rep

    lo, hi = RATIO_RANGE
    for a, b in zip(reports, reports[1:]):
        if a.aligned_error < EXACT_TOL and b.aligned_error < EXACT_TOL:
            continue
        if b.aligned_error > a.aligned_error:
            return FirstOrderCheck(reports, False, f"error not monotone at t={b.t:.3g}; t too large")
        if not lo <= b.scaling_ratio <= hi:
            return FirstOrderCheck(
                reports, False, f"scaling ratio {b.scaling_ratio:.3f} at t={b.t:.3g} outside [{lo}, {hi}]"
            )
    return FirstOrderCheck(reports, True)
