"""Pulse sequences in the fast-control limit.

A sequence applies ``V_1``, lets the system evolve for a fraction ``tau_1`` of
the period, applies ``V_2``, and so on.  The toggling frames are
``U_i = V_i V_{i-1} ... V_1``.  A sequence whose last frame is not the
identity carries a ``closing`` pulse ``U_N^dagger`` applied after the last
interval (with no evolution after it); when the sequence is repeated this
pulse merges with the next period's ``V_1``.  With the closing pulse the
period product is ``U_P(t) = prod_i U_i^dagger exp(-i H tau_i t) U_i``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linalg import dagger

TIME_TOL = 1e-12
CYCLE_TOL = 1e-8
UNITARY_TOL = 1e-9


class SequenceError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class PulseSequence:
    controls: np.ndarray  # (N, d, d)
    times: np.ndarray  # (N,), relative, summing to 1
    overhead: float = 1.0
    cyclic: bool = True
    closing: np.ndarray | None = field(default=None)

    def __post_init__(self):
        controls = np.asarray(self.controls, dtype=complex)
        times = np.asarray(self.times, dtype=float)
        if controls.ndim != 3 or controls.shape[1] != controls.shape[2]:
            raise SequenceError("controls must have shape (N, d, d)")
        if times.shape != (controls.shape[0],):
            raise SequenceError("need one relative time per pulse")
        d = controls.shape[1]
        closing = np.eye(d, dtype=complex) if self.closing is None else np.asarray(self.closing, dtype=complex)
        object.__setattr__(self, "controls", controls)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "closing", closing)
        object.__setattr__(self, "overhead", float(self.overhead))
        self.validate()

    @property
    def dim(self) -> int:
        return self.controls.shape[1]

    def __len__(self):
        return self.controls.shape[0]

    def validate(self):
        N, d = len(self), self.dim
        if N == 0:
            raise SequenceError("empty pulse sequence")
        if np.any(self.times <= 0):
            raise SequenceError("relative times must be positive")
        if abs(self.times.sum() - 1.0) > TIME_TOL * N:
            raise SequenceError(f"relative times sum to {self.times.sum()!r}, not 1")
        if self.overhead < 0:
            raise SequenceError("overhead must be non-negative")
        eye = np.eye(d)
        for V in (*self.controls, self.closing):
            if np.linalg.norm(dagger(V) @ V - eye) > UNITARY_TOL:
                raise SequenceError("pulse is not unitary")
        if self.cyclic:
            prod = self.closing @ self.frames()[-1]
            if np.linalg.norm(prod - eye) > CYCLE_TOL:
                raise SequenceError("cyclic sequence does not compose to the identity")

    def frames(self) -> np.ndarray:
        """Toggling frames ``U_i = V_i ... V_1``."""
        out = np.empty_like(self.controls)
        acc = np.eye(self.dim, dtype=complex)
        for i, V in enumerate(self.controls):
            acc = V @ acc
            out[i] = acc
        return out

    def average(self, H) -> np.ndarray:
        """Zeroth-order average Hamiltonian ``sum_i tau_i U_i^dagger H U_i`` per unit time."""
        U = self.frames()
        return np.einsum("n,nij->ij", self.times, dagger(U) @ np.asarray(H)[None] @ U)

    @classmethod
    def from_frames(cls, frames, times, overhead: float = 1.0) -> "PulseSequence":
        """Build the pulses realizing the given toggling frames, closed to a cycle."""
        frames = np.asarray(frames, dtype=complex)
        controls = np.empty_like(frames)
        prev = np.eye(frames.shape[1], dtype=complex)
        for i, U in enumerate(frames):
            controls[i] = U @ dagger(prev)
            prev = U
        return cls(controls, np.asarray(times, dtype=float), overhead, True, dagger(frames[-1]))
