"""JSON interchange for matrices, groups, sequences and plans.

Matrices are ``{"d": d, "entries": [[re, im], ...]}`` with ``d*d`` entries in
row-major order.  Floats are written with 17 significant digits so that
output is a lossless, byte-stable function of the computed values.
"""

from __future__ import annotations

import json
import math

import numpy as np

from .bipartite import BipartitePlan
from .errorbasis import NiceErrorBasis
from .evolution import FirstOrderCheck
from .groups import MatrixGroup, close_group
from .linalg import as_hamiltonian
from .sequences import PulseSequence
from .synthesis import BirkhoffDecomposition, SimulationPlan


class FormatError(ValueError):
    """Input JSON does not match the expected schema."""


def _fmt_float(x: float) -> str:
    if not math.isfinite(x):
        raise ValueError(f"cannot serialize non-finite float {x!r}")
    if x == 0.0:
        return "0.0"
    s = "%.17g" % x
    if not any(c in s for c in ".en"):
        s += ".0"
    return s


def dumps(obj, indent: int = 1, _level: int = 0) -> str:
    """Deterministic JSON text; numeric leaf lists stay on one line."""
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in seq):
            return "[" + ", ".join(dumps(v) for v in seq) + "]"
        return "[\n" + ",\n".join(pad + dumps(v, indent, _level + 1) for v in seq) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def loads(text: str):
    return json.loads(text)


# -- matrices -----------------------------------------------------------------


def matrix_to_json(M) -> dict:
    M = np.asarray(M, dtype=complex)
    d = M.shape[0]
    return {"d": d, "entries": [[z.real, z.imag] for z in M.ravel()]}


def matrix_from_json(obj) -> np.ndarray:
    try:
        d = int(obj["d"])
        entries = obj["entries"]
    except (KeyError, TypeError) as exc:
        raise FormatError("matrix must be an object with 'd' and 'entries'") from exc
    if d < 1 or len(entries) != d * d:
        raise FormatError(f"matrix with d={d} needs {d * d} entries, got {len(entries)}")
    try:
        vals = np.array([complex(float(re), float(im)) for re, im in entries])
    except (TypeError, ValueError) as exc:
        raise FormatError("entries must be [re, im] pairs") from exc
    if not np.all(np.isfinite(vals)):
        raise FormatError("matrix entries must be finite")
    return vals.reshape(d, d)


def hamiltonian_from_json(obj) -> np.ndarray:
    return as_hamiltonian(matrix_from_json(obj))


def real_matrix_from_json(obj) -> np.ndarray:
    """Plain row-major real matrix ``[[...], ...]``."""
    try:
        A = np.array(obj, dtype=float)
    except (TypeError, ValueError) as exc:
        raise FormatError("expected a list of numeric rows") from exc
    if A.ndim != 2:
        raise FormatError("expected a 2-d list of numbers")
    return A


# -- groups -------------------------------------------------------------------


def group_to_json(G: MatrixGroup) -> dict:
    return {
        "d": G.dim,
        "order": G.order,
        "generators": list(G.generators),
        "matrices": [matrix_to_json(U) for U in G.elements],
    }


def group_from_json(obj, max_order: int = 10_000) -> MatrixGroup:
    """Close the listed generators (all matrices if none are listed).

    Accepts ``{"matrices": [...], "generators": [...]}`` or a bare list of
    matrices.
    """
    if isinstance(obj, list):
        mats, gens = obj, None
    elif isinstance(obj, dict) and "matrices" in obj:
        mats, gens = obj["matrices"], obj.get("generators")
    else:
        raise FormatError("group must be a list of matrices or an object with 'matrices'")
    mats = [matrix_from_json(m) for m in mats]
    if not mats:
        raise FormatError("group needs at least one matrix")
    if gens:
        try:
            mats = [mats[int(i)] for i in gens]
        except (IndexError, ValueError, TypeError) as exc:
            raise FormatError("generator indices out of range") from exc
    return close_group(mats, max_order=max_order)


# -- sequences and plans ----------------------------------------------------------


def basis_to_json(B: NiceErrorBasis) -> dict:
    return {
        "d": B.d,
        "labels": [list(l) for l in B.labels],
        "matrices": [matrix_to_json(U) for U in B.matrices],
    }


def sequence_to_json(seq: PulseSequence) -> dict:
    return {
        "d": seq.dim,
        "overhead": seq.overhead,
        "cyclic": seq.cyclic,
        "pulses": [{"V": matrix_to_json(V), "tau": float(t)} for V, t in zip(seq.controls, seq.times)],
        "closing": matrix_to_json(seq.closing),
    }


def sequence_from_json(obj) -> PulseSequence:
    try:
        pulses = obj["pulses"]
        controls = np.array([matrix_from_json(p["V"]) for p in pulses])
        times = np.array([float(p["tau"]) for p in pulses])
        closing = matrix_from_json(obj["closing"]) if "closing" in obj else None
        return PulseSequence(controls, times, float(obj.get("overhead", 1.0)), bool(obj.get("cyclic", True)), closing)
    except (KeyError, TypeError) as exc:
        raise FormatError("malformed pulse sequence") from exc


def plan_to_json(plan: SimulationPlan) -> dict:
    return {
        "status": plan.status,
        "terms": [{"tau": float(t), "U": matrix_to_json(U)} for t, U in plan.terms],
        "overhead": plan.achieved_overhead,
        "lower_bound": plan.lower_bound,
        "residual": plan.residual,
        "H": matrix_to_json(plan.H),
        "target": matrix_to_json(plan.H_target),
    }


def plan_from_json(obj, H=None) -> SimulationPlan:
    try:
        terms = obj["terms"]
        H = hamiltonian_from_json(obj["H"]) if H is None else H
        T = hamiltonian_from_json(obj["target"])
        taus = np.array([float(t["tau"]) for t in terms])
        d = H.shape[0]
        U = np.array([matrix_from_json(t["U"]) for t in terms]).reshape(-1, d, d)
    except (KeyError, TypeError) as exc:
        raise FormatError("malformed simulation plan") from exc
    return SimulationPlan(
        H, T, taus, U, float(obj.get("lower_bound", 0.0)), float(obj.get("residual", 0.0)), obj.get("status", "success")
    )


def bipartite_plan_to_json(plan: BipartitePlan) -> dict:
    return {
        "status": "success",
        "terms": [
            {"tau": float(t), "U": matrix_to_json(U), "V": matrix_to_json(V)}
            for t, U, V in zip(plan.taus, plan.left, plan.right)
        ],
        "overhead": plan.achieved_overhead,
        "residual": plan.residual,
        "H": matrix_to_json(plan.H),
        "target": matrix_to_json(plan.H_target),
    }


def birkhoff_to_json(bd: BirkhoffDecomposition) -> dict:
    err = float(np.abs(bd.reconstruct() - bd.source).max()) if bd.source is not None else 0.0
    return {
        "terms": [{"weight": float(w), "permutation": [int(i) for i in p]} for w, p in zip(bd.weights, bd.permutations)],
        "reconstruction_error": err,
    }


def check_to_json(check: FirstOrderCheck) -> dict:
    return {
        "passed": check.passed,
        "reason": check.reason,
        "reports": [
            {
                "t": r.t,
                "error": r.error,
                "aligned_error": r.aligned_error,
                "scaling_ratio": None if r.scaling_ratio is None or not math.isfinite(r.scaling_ratio) else r.scaling_ratio,
                "exact": matrix_to_json(r.exact),
                "sequenced": matrix_to_json(r.sequenced),
            }
            for r in check.reports
        ],
    }
