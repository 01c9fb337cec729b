"""Command-line front end.

Every subcommand writes machine-readable JSON to stdout (or ``--out``) and a
short human-readable summary to stderr.

Exit status: 0 success, 1 invalid input, 2 infeasible or criterion failed,
3 internal tolerance failure, 64 usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile

import numpy as np

from . import formats
from .bipartite import BipartiteError, bipartite_synthesize
from .errorbasis import (
    annihilator_sequence,
    cyclic_switch_off,
    decouple,
    decoupling_sequence,
    heisenberg_basis,
    inversion_sequence,
)
from .evolution import verify_first_order
from .groups import (
    DecompositionError,
    GroupError,
    NotIrreducibleError,
    adjoint_irreducible,
    gl3f2_transformer,
    is_transformer,
    pauli_group,
    sl2f3_transformer,
)
from .linalg import ConvergenceError, HamiltonianError, random_hamiltonian
from .sequences import SequenceError
from .synthesis import (
    SimulationError,
    SimulationInfeasible,
    birkhoff_decompose,
    eigenbasis_synthesis,
    lp_synthesize,
    majorization_lower_bound,
)

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_INFEASIBLE = 2
EXIT_TOLERANCE = 3
EXIT_USAGE = 64

BUILTIN_GROUPS = {"q8": pauli_group, "sl2f3": sl2f3_transformer, "gl3f2": gl3f2_transformer}


class UsageError(Exception):
    pass


class _Outcome(Exception):
    """Carries a JSON payload together with a non-zero exit status."""

    def __init__(self, status: int, payload, message: str):
        super().__init__(message)
        self.status = status
        self.payload = payload


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def _read_json(path: str):
    if path == "-":
        text, name = sys.stdin.read(), "<stdin>"
    else:
        try:
            with open(path) as fh:
                text = fh.read()
        except OSError as exc:
            raise formats.FormatError(f"cannot read {path}: {exc.strerror}") from exc
        name = path
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise formats.FormatError(f"{name}: malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc


def _hamiltonian(path):
    return formats.hamiltonian_from_json(_read_json(path))


def _group(path):
    return formats.group_from_json(_read_json(path))


def _emit(payload, out: str | None):
    text = formats.dumps(payload) + "\n"
    if out is None:
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    directory = os.path.dirname(os.path.abspath(out))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".hamsim-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        umask = os.umask(0)
        os.umask(umask)
        os.chmod(tmp, 0o666 & ~umask)
        os.replace(tmp, out)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _note(msg: str):
    print(msg, file=sys.stderr)


# -- subcommands ----------------------------------------------------------------


def cmd_basis(args):
    B = heisenberg_basis(args.d)
    _note(f"Heisenberg error basis, d={args.d}, {len(B)} elements")
    return formats.basis_to_json(B)


def cmd_annihilate(args):
    seq = annihilator_sequence(heisenberg_basis(args.d))
    _note(f"annihilator: {len(seq)} pulses, equal times 1/{len(seq)}")
    return formats.sequence_to_json(seq)


def cmd_invert(args):
    seq = inversion_sequence(heisenberg_basis(args.d))
    _note(f"inversion: {len(seq)} pulses, overhead {seq.overhead:g}")
    return formats.sequence_to_json(seq)


def cmd_decouple(args):
    basis = heisenberg_basis(args.ds)
    seq = decoupling_sequence(basis, args.db)
    if args.h is not None:
        H = _hamiltonian(args.h)
        if H.shape[0] != args.ds * args.db:
            raise formats.FormatError(f"Hamiltonian dimension {H.shape[0]} != {args.ds}*{args.db}")
        avg = decouple(basis, H)
        _note(f"decoupled Hamiltonian norm {np.linalg.norm(avg):.6g} (input {np.linalg.norm(H):.6g})")
    _note(f"decoupling: {len(seq)} pulses on system dimension {args.ds}")
    return formats.sequence_to_json(seq)


def cmd_switch_off(args):
    seq = cyclic_switch_off(_hamiltonian(args.h))
    _note(f"eigenbasis switch-off: {len(seq)} pulses")
    return formats.sequence_to_json(seq)


def cmd_group(args):
    G = BUILTIN_GROUPS[args.name]()
    _note(f"group {args.name}: order {G.order}, dimension {G.dim}")
    return formats.group_to_json(G)


def cmd_check_transformer(args):
    G = _group(args.group)
    verdict, value = is_transformer(G)
    payload = {
        "is_transformer": verdict,
        "order": G.order,
        "criterion": value,
        "adjoint_irreducible": adjoint_irreducible(G),
    }
    _note(f"order {G.order}: sum |chi|^4 = {value:.10g} vs 2|G| = {2 * G.order}")
    if not verdict:
        raise _Outcome(EXIT_INFEASIBLE, payload, "not a universal transformer")
    return payload


def cmd_synthesize(args):
    H = _hamiltonian(args.h)
    T = _hamiltonian(args.target)
    if args.optimal_basis:
        plan = eigenbasis_synthesis(H, T)
    else:
        if args.group is None:
            raise UsageError("synthesize: --group is required unless --optimal-basis is given")
        G = _group(args.group)
        try:
            plan = lp_synthesize(G, H, T)
        except SimulationInfeasible as exc:
            raise _Outcome(EXIT_INFEASIBLE, {"status": "infeasible"}, str(exc)) from exc
    _note(f"plan: {len(plan)} terms, overhead {plan.achieved_overhead:.10g}, "
          f"lower bound {plan.lower_bound:.10g}, residual {plan.residual:.3e}")
    return formats.plan_to_json(plan)


def cmd_lower_bound(args):
    tau = majorization_lower_bound(_hamiltonian(args.h), _hamiltonian(args.target))
    _note(f"majorization lower bound: {tau:.10g}")
    return tau


def cmd_birkhoff(args):
    D = formats.real_matrix_from_json(_read_json(args.matrix))
    bd = birkhoff_decompose(D)
    _note(f"Birkhoff decomposition: {len(bd.weights)} permutations")
    return formats.birkhoff_to_json(bd)


def cmd_bipartite(args):
    T1, T2 = _group(args.t1), _group(args.t2)
    plan = bipartite_synthesize(T1, T2, _hamiltonian(args.h), _hamiltonian(args.target))
    _note(f"bipartite plan: {len(plan)} terms, overhead {plan.achieved_overhead:.6g}, residual {plan.residual:.3e}")
    return formats.bipartite_plan_to_json(plan)


def cmd_verify(args):
    obj = _read_json(args.plan)
    H = _hamiltonian(args.h) if args.h is not None else None
    if isinstance(obj, dict) and "pulses" in obj:
        if H is None:
            raise UsageError("verify: --h is required for a pulse sequence")
        target = formats.sequence_from_json(obj)
    else:
        target = formats.plan_from_json(obj, H)
    check = verify_first_order(target, t=args.t0, halvings=args.halvings, H=H)
    ratios = [r.scaling_ratio for r in check.reports[1:]]
    _note("first-order check " + ("passed" if check.passed else f"FAILED: {check.reason}")
          + "; ratios " + ", ".join(f"{x:.4g}" for x in ratios))
    payload = formats.check_to_json(check)
    if not check.passed:
        raise _Outcome(EXIT_INFEASIBLE, payload, check.reason)
    return payload


def cmd_random_h(args):
    H = random_hamiltonian(args.d, np.random.default_rng(args.seed), args.scale)
    _note(f"random traceless Hermitian, d={args.d}, seed={args.seed}")
    return formats.matrix_to_json(H)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--out", help="write JSON here instead of stdout")
    p = _Parser(prog="hamsim", description="Hamiltonian simulation with finite control groups")
    sub = p.add_subparsers(dest="command", parser_class=_Parser, required=True)

    s = sub.add_parser("basis", parents=[common], help="emit the Heisenberg error basis")
    s.add_argument("--d", type=int, required=True)
    s.set_defaults(func=cmd_basis)

    s = sub.add_parser("annihilate", parents=[common], help="minimal annihilator sequence")
    s.add_argument("--d", type=int, required=True)
    s.set_defaults(func=cmd_annihilate)

    s = sub.add_parser("invert", parents=[common], help="inversion sequence")
    s.add_argument("--d", type=int, required=True)
    s.set_defaults(func=cmd_invert)

    s = sub.add_parser("decouple", parents=[common], help="system-bath decoupling sequence")
    s.add_argument("--ds", type=int, required=True, help="system dimension")
    s.add_argument("--db", type=int, required=True, help="bath dimension")
    s.add_argument("--h", help="joint Hamiltonian to report on")
    s.set_defaults(func=cmd_decouple)

    s = sub.add_parser("switch-off", parents=[common], help="switch off a known Hamiltonian")
    s.add_argument("--h", required=True)
    s.set_defaults(func=cmd_switch_off)

    s = sub.add_parser("group", parents=[common], help="emit a built-in group")
    s.add_argument("--name", choices=sorted(BUILTIN_GROUPS), required=True)
    s.set_defaults(func=cmd_group)

    s = sub.add_parser("check-transformer", parents=[common], help="character criterion")
    s.add_argument("--group", required=True)
    s.set_defaults(func=cmd_check_transformer)

    s = sub.add_parser("synthesize", parents=[common], help="optimal plan over a group")
    s.add_argument("--group")
    s.add_argument("--h", required=True)
    s.add_argument("--target", required=True)
    s.add_argument("--optimal-basis", action="store_true",
                   help="unrestricted controls attaining the spectral lower bound")
    s.set_defaults(func=cmd_synthesize)

    s = sub.add_parser("lower-bound", parents=[common], help="majorization lower bound")
    s.add_argument("--h", required=True)
    s.add_argument("--target", required=True)
    s.set_defaults(func=cmd_lower_bound)

    s = sub.add_parser("birkhoff", parents=[common], help="decompose a doubly stochastic matrix")
    s.add_argument("--matrix", required=True)
    s.set_defaults(func=cmd_birkhoff)

    s = sub.add_parser("bipartite", parents=[common], help="bipartite simulation plan")
    s.add_argument("--t1", required=True)
    s.add_argument("--t2", required=True)
    s.add_argument("--h", required=True)
    s.add_argument("--target", required=True)
    s.set_defaults(func=cmd_bipartite)

    s = sub.add_parser("verify", parents=[common], help="second-order error scaling check")
    s.add_argument("--plan", required=True, help="plan or pulse-sequence JSON ('-' for stdin)")
    s.add_argument("--h")
    s.add_argument("--t0", type=float)
    s.add_argument("--halvings", type=int, default=3)
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("random-h", parents=[common], help="random traceless Hermitian matrix")
    s.add_argument("--d", type=int, required=True)
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--scale", type=float, default=1.0)
    s.set_defaults(func=cmd_random_h)
    return p


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        payload = args.func(args)
        _emit(payload, args.out)
        return EXIT_OK
    except UsageError as exc:
        _note(str(exc))
        return EXIT_USAGE
    except _Outcome as exc:
        _note(str(exc))
        _emit(exc.payload, getattr(args, "out", None))
        return exc.status
    except SimulationInfeasible as exc:
        _note(f"infeasible: {exc}")
        _emit({"status": "infeasible", "reason": str(exc)}, getattr(args, "out", None))
        return EXIT_INFEASIBLE
    except (SimulationError, DecompositionError, ConvergenceError) as exc:
        _note(f"tolerance failure: {exc}")
        return EXIT_TOLERANCE
    except NotIrreducibleError as exc:
        _note(f"invalid input: {exc}")
        return EXIT_INVALID
    except (formats.FormatError, HamiltonianError, GroupError, SequenceError, BipartiteError, ValueError) as exc:
        _note(f"invalid input: {exc}")
        return EXIT_INVALID


def main(argv=None):
    sys.exit(run(argv))
