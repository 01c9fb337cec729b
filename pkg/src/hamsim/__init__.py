"""Simulating Hamiltonians with finite groups of fast unitary controls."""

from .bipartite import BipartitePlan, bipartite_synthesize, operator_schmidt, simulate_product_term
from .errorbasis import (
    NiceErrorBasis,
    annihilator_sequence,
    cyclic_switch_off,
    decouple,
    heisenberg_basis,
    inversion_lower_bound,
    inversion_sequence,
)
from .evolution import evolve_sequence, verify_first_order
from .groups import (
    MatrixGroup,
    adjoint_irreducible,
    character,
    close_group,
    decompose_linear_map,
    gl3f2_transformer,
    group_average,
    is_transformer,
    pauli_group,
    sl2f3_transformer,
)
from .linalg import as_hamiltonian, expm, hermitian_eig, trace_inner, unvec_su, vec_su
from .sequences import PulseSequence
from .synthesis import (
    SimulationPlan,
    average_hamiltonian,
    birkhoff_decompose,
    eigenbasis_synthesis,
    lp_synthesize,
    majorization_lower_bound,
    majorization_transfer,
    plan_to_sequence,
)

__version__ = "0.1.0"
