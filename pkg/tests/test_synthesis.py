import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hamsim.errorbasis import annihilator_sequence, heisenberg_basis, inversion_sequence
from hamsim.groups import SL2F3_R, pauli_group, sl2f3_transformer
from hamsim.linalg import PAULI_X, PAULI_Z, random_hamiltonian, spectrum
from hamsim.synthesis import (
    SimulationInfeasible,
    SimulationPlan,
    average_hamiltonian,
    birkhoff_decompose,
    eigenbasis_synthesis,
    is_majorized,
    lp_synthesize,
    majorization_lower_bound,
    majorization_transfer,
    plan_to_sequence,
)


@pytest.fixture(scope="module")
def sl():
    return sl2f3_transformer()


def test_lower_bound_examples():
    assert majorization_lower_bound(PAULI_Z, PAULI_X) == pytest.approx(1.0)
    for d in (2, 3, 4, 5):
        H = np.diag([d - 1.0] + [-1.0] * (d - 1))
        assert majorization_lower_bound(H, -H) == pytest.approx(d - 1)
    assert majorization_lower_bound(PAULI_Z, np.zeros((2, 2))) == 0.0
    assert majorization_lower_bound(np.diag([2.0, -1, -1]), np.diag([1.0, 1, -2])) == pytest.approx(2.0)
    with pytest.raises(SimulationInfeasible):
        majorization_lower_bound(np.zeros((2, 2)), PAULI_X)


def test_lower_bound_is_minimal(rng):
    for d in (2, 3, 4):
        H, T = random_hamiltonian(d, rng), random_hamiltonian(d, rng)
        tau = majorization_lower_bound(H, T)
        assert is_majorized(spectrum(T), tau * spectrum(H))
        assert not is_majorized(spectrum(T), (tau - 1e-6) * spectrum(H))


def test_birkhoff_examples():
    bd = birkhoff_decompose(np.eye(3))
    assert np.allclose(bd.weights, [1.0])
    assert list(bd.permutations[0]) == [0, 1, 2]
    bd = birkhoff_decompose([[0.3, 0.7], [0.7, 0.3]])
    terms = sorted((round(w, 12), tuple(p)) for w, p in zip(bd.weights, bd.permutations))
    assert terms == [(0.3, (0, 1)), (0.7, (1, 0))]
    with pytest.raises(ValueError):
        birkhoff_decompose([[0.5, 0.6], [0.5, 0.4]])


@settings(max_examples=30, deadline=None)
@given(n=st.integers(1, 6), k=st.integers(1, 10), seed=st.integers(0, 2**32 - 1))
def test_birkhoff_property(n, k, seed):
    rng = np.random.default_rng(seed)
    w = rng.dirichlet(np.ones(k))
    D = sum(wi * np.eye(n)[rng.permutation(n)] for wi in w)
    bd = birkhoff_decompose(D)
    assert len(bd.weights) <= (n - 1) ** 2 + 1
    assert np.all(bd.weights > 0)
    assert bd.weights.sum() == pytest.approx(1.0, abs=1e-10)
    assert np.abs(bd.reconstruct() - D).max() <= 1e-10
    for P in bd.matrices():
        assert np.allclose(P.sum(0), 1) and np.allclose(P.sum(1), 1)


def test_transfer_examples():
    assert np.allclose(majorization_transfer([1, 0, -1], [1, 0, -1]), np.eye(3))
    assert np.allclose(majorization_transfer([0, 0], [1, -1]), 0.5)
    D = majorization_transfer([1, 0, -1], 0.5 * np.array([2.0, 0, -2]))
    assert np.allclose(D @ [1.0, 0, -1], [1, 0, -1])
    with pytest.raises(ValueError):
        majorization_transfer([2, -2], [1, -1])


@settings(max_examples=50, deadline=None)
@given(n=st.integers(1, 6), seed=st.integers(0, 2**32 - 1))
def test_transfer_property(n, seed):
    rng = np.random.default_rng(seed)
    y = rng.normal(size=n)
    w = rng.dirichlet(np.ones(4))
    D0 = sum(wi * np.eye(n)[rng.permutation(n)] for wi in w)
    x = D0 @ y
    D = majorization_transfer(x, y)
    assert np.all(D >= -1e-12)
    assert np.allclose(D.sum(0), 1, atol=1e-10) and np.allclose(D.sum(1), 1, atol=1e-10)
    assert np.allclose(D @ y, x, atol=1e-9)


def test_lp_negative_control(sl):
    with pytest.raises(SimulationInfeasible):
        lp_synthesize(pauli_group(), PAULI_Z, PAULI_X)
    plan = lp_synthesize(sl, PAULI_Z, PAULI_X)
    assert plan.achieved_overhead == pytest.approx(1.0, abs=1e-7)
    assert plan.lower_bound == pytest.approx(1.0)
    assert plan.residual < 1e-9
    # R from the transformer group maps sz to sx exactly.
    assert np.allclose(SL2F3_R.conj().T @ PAULI_Z @ SL2F3_R, PAULI_X)


def test_lp_negation(sl):
    plan = lp_synthesize(sl, PAULI_Z, -PAULI_Z)
    assert plan.achieved_overhead == pytest.approx(1.0, abs=1e-7)
    assert np.allclose(average_hamiltonian(plan, PAULI_Z), -PAULI_Z, atol=1e-9)


def test_lp_zero_target(sl):
    plan = lp_synthesize(sl, PAULI_Z, np.zeros((2, 2)))
    assert len(plan) == 0 and plan.achieved_overhead == 0.0
    with pytest.raises(ValueError):
        plan_to_sequence(plan)


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_lp_weak_duality(seed):
    rng = np.random.default_rng(seed)
    G = sl2f3_transformer()
    H, T = random_hamiltonian(2, rng), random_hamiltonian(2, rng)
    plan = lp_synthesize(G, H, T)
    assert plan.residual < 1e-7 * max(1, np.linalg.norm(T))
    assert plan.achieved_overhead >= majorization_lower_bound(H, T) - 1e-7
    assert len(plan) <= 3 + 1
    assert np.all(plan.taus > 0)


def test_lp_spectra_equal_pairs(sl):
    # When the exact conjugator is in the group, overhead 1 is attained.
    H = random_hamiltonian(2, np.random.default_rng(3))
    for U in sl.elements[:8]:
        T = U.conj().T @ H @ U
        assert lp_synthesize(sl, H, T).achieved_overhead == pytest.approx(1.0, abs=1e-7)


def test_eigenbasis_examples():
    plan = eigenbasis_synthesis(PAULI_Z, PAULI_X)
    assert len(plan) == 1
    assert plan.achieved_overhead == pytest.approx(1.0)
    assert plan.residual < 1e-12
    empty = eigenbasis_synthesis(PAULI_Z, np.zeros((2, 2)))
    assert len(empty) == 0 and empty.achieved_overhead == 0


@pytest.mark.parametrize("d", [2, 3, 4, 5])
def test_eigenbasis_attains_bound(d, rng):
    for _ in range(5):
        H, T = random_hamiltonian(d, rng), random_hamiltonian(d, rng, scale=rng.uniform(0.1, 3))
        plan = eigenbasis_synthesis(H, T)
        assert abs(plan.achieved_overhead - majorization_lower_bound(H, T)) < 1e-9
        direct = sum(t * U.conj().T @ H @ U for t, U in plan.terms)
        assert np.linalg.norm(direct - T) < 1e-8


def test_eigenbasis_degenerate_spectrum():
    H = np.diag([1.0, 1.0, -2.0])
    T = np.diag([-1.0, -1.0, 2.0])
    plan = eigenbasis_synthesis(H, T)
    assert plan.achieved_overhead == pytest.approx(2.0)
    assert plan.residual < 1e-9


def test_average_hamiltonian_examples(rng):
    H = random_hamiltonian(3, rng)
    ann = annihilator_sequence(heisenberg_basis(3))
    assert np.allclose(average_hamiltonian(ann, H), 0, atol=1e-12)
    single = SimulationPlan(H, H, np.ones(1), np.eye(3)[None].astype(complex), 1.0, 0.0)
    assert np.allclose(average_hamiltonian(single, H), H)
    inv = inversion_sequence(heisenberg_basis(2))
    assert np.allclose(inv.overhead * average_hamiltonian(inv, PAULI_Z), -PAULI_Z)
    with pytest.raises(ValueError):
        average_hamiltonian(ann, PAULI_Z)


def test_plan_to_sequence(sl, rng):
    H, T = random_hamiltonian(2, rng), random_hamiltonian(2, rng)
    plan = lp_synthesize(sl, H, T)
    seq = plan_to_sequence(plan)
    assert seq.cyclic
    assert seq.overhead == pytest.approx(plan.achieved_overhead)
    assert np.allclose(seq.frames(), plan.unitaries)
    assert np.linalg.norm(seq.overhead * seq.average(H) - T) < 1e-7


def test_plan_to_sequence_single_term():
    U = SL2F3_R
    plan = SimulationPlan(PAULI_Z, PAULI_X, np.ones(1), U[None], 1.0, 0.0)
    seq = plan_to_sequence(plan)
    assert np.allclose(seq.controls[0], U)
    assert np.allclose(seq.closing, U.conj().T)


def test_inversion_plan_round_trip():
    B = heisenberg_basis(2)
    frames = B.matrices[1:]
    plan = SimulationPlan(PAULI_Z, -PAULI_Z, np.ones(3), frames, 1.0, 0.0)
    seq = plan_to_sequence(plan)
    assert len(seq) == 3
    prod = seq.closing
    for V in seq.controls[::-1]:
        prod = prod @ V
    assert np.allclose(prod, np.eye(2))
    assert np.allclose(seq.frames(), frames)


def test_is_majorized_basic():
    assert is_majorized([0, 0], [1, -1])
    assert not is_majorized([1, -1], [0, 0])
    assert all(is_majorized(p, [3, 1, -4]) for p in itertools.permutations([3, 1, -4]))
