import itertools
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from peres_circuits.circuits import (
    Circuit,
    Gate,
    GateKind,
    Handedness,
    Part,
    PermutationSpec,
    Rail,
    Target,
    adjacent_transpositions,
    build_moment_circuit,
    circuit_from_dict,
    circuit_from_spec,
    circuit_to_dict,
    circuit_unitary,
    copies_consumed,
    cyclic_spec,
    identity_spec,
    permutation_matrix,
    run_exact,
    run_shots,
    total_copies,
)
from peres_circuits.errors import CapacityError, InvariantError, ShapeError
from peres_circuits.linalg import partial_transpose, power_trace
from peres_circuits.states import bell_state, maximally_mixed, random_density

F, I = Handedness.FORWARD, Handedness.INVERSE


def explicit_swap_4x4():
    u = np.zeros((4, 4))
    for a in range(2):
        for b in range(2):
            u[2 * b + a, 2 * a + b] = 1
    return u


# -- specs and decompositions ---------------------------------------------------


def test_cyclic_spec_k2_is_transposition_either_way():
    assert cyclic_spec(2, 1, F) == cyclic_spec(2, 1, I) == PermutationSpec(((1, 0),))


def test_cyclic_spec_k3():
    assert cyclic_spec(3, 1, F).perms == ((1, 2, 0),)
    assert cyclic_spec(3, 1, I).perms == ((2, 0, 1),)


@pytest.mark.parametrize("k", range(1, 7))
def test_forward_then_inverse_is_identity(k):
    assert cyclic_spec(k, 2, F).then(cyclic_spec(k, 2, I)).is_identity()


@pytest.mark.parametrize("k", range(2, 7))
def test_canonical_cycle_decomposition(k):
    fwd = cyclic_spec(k, 1, F).perms[0]
    inv = cyclic_spec(k, 1, I).perms[0]
    down = [(q, q + 1) for q in range(k - 2, -1, -1)]
    assert adjacent_transpositions(fwd) == down
    assert adjacent_transpositions(inv) == down[::-1]


@pytest.mark.parametrize("perm", list(itertools.permutations(range(4))))
def test_transpositions_realise_any_permutation(perm):
    slots = list(range(4))
    for a, b in adjacent_transpositions(perm):
        assert b == a + 1
        slots[a], slots[b] = slots[b], slots[a]
    # content c must end up at slot perm[c]
    assert all(slots[perm[c]] == c for c in range(4))


def test_invalid_spec_rejected():
    with pytest.raises(InvariantError):
        PermutationSpec(((0, 0, 1),))


# -- circuit construction -------------------------------------------------------


def test_k2_pt_equals_plain():
    assert build_moment_circuit(2, (2, 2), Target.PT) == build_moment_circuit(2, (2, 2), Target.PLAIN)


@pytest.mark.parametrize("k, n_swaps", [(2, 2), (3, 4), (4, 6)])
def test_pt_swap_counts(k, n_swaps):
    c = build_moment_circuit(k, (2, 2), Target.PT)
    assert len(c.payload()) == n_swaps
    assert sum(g.rail_a.subsystem == 0 for g in c.payload()) == k - 1


def test_circuit_structure_real_and_imaginary():
    c = build_moment_circuit(3, (2, 2), Target.PT, Part.IMAGINARY)
    kinds = [g.kind for g in c.gates]
    assert kinds[0] is kinds[-1] is GateKind.HADAMARD
    assert kinds[-2] is GateKind.PHASE_ADJOINT
    assert kinds.count(GateKind.PHASE_ADJOINT) == 1
    assert GateKind.PHASE_ADJOINT not in [g.kind for g in c.with_part(Part.REAL).gates]


def test_build_errors():
    with pytest.raises(ValueError, match="first moment"):
        build_moment_circuit(1, (2, 2))
    with pytest.raises(ShapeError):
        build_moment_circuit(3, (2, 2, 2), Target.PT)
    build_moment_circuit(3, (2, 2, 2), Target.PLAIN)


def test_circuit_invariants_enforced():
    h = Gate(GateKind.HADAMARD)
    with pytest.raises(InvariantError):
        Circuit(2, (2, 2), (Gate(GateKind.CSWAP, Rail(0, 0, 2), Rail(1, 0, 2)), h), Part.REAL)
    with pytest.raises(InvariantError):
        Gate(GateKind.CSWAP, Rail(0, 0, 2), Rail(1, 1, 2))
    with pytest.raises(InvariantError):
        Gate(GateKind.CSWAP, Rail(0, 0, 2), Rail(1, 0, 3))
    with pytest.raises(InvariantError):
        Circuit(2, (2, 2), (h, h), Part.IMAGINARY)
    with pytest.raises(InvariantError):
        Circuit(2, (2, 2), (h, Gate(GateKind.CSWAP, Rail(0, 0, 2), Rail(2, 0, 2)), h), Part.REAL)


# -- unitaries ------------------------------------------------------------------


def test_k2_single_qubit_unitary_is_swap():
    c = build_moment_circuit(2, (2,), Target.PLAIN)
    u = circuit_unitary(c)
    assert_allclose(u, explicit_swap_4x4())
    rho = random_density((2,), seed=3)
    rr = np.kron(rho.matrix, rho.matrix)
    assert np.trace(rr @ u) == pytest.approx(power_trace(rho.matrix, 2), abs=1e-14)


def test_identity_spec_unitary():
    c = circuit_from_spec(identity_spec(3, 2), (2, 2))
    assert not c.payload()
    assert_allclose(circuit_unitary(c), np.eye(64))
    assert run_exact(c, random_density((2, 2), seed=0)) == pytest.approx(1, abs=1e-12)


@pytest.mark.parametrize("k", [2, 3, 4])
@pytest.mark.parametrize("target", list(Target))
def test_gate_list_soundness(k, target):
    c = build_moment_circuit(k, (2, 2), target)
    u = circuit_unitary(c)
    assert np.array_equal(u, permutation_matrix(c.permutation_spec(), (2, 2)))
    expected_spec = cyclic_spec(k, 2, [F, I] if target is Target.PT else F)
    assert np.array_equal(u, permutation_matrix(expected_spec, (2, 2)))
    assert_allclose(u @ u.T, np.eye(u.shape[0]))
    assert set(np.unique(u)) <= {0.0, 1.0}


def test_dense_cap():
    with pytest.raises(CapacityError):
        circuit_unitary(build_moment_circuit(5, (2, 3), Target.PT))
    with pytest.raises(CapacityError):
        run_exact(build_moment_circuit(5, (2, 3), Target.PT), random_density((2, 3)), "dense")


# -- execution ------------------------------------------------------------------


def test_run_exact_examples(bell, mixed4):
    assert run_exact(build_moment_circuit(2, (2, 2), Target.PLAIN), bell) == pytest.approx(1, abs=1e-12)
    assert run_exact(build_moment_circuit(3, (2, 2), Target.PT), bell) == pytest.approx(0.25, abs=1e-12)
    assert run_exact(build_moment_circuit(3, (2, 2), Target.PT), mixed4) == pytest.approx(0.0625, abs=1e-12)


def test_run_exact_shape_mismatch(bell):
    with pytest.raises(ShapeError):
        run_exact(build_moment_circuit(2, (2, 3)), bell)


def test_imaginary_part_of_non_hermitian_pairing():
    # a 3-cycle on one subsystem of a 3-qubit mixed state against its
    # inverse on another gives a complex value; both backends must agree
    spec = PermutationSpec(((1, 2, 0), (0, 1, 2), (2, 0, 1)))
    rho = random_density((2, 2, 2), seed=4)
    c = circuit_from_spec(spec, (2, 2, 2))
    d = run_exact(c, rho, "dense")
    e = run_exact(c, rho, "contraction")
    assert abs(d - e) <= 1e-10
    u = permutation_matrix(spec, (2, 2, 2))
    assert abs(d - np.trace(u @ np.kron(np.kron(rho.matrix, rho.matrix), rho.matrix))) <= 1e-10


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), k=st.integers(2, 4), target=st.sampled_from(list(Target)))
def test_backends_agree_and_match_oracle(seed, k, target):
    rho = random_density((2, 2), seed=seed)
    c = build_moment_circuit(k, (2, 2), target)
    d = run_exact(c, rho, "dense")
    e = run_exact(c, rho, "contraction")
    m = partial_transpose(rho.matrix, (2, 2)) if target is Target.PT else rho.matrix
    assert abs(d - e) <= 1e-10
    assert abs(d - power_trace(m, k)) <= 1e-10
    assert abs(d.imag) <= 1e-10


@pytest.mark.parametrize("seed", range(5))
def test_pt_identity_on_2x3_up_to_k6(seed):
    rho = random_density((2, 3), seed=seed)
    pt = partial_transpose(rho.matrix, (2, 3))
    for k in range(2, 7):
        v = run_exact(build_moment_circuit(k, (2, 3), Target.PT), rho, "contraction")
        assert abs(v - power_trace(pt, k)) <= 1e-10


def test_run_shots_degenerate_and_deterministic(bell):
    c = build_moment_circuit(2, (2, 2), Target.PLAIN)
    for shots in (1, 10, 1000):
        res = run_shots(c, bell, shots, seed=5)
        assert res.estimate == 1 and res.stderr == 0
    c3 = build_moment_circuit(3, (2, 2), Target.PT)
    assert run_shots(c3, bell, 1000, 42) == run_shots(c3, bell, 1000, 42)
    with pytest.raises(ValueError):
        run_shots(c3, bell, 0, 1)


def test_run_shots_bell_k3(bell):
    res = run_shots(build_moment_circuit(3, (2, 2), Target.PT), bell, 10**5, seed=2024)
    assert abs(res.estimate - 0.25) <= 5 * res.stderr
    assert res.stderr == pytest.approx(np.sqrt((1 - 0.25**2) / 1e5), rel=0.05)


def test_run_shots_converges_at_a_million_shots():
    rho = random_density((2, 2), seed=17)
    c = build_moment_circuit(3, (2, 2), Target.PT)
    exact = run_exact(c, rho).real
    inside = 0
    for seed in range(100):
        res = run_shots(c, rho, 10**6, seed)
        inside += abs(res.estimate - exact) <= 5 * res.stderr
    assert inside >= 99


def test_imaginary_measurement_reads_imaginary_part():
    spec = PermutationSpec(((1, 2, 0), (0, 1, 2), (2, 0, 1)))
    rho = random_density((2, 2, 2), seed=4)
    c = circuit_from_spec(spec, (2, 2, 2), Part.IMAGINARY)
    value = run_exact(c, rho)
    res = run_shots(c, rho, 10**6, 9)
    assert abs(res.estimate - value.imag) <= 5 * res.stderr


def test_copies_accounting():
    assert copies_consumed(4) == 4
    assert total_copies((2, 2)) == 9 == 2 + 3 + 4
    assert total_copies((2, 3)) == 20 == sum(range(2, 7))
    assert total_copies((3, 3)) == 44
    with pytest.raises(ShapeError):
        total_copies((1, 1))


@pytest.mark.parametrize("d1, d2", [(2, 2), (2, 3), (3, 3), (2, 5), (4, 3)])
def test_total_copies_formula(d1, d2):
    assert total_copies((d1, d2)) == sum(range(2, d1 * d2 + 1))
    assert 2 * total_copies((d1, d2)) == d1**2 * d2**2 + d1 * d2 - 2


def test_circuit_json_round_trip():
    c = build_moment_circuit(4, (2, 3), Target.PT, Part.IMAGINARY)
    obj = circuit_to_dict(c)
    assert list(obj) == ["copies", "dims", "measured_part", "gates"]
    swap = obj["gates"][1]
    assert list(swap) == ["kind", "railA", "railB"]
    assert swap["kind"] == "ControlledSwap"
    assert set(swap["railA"]) == {"copy", "subsystem"}
    assert circuit_from_dict(json.loads(json.dumps(obj))) == c
