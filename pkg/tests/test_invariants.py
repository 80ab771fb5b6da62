import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from peres_circuits.circuits import (
    PermutationSpec,
    Target,
    build_moment_circuit,
    permutation_matrix,
    run_exact,
)
from peres_circuits.errors import CapacityError, InvariantError, ShapeError
from peres_circuits.invariants import (
    ContractionDiagram,
    diagram_from_dict,
    diagram_to_circuit,
    diagram_to_dict,
    evaluate_diagram,
    identity_diagram,
    is_inversion_closed,
    kempe_diagram,
    plain_moment_diagram,
    pt_moment_diagram,
)
from peres_circuits.linalg import partial_trace, partial_transpose, power_trace
from peres_circuits.states import ghz_state, random_density, random_local_unitary, random_pure

seeds = st.integers(0, 2**32 - 1)


def kempe_oracle(psi):
    rho12 = partial_trace(psi.density().matrix, (2, 2, 2), 2)
    return power_trace(partial_transpose(rho12, (2, 2)), 3)


def test_identity_diagram_gives_one():
    rho = random_density((2, 3), seed=1)
    assert evaluate_diagram(rho, identity_diagram(3, (2, 3))) == pytest.approx(1, abs=1e-12)


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_same_cycle_gives_plain_moment(k):
    rho = random_density((2, 2), seed=k)
    assert abs(evaluate_diagram(rho, plain_moment_diagram(k, (2, 2))) - power_trace(rho.matrix, k)) <= 1e-12


def test_kempe_diagram_shape():
    d = kempe_diagram()
    assert d.copies == 3 and d.dims == (2, 2, 2)
    assert d.perms[2] == (0, 1, 2)


def test_kempe_on_product_and_ghz():
    zero = np.zeros(8)
    zero[0] = 1
    from peres_circuits.states import PureState

    assert evaluate_diagram(PureState(zero, (2, 2, 2)), kempe_diagram()) == pytest.approx(1)
    # oracle: reduced GHZ state is diag(1/2, 0, 0, 1/2), which is its own partial transpose
    assert kempe_oracle(ghz_state()).real == pytest.approx(0.25, abs=1e-14)
    assert evaluate_diagram(ghz_state(), kempe_diagram()) == pytest.approx(0.25, abs=1e-12)


def test_kempe_matches_literal_index_pattern():
    # I6 = psi_{klp} conj(psi)^{inp} psi_{imq} conj(psi)^{jlq} psi_{jnr} conj(psi)^{kmr}
    for seed in range(10):
        psi = random_pure((2, 2, 2), seed=seed)
        t = psi.amplitudes.reshape(2, 2, 2)
        tb = t.conj()
        lit = np.einsum("klp,inp,imq,jlq,jnr,kmr->", t, tb, t, tb, t, tb)
        assert abs(evaluate_diagram(psi, kempe_diagram()) - lit) <= 1e-12


@pytest.mark.parametrize("seed", range(10))
def test_kempe_identity_pure_and_mixed_inputs(seed):
    psi = random_pure((2, 2, 2), seed=seed)
    k = kempe_diagram()
    assert abs(evaluate_diagram(psi, k) - kempe_oracle(psi)) <= 1e-10
    assert abs(evaluate_diagram(psi.density(), k) - kempe_oracle(psi)) <= 1e-10


def test_pt_moment_diagram_examples():
    psi = random_pure((2, 2, 2), seed=3)
    rho12 = partial_trace(psi.density().matrix, (2, 2, 2), 2)
    from peres_circuits.states import DensityMatrix

    r = DensityMatrix(rho12, (2, 2))
    assert abs(evaluate_diagram(r, pt_moment_diagram(3)) - kempe_oracle(psi)) <= 1e-10
    assert abs(evaluate_diagram(r, pt_moment_diagram(2)) - power_trace(rho12, 2)) <= 1e-12
    mixed = random_density((2, 2), seed=8)
    pt = partial_transpose(mixed.matrix, (2, 2))
    assert abs(evaluate_diagram(mixed, pt_moment_diagram(4)) - power_trace(pt, 4)) <= 1e-10


def test_kempe_circuit_is_pt_circuit_plus_identity():
    spec = diagram_to_circuit(kempe_diagram()).permutation_spec()
    pt = build_moment_circuit(3, (2, 2), Target.PT).permutation_spec()
    assert spec.perms[:2] == pt.perms
    assert spec.perms[2] == (0, 1, 2)


def test_identity_diagram_circuit_has_empty_payload():
    c = diagram_to_circuit(identity_diagram(3, (2, 2)))
    assert c.payload() == ()
    assert run_exact(c, random_density((2, 2), seed=2)) == pytest.approx(1, abs=1e-12)


def test_same_cycle_diagram_circuit_is_plain_circuit():
    for k in (2, 3, 4):
        a = diagram_to_circuit(plain_moment_diagram(k, (2, 2)))
        b = build_moment_circuit(k, (2, 2), Target.PLAIN)
        assert np.array_equal(permutation_matrix(a.permutation_spec(), (2, 2)), permutation_matrix(b.permutation_spec(), (2, 2)))


def all_diagrams(k, s):
    for perms in itertools.product(itertools.permutations(range(k)), repeat=s):
        yield perms


def test_circuit_diagram_duality_two_qubits():
    rho = random_density((2, 2), seed=31)
    for k in (1, 2, 3):
        for perms in all_diagrams(k, 2):
            d = ContractionDiagram((2, 2), perms)
            assert abs(run_exact(diagram_to_circuit(d), rho) - evaluate_diagram(rho, d)) <= 1e-10


def test_circuit_diagram_duality_two_qubits_k4_sample():
    rho = random_density((2, 2), seed=32)
    rng = np.random.default_rng(0)
    perms4 = list(itertools.permutations(range(4)))
    for _ in range(40):
        perms = tuple(perms4[i] for i in rng.integers(len(perms4), size=2))
        d = ContractionDiagram((2, 2), perms)
        assert abs(run_exact(diagram_to_circuit(d), rho) - evaluate_diagram(rho, d)) <= 1e-10


def test_circuit_diagram_duality_three_qubits():
    rho = random_density((2, 2, 2), seed=33)
    for k in (2, 3):
        for perms in all_diagrams(k, 3):
            d = ContractionDiagram((2, 2, 2), perms)
            assert abs(run_exact(diagram_to_circuit(d), rho) - evaluate_diagram(rho, d)) <= 1e-10


def test_inversion_closed_diagrams_are_real():
    rho = random_density((2, 2, 2), seed=5)
    seen_complex = False
    for perms in all_diagrams(3, 3):
        d = ContractionDiagram((2, 2, 2), perms)
        v = evaluate_diagram(rho, d)
        if is_inversion_closed(d):
            assert abs(v.imag) <= 1e-10
        elif abs(v.imag) > 1e-6:
            seen_complex = True
    assert seen_complex
    assert is_inversion_closed(pt_moment_diagram(4)) and is_inversion_closed(kempe_diagram())


@settings(max_examples=15, deadline=None)
@given(seed=seeds, k=st.integers(2, 4))
def test_local_unitary_invariance(seed, k):
    rng = np.random.default_rng(seed)
    rho = random_density((2, 2), seed=seed)
    diagrams = [pt_moment_diagram(k), plain_moment_diagram(k, (2, 2))]
    for _ in range(5):
        u = random_local_unitary((2, 2), rng)
        rotated = type(rho)(u @ rho.matrix @ u.conj().T, (2, 2))
        for d in diagrams:
            assert abs(evaluate_diagram(rho, d) - evaluate_diagram(rotated, d)) <= 1e-9


def test_cost_cap_and_shape_checks():
    rho = random_density((2, 3), seed=1)
    with pytest.raises(CapacityError):
        evaluate_diagram(rho, identity_diagram(6, (2, 3)), max_cost=1000)
    with pytest.raises(ShapeError):
        evaluate_diagram(rho, pt_moment_diagram(2))
    with pytest.raises(ShapeError):
        ContractionDiagram((2, 2), ((0, 1),))
    with pytest.raises(InvariantError):
        ContractionDiagram((2, 2), ((0, 0), (0, 1)))


def test_diagram_json_round_trip():
    d = kempe_diagram()
    obj = diagram_to_dict(d)
    assert obj == {"copies": 3, "dims": [2, 2, 2], "perms": [[2, 3, 1], [3, 1, 2], [1, 2, 3]]}
    assert diagram_from_dict(obj) == d
    with pytest.raises(InvariantError):
        diagram_from_dict({"copies": 3, "dims": [2, 2], "perms": [[1, 1, 2], [1, 2, 3]]})
