import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from metabio.netcomplexity import (Circuit, CostMode, Entanglement, Gate, StateVector, SynthesisConfig,
                                   all_gates, apply_circuit, bipartitions, censored_bound,
                                   classify_entanglement, decode_circuit, default_max_gates,
                                   encode_circuit, explore, fidelity, gate_bits, h_net_upper,
                                   haar_state, random_circuit, random_product_state,
                                   schmidt_measure_two_qubits, schmidt_rank, synthesize,
                                   synthesize_shortest_encoding)
from metabio.prefix_code import efficient_length, encode_efficient, is_prefix_free, kraft_sum
from metabio.dyadic import SparseDyadic

S = 1 / np.sqrt(2)
H0 = Gate("H", 0)
BELL_CIRCUIT = Circuit((H0, Gate("CNOT", 1, 0)))


def bell():
    return StateVector(2, np.array([S, 0, 0, S]))


def ghz3():
    a = np.zeros(8, dtype=complex)
    a[0] = a[7] = S
    return StateVector(3, a)


# -- simulation --


def test_apply_circuit_examples():
    assert np.allclose(apply_circuit(Circuit(), 3).amplitudes, StateVector.basis(3).amplitudes)
    assert np.allclose(apply_circuit(Circuit((H0,)), 1).amplitudes, [S, S])
    assert np.allclose(apply_circuit(BELL_CIRCUIT, 2).amplitudes, [S, 0, 0, S])


def test_qubit_zero_is_most_significant():
    assert np.allclose(apply_circuit(Circuit((H0,)), 2).amplitudes, [S, 0, S, 0])
    assert np.allclose(apply_circuit(Circuit((Gate("H", 1),)), 2).amplitudes, [S, S, 0, 0])


def test_t_gate_phase():
    psi = apply_circuit(Circuit((H0, Gate("T", 0))), 1).amplitudes
    assert np.allclose(psi, [S, S * np.exp(1j * np.pi / 4)])
    eight = Circuit((H0,) + (Gate("T", 0),) * 8)
    assert np.allclose(apply_circuit(eight, 1).amplitudes, [S, S])


def test_invalid_circuits():
    for bad in (Gate("H", 2), Gate("CNOT", 0, 0), Gate("CNOT", 0), Gate("X", 0), Gate("T", 0, 1)):
        with pytest.raises(ValueError):
            apply_circuit(Circuit((bad,)), 2)


def test_state_vector_checks():
    with pytest.raises(ValueError):
        StateVector(2, np.array([1, 1, 0, 0]))
    with pytest.raises(ValueError):
        StateVector(5, np.eye(32)[0])
    with pytest.raises(ValueError):
        StateVector(2, np.array([1, 0]))
    assert StateVector.from_amplitudes([1, 1]).n == 1


def test_fidelity_examples():
    b = bell()
    assert fidelity(b, b) == pytest.approx(1)
    assert fidelity(StateVector.basis(2, 0), StateVector.basis(2, 3)) == 0
    assert fidelity(b, StateVector.basis(2)) == pytest.approx(S)
    assert fidelity(b, StateVector(2, b.amplitudes * 1j)) == pytest.approx(1)
    with pytest.raises(ValueError):
        fidelity(b, StateVector.basis(1))


def test_norm_preserved_by_random_circuits():
    rng = np.random.default_rng(0)
    for n in (1, 2, 3, 4):
        for _ in range(200):
            psi = apply_circuit(random_circuit(n, 8, rng), n).amplitudes
            assert abs(np.linalg.norm(psi) - 1) < 1e-12


# -- encoding --


def test_encoding_examples():
    assert encode_circuit(Circuit(), 2) == encode_efficient("") == "010"
    assert gate_bits(H0, 2) == "000"
    assert encode_circuit(Circuit((H0,)), 2) == encode_efficient("000")
    assert gate_bits(Gate("CNOT", 1, 0), 2) == "1010"
    assert gate_bits(Gate("T", 3), 4) == "0111"
    assert gate_bits(Gate("T", 0), 1) == "01"


@given(st.integers(1, 4), st.integers(0, 8), st.integers(0, 2**32))
@settings(max_examples=200)
def test_encoding_round_trip(n, length, seed):
    c = random_circuit(n, length, np.random.default_rng(seed))
    assert decode_circuit(encode_circuit(c, n), n) == c


def test_encodings_prefix_free_and_kraft():
    rng = np.random.default_rng(2)
    codes = {encode_circuit(random_circuit(3, int(rng.integers(0, 9)), rng), 3) for _ in range(500)}
    assert is_prefix_free(codes)
    assert kraft_sum(codes) <= SparseDyadic(1)


def test_decode_rejects_bad_opcode():
    with pytest.raises(ValueError):
        decode_circuit(encode_efficient("110"), 2)
    with pytest.raises(ValueError):
        decode_circuit(encode_efficient("10"), 2)


def test_all_gates_sorted_by_encoding():
    gates = all_gates(3)
    assert len(gates) == 3 + 3 + 6
    codes = [gate_bits(g, 3) for g in gates]
    assert codes == sorted(codes)


# -- synthesis --


def test_synthesize_examples():
    cfg = SynthesisConfig(2, 0.01)
    assert synthesize(StateVector.basis(2), cfg) == Circuit()
    assert synthesize(bell(), cfg) == BELL_CIRCUIT
    plus2 = StateVector(2, np.full(4, 0.5))
    assert len(synthesize(plus2, cfg)) == 2


def test_synthesize_rejects_mismatched_config():
    with pytest.raises(ValueError):
        synthesize(bell(), SynthesisConfig(3))


def test_default_caps():
    assert [default_max_gates(n) for n in (1, 2, 3, 4)] == [10, 10, 8, 6]
    assert SynthesisConfig(3).max_gates == 8
    with pytest.raises(ValueError):
        SynthesisConfig(2, epsilon=0)


def brute_force_min_length(target, n, eps, up_to):
    gates = all_gates(n)
    for L in range(up_to + 1):
        for ops in itertools.product(gates, repeat=L):
            if fidelity(apply_circuit(Circuit(ops), n), target) >= 1 - eps:
                return L
    return None


@pytest.mark.parametrize("n", [1, 2, 3])
def test_synthesis_minimal_against_brute_force(n):
    rng = np.random.default_rng(n)
    cfg = SynthesisConfig(n, 0.01)
    for _ in range(12):
        target = apply_circuit(random_circuit(n, int(rng.integers(0, 4)), rng), n)
        c = synthesize(target, cfg)
        assert fidelity(apply_circuit(c, n), target) >= 0.99
        assert len(c) == brute_force_min_length(target, n, 0.01, 3)


def test_unreachable_target_returns_none():
    cfg = SynthesisConfig(2, 0.01, max_gates=1)
    assert synthesize(bell(), cfg) is None
    assert h_net_upper(bell(), cfg) is None
    assert censored_bound(cfg) == efficient_length(2 * 3)


def test_h_net_upper_values():
    cfg = SynthesisConfig(2, 0.01)
    assert h_net_upper(StateVector.basis(2), cfg) == len(encode_efficient("")) == 3
    assert h_net_upper(bell(), cfg) == len(encode_circuit(BELL_CIRCUIT, 2)) == 14
    plus2 = StateVector(2, np.full(4, 0.5))
    assert h_net_upper(plus2, cfg) == efficient_length(2 * (2 + 1))


def test_shortest_encoding_never_longer_than_fewest_gates():
    rng = np.random.default_rng(7)
    cfg = SynthesisConfig(2, 0.05)
    for _ in range(20):
        target = haar_state(2, rng)
        a, b = synthesize(target, cfg), synthesize_shortest_encoding(target, cfg)
        if a is not None:
            assert len(encode_circuit(b, 2)) <= len(encode_circuit(a, 2))


def test_h_net_upper_nonincreasing_in_epsilon():
    rng = np.random.default_rng(11)
    for _ in range(10):
        target = haar_state(2, rng)
        values = [h_net_upper(target, SynthesisConfig(2, eps)) for eps in (0.02, 0.05, 0.1, 0.3)]
        known = [v for v in values if v is not None]
        assert known == sorted(known, reverse=True)
        # once reachable, larger eps keeps it reachable
        assert values[len(values) - len(known):] == known


def test_explore_bits_costs_are_sorted():
    ex = explore(2, 10, CostMode.BITS)
    assert ex.costs == sorted(ex.costs)
    assert ex.circuits[0] == ()


# -- entanglement --


def test_schmidt_examples():
    r = classify_entanglement(StateVector.basis(2))
    assert r.ranks == {(0,): 1} and r.classification is Entanglement.PRODUCT
    r = classify_entanglement(bell())
    assert r.ranks == {(0,): 2} and r.classification is Entanglement.MAX_RANK_ALL_CUTS
    assert schmidt_measure_two_qubits(bell()) == 1
    assert schmidt_measure_two_qubits(StateVector.basis(2)) == 0


def test_ghz3_ranks():
    g = ghz3()
    for cut in ([0], [1], [2], [1, 2]):
        assert schmidt_rank(g, cut) == 2
    assert classify_entanglement(g).classification is Entanglement.MAX_RANK_ALL_CUTS


def test_partially_entangled_four_qubits():
    # Bell pair on qubits 0,1 and |00> on qubits 2,3
    a = np.zeros(16, dtype=complex)
    a[0b0000] = a[0b1100] = S
    r = classify_entanglement(StateVector(4, a))
    assert r.classification is Entanglement.ENTANGLED
    assert r.ranks[(0,)] == 2 and r.ranks[(0, 1)] == 1


def test_bipartitions_and_bad_cuts():
    assert bipartitions(3) == [(0,), (0, 1), (0, 2)]
    assert len(bipartitions(4)) == 7
    with pytest.raises(ValueError):
        schmidt_rank(bell(), [0, 1])
    with pytest.raises(ValueError):
        schmidt_rank(bell(), [])


def test_random_states():
    rng = np.random.default_rng(5)
    for n in (1, 2, 3):
        assert classify_entanglement(random_product_state(n, rng)).classification is Entanglement.PRODUCT
    assert classify_entanglement(haar_state(3, rng)).classification is Entanglement.MAX_RANK_ALL_CUTS
