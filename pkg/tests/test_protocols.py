from itertools import product

import numpy as np
import pytest

from conftest import CZ, H1, HH, S2, sigma3, vec
from dsqc.oracles import exhaustive_p1, exhaustive_p2
from dsqc.protocol1 import (
    MeasurementRecordP1,
    bob_measure_p1,
    decode_disclosed_p1,
    decode_p1,
    encode_bit_p1,
    sift_p1,
)
from dsqc.protocol2 import (
    MeasurementRecordP2,
    bob_circuit_p2,
    bob_unitary_p2,
    decode_p2,
    encode_bit_p2,
)
from dsqc.qsim import RandomSource, TwoQubitState, concurrence, states_equal_up_to_phase


# --- matrix oracles -------------------------------------------------------

def p1_state(m, r):
    basis = np.zeros(4, dtype=complex)
    basis[3 * m] = 1
    return (H1 if r == 1 else np.kron(np.eye(2), np.array([[1, 1], [1, -1]]) * S2)) @ basis


P2_STATES = {
    (1, 0): (vec("-0") - vec("+1")) * S2,
    (0, 0): (vec("+0") - vec("-1")) * S2,
    (1, 1): vec("--"),
    (0, 1): vec("+-"),
}


def branches(v):
    return [(i >> 1, i & 1) for i, p in enumerate(np.abs(v) ** 2) if p > 1e-12]


# --- protocol 1 -----------------------------------------------------------

def test_encode_p1_examples():
    assert np.allclose(encode_bit_p1(1, 1).to_array(), np.array([0, 1, 0, -1]) * S2)
    assert np.allclose(encode_bit_p1(0, 2).to_array(), np.array([1, 1, 0, 0]) * S2)


@pytest.mark.parametrize("m,r", list(product((0, 1), (1, 2))))
def test_encode_p1_matches_oracle_and_is_product(m, r):
    s = encode_bit_p1(m, r)
    assert np.allclose(s.to_array(), p1_state(m, r))
    assert concurrence(s) < 1e-9


def test_bob_measure_p1_examples(rng):
    n = 4000
    recs = [bob_measure_p1(encode_bit_p1(1, 1), 0, rng) for _ in range(n)]
    assert all(r.o2 == 1 for r in recs)
    assert abs(sum(r.o1 for r in recs) - n / 2) <= sigma3(n, 0.5)
    recs = [bob_measure_p1(encode_bit_p1(1, 1), 1, rng) for _ in range(n)]
    assert all(r.o1 == 1 for r in recs)
    assert abs(sum(r.o2 for r in recs) - n / 2) <= sigma3(n, 0.5)
    assert all(bob_measure_p1(encode_bit_p1(0, 2), 0, rng).o1 == 0 for _ in range(200))


def test_sift_examples():
    assert sift_p1([MeasurementRecordP1(0, 1, 1)]) == ([(0, 1)], [])
    assert sift_p1([MeasurementRecordP1(1, 0, 1)]) == ([], [0])


def test_decode_disclosed_examples():
    assert decode_disclosed_p1(MeasurementRecordP1(0, 0, 1), 1) == 1
    assert decode_disclosed_p1(MeasurementRecordP1(1, 1, 0), 1) == 1


def test_p1_exhaustive_against_matrix_oracle():
    # independent branch tree built from kron matrices
    for m, r, b in product((0, 1), (1, 2), (0, 1)):
        v = (HH if b else np.eye(4)) @ p1_state(m, r)
        for o1, o2 in branches(v):
            rec = MeasurementRecordP1(b, o1, o2)
            got = o1 if o1 == o2 else decode_disclosed_p1(rec, r)
            assert got == m, (m, r, b, o1, o2)
    assert exhaustive_p1() == []


def test_p1_honest_self_decode_fraction(rng):
    n = 10000
    bits = rng.bits(n)
    rs = [1 + rng.bit() for _ in range(n)]
    recs = [bob_measure_p1(encode_bit_p1(int(m), r), rng.bit(), rng) for m, r in zip(bits, rs)]
    decoded, disagree = sift_p1(recs)
    assert abs(len(decoded) / n - 0.5) <= 0.015
    assert all(bits[i] == v for i, v in decoded)
    full = decode_p1(recs, {i: rs[i] for i in disagree})
    assert np.array_equal(full, bits)


def test_p1_basis_symmetry():
    """Outcome statistics depend on (b, r) only through which qubit is readable."""
    for m, r, b in product((0, 1), (1, 2), (0, 1)):
        a = np.abs((HH if b else np.eye(4)) @ p1_state(m, r)) ** 2
        mirrored = np.abs((np.eye(4) if b else HH) @ p1_state(m, 3 - r)) ** 2
        assert np.allclose(a, mirrored)


# --- protocol 2 -----------------------------------------------------------

@pytest.mark.parametrize("m,a", list(product((0, 1), (0, 1))))
def test_encode_p2_matches_kets(m, a):
    s = encode_bit_p2(m, a)
    assert np.allclose(s.to_array(), P2_STATES[(m, a)])
    assert abs(concurrence(s) - (1 - a)) < 1e-9


def test_encode_p2_amplitudes():
    assert np.allclose(encode_bit_p2(1, 0).to_array(), np.array([1, -1, -1, -1]) / 2)
    assert np.allclose(encode_bit_p2(0, 1).to_array(), np.array([1, -1, 1, -1]) / 2)


PREMEASURE = {
    # (m, a, b): state Bob holds right before measuring
    (1, 0, 0): (vec("10") - vec("01")) * S2,
    (0, 0, 0): (vec("00") - vec("11")) * S2,
    (1, 1, 1): (vec("10") - vec("01")) * S2,
    (0, 1, 1): (vec("00") - vec("11")) * S2,
    (1, 0, 1): vec("1-"),
    (1, 1, 0): vec("1-"),
    (0, 0, 1): vec("0-"),
    (0, 1, 0): vec("0-"),
}


@pytest.mark.parametrize("key", sorted(PREMEASURE))
def test_bob_premeasurement_states(key):
    m, a, b = key
    oracle = H1 @ ((CZ if b else np.eye(4)) @ P2_STATES[(m, a)])
    got = bob_unitary_p2(encode_bit_p2(m, a), b)
    assert np.allclose(got.to_array(), oracle)
    assert states_equal_up_to_phase(got, TwoQubitState(tuple(PREMEASURE[key])), 1e-9)


def test_bob_circuit_outcomes(rng):
    for _ in range(500):
        r = bob_circuit_p2(encode_bit_p2(1, 0), 0, rng)
        assert r.o1 != r.o2
        r = bob_circuit_p2(encode_bit_p2(0, 0), 0, rng)
        assert r.o1 == r.o2
        assert bob_circuit_p2(encode_bit_p2(1, 0), 1, rng).o1 == 1


def test_decode_p2_examples():
    assert decode_p2(MeasurementRecordP2(0, 1, 0), 0) == 1
    assert decode_p2(MeasurementRecordP2(1, 0, 1), 0) == 0


def test_p2_exhaustive_against_matrix_oracle():
    checked = 0
    for m, a, b in product((0, 1), repeat=3):
        v = H1 @ ((CZ if b else np.eye(4)) @ P2_STATES[(m, a)])
        for o1, o2 in branches(v):
            assert decode_p2(MeasurementRecordP2(b, o1, o2), a) == m
            checked += 1
    assert checked == 16
    assert exhaustive_p2() == []


def test_p2_exhaustive_catches_mutated_rule():
    def always_parity(rec, a):
        return rec.o1 ^ rec.o2

    assert exhaustive_p2(always_parity)


def test_p2_honest_monte_carlo(rng):
    n = 100_000
    bits = rng.bits(n)
    for m in bits:
        a = rng.bit()
        assert decode_p2(bob_circuit_p2(encode_bit_p2(int(m), a), rng.bit(), rng), a) == m
