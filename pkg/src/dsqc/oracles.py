"""Exhaustive decode checks over every measurement branch.

Instead of sampling, these walk each (bit, Alice choice, Bob choice) circuit
and every computational-basis outcome with nonzero Born probability.
"""
from __future__ import annotations

from itertools import product

from .protocol1 import MeasurementRecordP1, bob_basis_change_p1, decode_disclosed_p1, encode_bit_p1
from .protocol2 import MeasurementRecordP2, bob_unitary_p2, decode_p2, encode_bit_p2

BRANCH_EPS = 1e-12


def _branches(state):
    for idx, p in enumerate(state.probabilities()):
        if p > BRANCH_EPS:
            yield idx >> 1, idx & 1, p


def exhaustive_p1(decode_disclosed=decode_disclosed_p1) -> list[tuple]:
    """Return the failing ``(m, r, b, o1, o2, decoded)`` branches (empty when sound)."""
    failures = []
    for m, r, b in product((0, 1), (1, 2), (0, 1)):
        pre = bob_basis_change_p1(encode_bit_p1(m, r), b)
        for o1, o2, _ in _branches(pre):
            rec = MeasurementRecordP1(b, o1, o2)
            got = o1 if o1 == o2 else decode_disclosed(rec, r)
            if got != m:
                failures.append((m, r, b, o1, o2, got))
    return failures


def exhaustive_p2(decode=decode_p2) -> list[tuple]:
    """Return the failing ``(m, a, b, o1, o2, decoded)`` branches (empty when sound)."""
    failures = []
    for m, a, b in product((0, 1), repeat=3):
        pre = bob_unitary_p2(encode_bit_p2(m, a), b)
        for o1, o2, _ in _branches(pre):
            got = decode(MeasurementRecordP2(b, o1, o2), a)
            if got != m:
                failures.append((m, a, b, o1, o2, got))
    return failures


def branch_count_p1() -> int:
    return sum(
        1 for m, r, b in product((0, 1), (1, 2), (0, 1))
        for _ in _branches(bob_basis_change_p1(encode_bit_p1(m, r), b))
    )


def branch_count_p2() -> int:
    return sum(
        1 for m, a, b in product((0, 1), repeat=3)
        for _ in _branches(bob_unitary_p2(encode_bit_p2(m, a), b))
    )
