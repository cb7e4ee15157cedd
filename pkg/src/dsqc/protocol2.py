"""Two-qubit encoding with conditional entanglement.

Alice's random bit ``a`` picks the encoding family: ``a=0`` sends one of two
maximally entangled states, ``a=1`` a product state whose first qubit alone
carries the bit. Bob optionally applies CZ (``b=1``), then H on qubit 1, and
measures both qubits. After the packet Alice publishes every ``a``; equal
choices decode by outcome parity, unequal ones by the first outcome.
"""
from __future__ import annotations

from dataclasses import dataclass

from .qsim import (
    RandomSource,
    TwoQubitState,
    apply_cz,
    apply_hadamard,
    ket,
    measure_both,
    superpose,
)

_S = 2 ** -0.5

ENCODINGS: dict[tuple[int, int], TwoQubitState] = {
    (1, 0): superpose((_S, ket("-0")), (-_S, ket("+1"))),
    (0, 0): superpose((_S, ket("+0")), (-_S, ket("-1"))),
    (1, 1): ket("--"),
    (0, 1): ket("+-"),
}


@dataclass(frozen=True)
class EncodingRecordP2:
    bit: int
    a: int


@dataclass(frozen=True)
class MeasurementRecordP2:
    b: int
    o1: int
    o2: int

    def __post_init__(self):
        if self.b not in (0, 1):
            raise ValueError(f"b must be 0 or 1, got {self.b}")


def encode_bit_p2(m: int, a: int) -> TwoQubitState:
    return ENCODINGS[(m & 1, a & 1)]


def bob_unitary_p2(s: TwoQubitState, b: int) -> TwoQubitState:
    """State immediately before Bob's measurement."""
    if b:
        s = apply_cz(s)
    return apply_hadamard(s, 1)


def bob_circuit_p2(s: TwoQubitState, b: int, rng: RandomSource) -> MeasurementRecordP2:
    o1, o2 = measure_both(bob_unitary_p2(s, b), rng)
    return MeasurementRecordP2(b, o1, o2)


def decode_p2(rec: MeasurementRecordP2, a: int) -> int:
    if a == rec.b:
        return rec.o1 ^ rec.o2
    return rec.o1
