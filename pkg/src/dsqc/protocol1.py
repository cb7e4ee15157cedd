"""Two-qubit encoding without entanglement.

Alice prepares |mm> and puts a Hadamard on one randomly chosen qubit ``r``.
Bob applies H to both qubits or to neither (flag ``b``) and measures. Equal
outcomes decode on the spot; for the rest Alice reveals ``r`` and Bob reads
the qubit that saw either no Hadamard or a Hadamard on both sides.
"""
from __future__ import annotations

from dataclasses import dataclass

from .qsim import (
    RandomSource,
    TwoQubitState,
    apply_hadamard,
    apply_hadamard_both,
    measure_both,
    prepare,
)


@dataclass(frozen=True)
class EncodingRecordP1:
    bit: int
    r: int

    def __post_init__(self):
        if self.r not in (1, 2):
            raise ValueError(f"r must be 1 or 2, got {self.r}")


@dataclass(frozen=True)
class MeasurementRecordP1:
    b: int
    o1: int
    o2: int

    def __post_init__(self):
        if self.b not in (0, 1):
            raise ValueError(f"b must be 0 or 1, got {self.b}")

    @property
    def agree(self) -> bool:
        return self.o1 == self.o2


def encode_bit_p1(m: int, r: int) -> TwoQubitState:
    # m=1 -> |-1> or |1->, m=0 -> |+0> or |0+>
    return apply_hadamard(prepare(m, m), r)


def bob_basis_change_p1(s: TwoQubitState, b: int) -> TwoQubitState:
    return apply_hadamard_both(s) if b else s


def bob_measure_p1(s: TwoQubitState, b: int, rng: RandomSource) -> MeasurementRecordP1:
    o1, o2 = measure_both(bob_basis_change_p1(s, b), rng)
    return MeasurementRecordP1(b, o1, o2)


def sift_p1(records) -> tuple[list[tuple[int, int]], list[int]]:
    """Split records into ``(self_decoded, disagree_indices)``."""
    decoded, disagree = [], []
    for i, rec in enumerate(records):
        if rec.o1 == rec.o2:
            decoded.append((i, rec.o1))
        else:
            disagree.append(i)
    return decoded, disagree


def decode_disclosed_p1(rec: MeasurementRecordP1, r: int) -> int:
    if r not in (1, 2):
        raise ValueError(f"r must be 1 or 2, got {r}")
    # b=0: the qubit Alice left alone; b=1: the qubit that got H on both sides
    qubit = r if rec.b else 3 - r
    return rec.o1 if qubit == 1 else rec.o2


def decode_p1(records, disclosures: dict[int, int]) -> list[int]:
    """Bob's full decode once Alice has answered for the disagreeing pairs."""
    out = []
    for i, rec in enumerate(records):
        out.append(rec.o1 if rec.agree else decode_disclosed_p1(rec, disclosures[i]))
    return out
