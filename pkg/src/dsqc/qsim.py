"""Exact pure-state simulation of a two-qubit register.

Amplitudes are stored as a 4-tuple of Python complex numbers indexed by
``2*q1 + q2``, where ``q1`` is the left qubit of a written ket. Gates are
written out by hand instead of going through 4x4 matrices; the simulator runs
once per transmitted pair, so avoiding numpy overhead on tiny vectors matters.
"""
from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass
from math import sqrt

import numpy as np

SQRT1_2 = 1 / sqrt(2)

PLUS = +1
MINUS = -1


class RandomSource:
    """Seeded stream of uniform bits and reals.

    Every stochastic operation in the package takes one of these explicitly;
    nothing draws from global state.
    """

    def __init__(self, seed: int):
        self.seed = int(seed)
        self._r = random.Random(self.seed)

    def __repr__(self) -> str:
        return f"RandomSource(seed={self.seed})"

    def bit(self) -> int:
        return self._r.getrandbits(1)

    def random(self) -> float:
        return self._r.random()

    def bernoulli(self, p: float) -> bool:
        return self._r.random() < p

    def randbelow(self, n: int) -> int:
        return self._r.randrange(n)

    def bits(self, n: int) -> np.ndarray:
        if n <= 0:
            return np.zeros(0, dtype=np.uint8)
        raw = np.frombuffer(self._r.randbytes((n + 7) // 8), dtype=np.uint8)
        return np.unpackbits(raw)[:n].copy()

    def sample(self, population_size: int, k: int) -> list[int]:
        return self._r.sample(range(population_size), k)

    def spawn(self, *labels) -> "RandomSource":
        return RandomSource(derive_seed(self.seed, *labels))


def derive_seed(seed: int, *labels) -> int:
    """Stable 64-bit child seed from a parent seed and a label path."""
    h = hashlib.blake2b(digest_size=8)
    h.update(str(int(seed)).encode())
    for label in labels:
        h.update(b"/")
        h.update(str(label).encode())
    return int.from_bytes(h.digest(), "big")


@dataclass(frozen=True)
class TwoQubitState:
    amps: tuple[complex, complex, complex, complex]

    def __post_init__(self):
        if len(self.amps) != 4:
            raise ValueError(f"need 4 amplitudes, got {len(self.amps)}")
        object.__setattr__(self, "amps", tuple(complex(a) for a in self.amps))

    @classmethod
    def from_array(cls, v) -> "TwoQubitState":
        v = np.asarray(v, dtype=complex).ravel()
        n = np.linalg.norm(v)
        if n == 0:
            raise ValueError("zero vector is not a state")
        return cls(tuple(v / n))

    def to_array(self) -> np.ndarray:
        return np.array(self.amps, dtype=complex)

    def norm(self) -> float:
        return sqrt(sum(abs(a) ** 2 for a in self.amps))

    def probabilities(self) -> tuple[float, float, float, float]:
        return tuple(abs(a) ** 2 for a in self.amps)

    def __neg__(self) -> "TwoQubitState":
        return TwoQubitState(tuple(-a for a in self.amps))


def prepare(q1: int, q2: int) -> TwoQubitState:
    """Computational basis state |q1 q2>."""
    amps = [0j, 0j, 0j, 0j]
    amps[2 * (q1 & 1) + (q2 & 1)] = 1 + 0j
    return TwoQubitState(tuple(amps))


def _check_qubit(qubit: int) -> None:
    if qubit not in (1, 2):
        raise ValueError(f"qubit index must be 1 or 2, got {qubit!r}")


def apply_hadamard(s: TwoQubitState, qubit: int) -> TwoQubitState:
    _check_qubit(qubit)
    a00, a01, a10, a11 = s.amps
    c = SQRT1_2
    if qubit == 1:
        return TwoQubitState(((a00 + a10) * c, (a01 + a11) * c, (a00 - a10) * c, (a01 - a11) * c))
    return TwoQubitState(((a00 + a01) * c, (a00 - a01) * c, (a10 + a11) * c, (a10 - a11) * c))


def apply_hadamard_both(s: TwoQubitState) -> TwoQubitState:
    return apply_hadamard(apply_hadamard(s, 1), 2)


def apply_cz(s: TwoQubitState) -> TwoQubitState:
    a00, a01, a10, a11 = s.amps
    return TwoQubitState((a00, a01, a10, -a11))


def apply_pauli(s: TwoQubitState, qubit: int, pauli: str) -> TwoQubitState:
    """Apply X, Y or Z to one qubit."""
    _check_qubit(qubit)
    a00, a01, a10, a11 = s.amps
    if qubit == 1:
        (x0, y0), (x1, y1) = (a00, a10), (a01, a11)
    else:
        (x0, y0), (x1, y1) = (a00, a01), (a10, a11)
    if pauli == "X":
        x0, y0, x1, y1 = y0, x0, y1, x1
    elif pauli == "Y":
        x0, y0, x1, y1 = -1j * y0, 1j * x0, -1j * y1, 1j * x1
    elif pauli == "Z":
        y0, y1 = -y0, -y1
    else:
        raise ValueError(f"unknown Pauli {pauli!r}")
    if qubit == 1:
        return TwoQubitState((x0, x1, y0, y1))
    return TwoQubitState((x0, y0, x1, y1))


def _sample_index(probs, u: float) -> int:
    acc = 0.0
    for i, p in enumerate(probs):
        acc += p
        if u < acc:
            return i
    # u landed in the rounding slack above sum(probs); take the last nonzero entry
    return max(i for i, p in enumerate(probs) if p > 0)


def measure_both(s: TwoQubitState, rng: RandomSource) -> tuple[int, int]:
    """Born-rule sample of both qubits in the computational basis."""
    probs = s.probabilities()
    total = sum(probs)
    i = _sample_index(probs, rng.random() * total)
    return i >> 1, i & 1


def measure_first_diagonal(s: TwoQubitState, rng: RandomSource) -> tuple[int, TwoQubitState]:
    """Project qubit 1 onto {|+>, |->}.

    Returns ``(PLUS | MINUS, collapsed_state)``; the collapsed state is
    renormalized and expressed in the original (un-rotated) frame.
    """
    t = apply_hadamard(s, 1)
    a00, a01, a10, a11 = t.amps
    p_plus = abs(a00) ** 2 + abs(a01) ** 2
    p_minus = abs(a10) ** 2 + abs(a11) ** 2
    if rng.random() * (p_plus + p_minus) < p_plus:
        n = sqrt(p_plus)
        collapsed = TwoQubitState((a00 / n, a01 / n, 0j, 0j))
        return PLUS, apply_hadamard(collapsed, 1)
    n = sqrt(p_minus)
    collapsed = TwoQubitState((0j, 0j, a10 / n, a11 / n))
    return MINUS, apply_hadamard(collapsed, 1)


def concurrence(s: TwoQubitState) -> float:
    a00, a01, a10, a11 = s.amps
    return min(1.0, 2 * abs(a00 * a11 - a01 * a10))


def overlap(a: TwoQubitState, b: TwoQubitState) -> complex:
    return sum(x.conjugate() * y for x, y in zip(a.amps, b.amps))


def states_equal_up_to_phase(a: TwoQubitState, b: TwoQubitState, tol: float = 1e-9) -> bool:
    return abs(overlap(a, b)) >= 1 - tol


# Named single-qubit kets, handy for building the protocol states.
KET = {
    "0": np.array([1, 0], dtype=complex),
    "1": np.array([0, 1], dtype=complex),
    "+": np.array([1, 1], dtype=complex) * SQRT1_2,
    "-": np.array([1, -1], dtype=complex) * SQRT1_2,
}


def ket(label: str) -> TwoQubitState:
    """Product state from a two-character label such as ``"-1"`` or ``"+-"``."""
    if len(label) != 2:
        raise ValueError(f"label must name two qubits, got {label!r}")
    return TwoQubitState(tuple(np.kron(KET[label[0]], KET[label[1]])))


def superpose(*terms: tuple[complex, TwoQubitState]) -> TwoQubitState:
    v = sum(c * t.to_array() for c, t in terms)
    return TwoQubitState.from_array(v)
