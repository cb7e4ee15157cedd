"""Classical pre/postprocessing around the quantum encoder.

Alice hashes a packet, one-time-pads it, and hides random check bits at
random positions. Bob strips the check bits, compares them in public,
decrypts with the key and verifies the hash.

Bit sequences are 1-D ``numpy.uint8`` arrays of 0/1 values.
"""
from __future__ import annotations

import zlib
from dataclasses import dataclass, field
from math import ceil, sqrt

import numpy as np

from .qsim import RandomSource

HASH_BITS = 32


class HashMismatch(Exception):
    """Recomputed packet hash differs from the transmitted one."""


def as_bits(x) -> np.ndarray:
    a = np.asarray(x, dtype=np.uint8).ravel()
    if a.size and a.max() > 1:
        raise ValueError("bit sequences hold only 0 and 1")
    return a


def bits_from_str(s: str) -> np.ndarray:
    return np.array([int(c) for c in s], dtype=np.uint8)


def bits_to_str(bits) -> str:
    return "".join(str(int(b)) for b in bits)


def bytes_to_bits(data: bytes) -> np.ndarray:
    return np.unpackbits(np.frombuffer(data, dtype=np.uint8))


def bits_to_bytes(bits) -> bytes:
    """Pack MSB-first; a trailing partial byte is zero-padded."""
    return np.packbits(as_bits(bits)).tobytes()


def int_to_bits(value: int, width: int) -> np.ndarray:
    return np.array([(value >> (width - 1 - i)) & 1 for i in range(width)], dtype=np.uint8)


def bits_to_int(bits) -> int:
    out = 0
    for b in bits:
        out = (out << 1) | int(b)
    return out


def compute_hash(m) -> int:
    """CRC-32/IEEE of the message bits packed MSB-first.

    zlib's crc32 is the reflected 0x04C11DB7 variant with init and final XOR
    0xFFFFFFFF. A bit length that is not a multiple of 8 is zero-padded, so the
    caller must carry the true length alongside.
    """
    return zlib.crc32(bits_to_bytes(m)) & 0xFFFFFFFF


def append_hash(m) -> np.ndarray:
    m = as_bits(m)
    return np.concatenate([m, int_to_bits(compute_hash(m), HASH_BITS)])


def otp_apply(x, k) -> np.ndarray:
    x, k = as_bits(x), as_bits(k)
    if x.shape != k.shape:
        raise ValueError(f"length mismatch: data {x.size} bits, key {k.size} bits")
    return np.bitwise_xor(x, k)


def generate_key(n: int, rng: RandomSource) -> np.ndarray:
    if n < 1:
        raise ValueError("key length must be at least 1")
    return rng.bits(n)


def default_redundancy(p_len: int) -> int:
    return max(16, ceil(0.05 * p_len))


def insert_redundancy(p, k: int, rng: RandomSource, *, positions=None, values=None):
    """Insert ``k`` random check bits at random slots of the final sequence.

    ``positions``/``values`` may be forced (tests, replays). Returns
    ``(T, positions, values)`` with positions sorted ascending in T-coordinates.
    """
    p = as_bits(p)
    if k < 1:
        raise ValueError("need at least one redundancy bit")
    n = p.size + k
    if positions is None:
        positions = sorted(rng.sample(n, k))
    else:
        positions = sorted(int(i) for i in positions)
        if len(positions) != k or len(set(positions)) != k or positions[0] < 0 or positions[-1] >= n:
            raise ValueError("forced positions must be k distinct slots of the final sequence")
    values = rng.bits(k) if values is None else as_bits(values)
    if values.size != k:
        raise ValueError("need exactly k redundancy values")
    mask = np.zeros(n, dtype=bool)
    mask[positions] = True
    t = np.empty(n, dtype=np.uint8)
    t[mask] = values
    t[~mask] = p
    return t, positions, values


def _validate_positions(n: int, positions) -> list[int]:
    positions = [int(i) for i in positions]
    if any(i < 0 or i >= n for i in positions):
        raise ValueError(f"position out of range for sequence of length {n}")
    if len(set(positions)) != len(positions):
        raise ValueError("duplicate redundancy positions")
    if positions != sorted(positions):
        raise ValueError("redundancy positions must be sorted")
    return positions


def strip_redundancy(t, positions) -> np.ndarray:
    t = as_bits(t)
    positions = _validate_positions(t.size, positions)
    return np.delete(t, positions)


def extract_redundancy(t, positions) -> np.ndarray:
    t = as_bits(t)
    return t[_validate_positions(t.size, positions)]


@dataclass(frozen=True)
class AbortPolicy:
    expected_error_rate: float = 0.0
    sigma_margin: float = 3.0

    def __post_init__(self):
        if not 0 <= self.expected_error_rate < 1:
            raise ValueError("expected_error_rate must lie in [0, 1)")

    def threshold(self, k: int) -> float:
        e = self.expected_error_rate
        if e == 0:
            return 0.0
        return min(1.0, max(0.0, e + self.sigma_margin * sqrt(e * (1 - e) / k)))


@dataclass(frozen=True)
class Proceed:
    mismatch_fraction: float = 0.0


@dataclass(frozen=True)
class Abort:
    mismatch_fraction: float


def check_redundancy(alice_values, bob_values, k: int, policy: AbortPolicy) -> Proceed | Abort:
    a, b = as_bits(alice_values), as_bits(bob_values)
    if a.size != k or b.size != k:
        raise ValueError(f"expected {k} check values on each side, got {a.size} and {b.size}")
    frac = float(np.count_nonzero(a != b)) / k
    if frac > policy.threshold(k):
        return Abort(frac)
    return Proceed(frac)


def verify_packet(c) -> np.ndarray:
    """Split ``C = M || S`` and return ``M`` if the hash matches.

    Raises :class:`HashMismatch` otherwise.
    """
    c = as_bits(c)
    if c.size <= HASH_BITS:
        raise ValueError("packet must carry a non-empty message before the hash")
    m, s = c[:-HASH_BITS], c[-HASH_BITS:]
    if compute_hash(m) != bits_to_int(s):
        raise HashMismatch("hash of received message does not match transmitted hash")
    return m


@dataclass
class PacketBundle:
    """Alice's per-packet classical state."""

    M: np.ndarray
    S: int
    C: np.ndarray
    K: np.ndarray
    P: np.ndarray
    T: np.ndarray
    redundancy_positions: list[int] = field(default_factory=list)
    redundancy_values: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.uint8))

    @property
    def k(self) -> int:
        return len(self.redundancy_positions)


def prepare_packet(m, rng: RandomSource, k: int | None = None) -> PacketBundle:
    """Hash, encrypt and pad one message packet (Alice, before transmission)."""
    m = as_bits(m)
    c = append_hash(m)
    key = generate_key(c.size, rng)
    p = otp_apply(c, key)
    if k is None:
        k = default_redundancy(p.size)
    t, positions, values = insert_redundancy(p, k, rng)
    return PacketBundle(
        M=m, S=compute_hash(m), C=c, K=key, P=p, T=t,
        redundancy_positions=positions, redundancy_values=values,
    )
