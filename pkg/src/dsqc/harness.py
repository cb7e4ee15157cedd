"""Session orchestration and Monte Carlo sweeps.

A session pushes one packet through the full pipeline: hash, one-time pad,
check-bit insertion, quantum transmission of T with Evan in the channel,
sifting/disclosure, the public check-bit comparison and, when that passes,
quantum transmission of the key followed by decryption and hash verification.
Every public message is appended to a transcript.
"""
from __future__ import annotations

import enum
import io
import json
import math
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import classical as cl
from .adversary import NO_ATTACK, UNKNOWN, AttackStrategy, Eavesdropper, EvanRecord
from .protocol1 import bob_measure_p1, decode_p1, encode_bit_p1
from .protocol2 import bob_circuit_p2, decode_p2, encode_bit_p2
from .qsim import RandomSource, TwoQubitState, apply_pauli, derive_seed

PAULIS = ("X", "Y", "Z")
CSV_HEADER = "epsilon,qber,iae,detected_fraction,n_bits,seed"


class MessageType(str, enum.Enum):
    AGREE_INDICES = "AgreeIndices"
    BASIS_DISCLOSURE = "BasisDisclosure"
    RNG_DISCLOSURE_P2 = "RngDisclosureP2"
    REDUNDANCY_REVEAL = "RedundancyReveal"
    REDUNDANCY_REPORT = "RedundancyReport"
    ABORT = "Abort"
    KEY_PHASE_START = "KeyPhaseStart"
    DONE = "Done"


@dataclass(frozen=True)
class ClassicalMessage:
    seq: int
    sender: str
    type: MessageType
    payload: dict

    def to_json(self) -> str:
        return json.dumps(
            {"seq": self.seq, "sender": self.sender, "type": self.type.value, "payload": self.payload},
            separators=(",", ":"),
        )

    @classmethod
    def from_json(cls, line: str) -> "ClassicalMessage":
        d = json.loads(line)
        return cls(d["seq"], d["sender"], MessageType(d["type"]), d["payload"])


class Transcript(list):
    """Ordered log of the public classical channel."""

    def send(self, sender: str, type: MessageType, **payload) -> ClassicalMessage:
        msg = ClassicalMessage(len(self), sender, type, payload)
        self.append(msg)
        return msg

    def of_type(self, type: MessageType) -> list[ClassicalMessage]:
        return [m for m in self if m.type is type]

    def to_jsonl(self) -> str:
        return "".join(m.to_json() + "\n" for m in self)

    @classmethod
    def from_jsonl(cls, text: str) -> "Transcript":
        return cls(ClassicalMessage.from_json(line) for line in text.splitlines() if line.strip())


def transcript_ordering_ok(transcript, pairs_per_phase: dict[str, int] | None = None) -> bool:
    """Check the ordering invariants of a single-session transcript."""
    types = [m.type for m in transcript]
    if MessageType.ABORT in types and MessageType.KEY_PHASE_START in types:
        return False
    if MessageType.KEY_PHASE_START in types:
        ks = types.index(MessageType.KEY_PHASE_START)
        if MessageType.REDUNDANCY_REVEAL not in types[:ks]:
            return False
    for m in transcript:
        if m.type is MessageType.RNG_DISCLOSURE_P2:
            n = len(m.payload["a"])
            if m.payload["pairs_done"] != n:
                return False
            if pairs_per_phase is not None and pairs_per_phase[m.payload["phase"]] != n:
                return False
    return True


class Delivery(str, enum.Enum):
    OK = "Ok"
    HASH_MISMATCH = "HashMismatch"
    ABORTED = "Aborted"


@dataclass(frozen=True)
class Seeds:
    alice: int
    bob: int
    evan: int
    channel: int

    @classmethod
    def from_master(cls, seed: int) -> "Seeds":
        return cls(*(derive_seed(seed, role) for role in ("alice", "bob", "evan", "channel")))


@dataclass(frozen=True)
class SessionConfig:
    protocol: int = 1
    message_bits: int = 10000
    redundancy_k: int | None = None
    attack: AttackStrategy = NO_ATTACK
    noise_p: float = 0.0
    abort_policy: cl.AbortPolicy = cl.AbortPolicy()
    seeds: Seeds = Seeds.from_master(0)
    enforce_abort: bool = True
    message: np.ndarray | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.protocol not in (1, 2):
            raise ValueError(f"protocol must be 1 or 2, got {self.protocol}")
        if self.message is None and self.message_bits < 1:
            raise ValueError("message_bits must be positive")
        if self.redundancy_k is not None and self.redundancy_k < 1:
            raise ValueError("redundancy_k must be at least 1")
        if not 0 <= self.noise_p <= 1:
            raise ValueError(f"noise_p must lie in [0, 1], got {self.noise_p}")
        proto = self.attack.variant.protocol
        if proto is not None and proto != self.protocol:
            raise ValueError(f"attack {self.attack.variant.value} targets protocol {proto}")


@dataclass
class SessionResult:
    delivered: Delivery
    message: np.ndarray | None
    qber_T: float
    evan_known_fraction: float
    evan_certain_fraction: float
    evan_shannon_iae: float
    detected: bool
    mismatch_fraction: float
    transcript: Transcript
    evan: EvanRecord
    bundle: cl.PacketBundle
    bob_T: np.ndarray
    pairs_per_phase: dict[str, int]

    @property
    def ok(self) -> bool:
        return self.delivered is Delivery.OK


def apply_channel_noise(s: TwoQubitState, p: float, rng: RandomSource) -> TwoQubitState:
    """Independent depolarizing kick per qubit: with probability p, a random Pauli."""
    if p <= 0:
        return s
    for q in (1, 2):
        if rng.bernoulli(p):
            s = apply_pauli(s, q, PAULIS[rng.randbelow(3)])
    return s


def compute_qber(sent, decoded) -> float:
    sent, decoded = np.asarray(sent), np.asarray(decoded)
    if sent.shape != decoded.shape:
        raise ValueError(f"length mismatch: {sent.size} vs {decoded.size}")
    if sent.size == 0:
        return 0.0
    return float(np.count_nonzero(sent != decoded)) / sent.size


def compute_iae(alice_bits, estimates) -> float:
    """Fraction of positions where Evan's estimate equals Alice's bit.

    ``UNKNOWN`` entries never count.
    """
    a = np.asarray(alice_bits, dtype=np.int16)
    e = np.asarray(estimates, dtype=np.int16)
    if a.shape != e.shape:
        raise ValueError(f"length mismatch: {a.size} vs {e.size}")
    if a.size == 0:
        return 0.0
    return float(np.count_nonzero((e != UNKNOWN) & (e == a))) / a.size


def shannon_iae(alice_bits, estimates) -> float:
    """Plug-in mutual information (bits) between Alice's bits and Evan's symbols."""
    a = [int(x) for x in alice_bits]
    e = [int(x) for x in estimates]
    n = len(a)
    if n == 0:
        return 0.0
    joint = Counter(zip(a, e))
    pa, pe = Counter(a), Counter(e)
    mi = 0.0
    for (x, y), c in joint.items():
        mi += c / n * math.log2(c * n / (pa[x] * pe[y]))
    return max(0.0, mi)


def _transmit(protocol, bits, phase, rng_a, rng_b, rng_ch, evan, noise_p, transcript):
    """Quantum transmission of one bit block plus its classical follow-up.

    Returns Bob's decoded bits.
    """
    evan.begin_phase(phase)
    n = len(bits)
    if protocol == 1:
        choices = [1 + rng_a.bit() for _ in range(n)]
        records = []
        for m, r in zip(bits, choices):
            s = evan.intercept(encode_bit_p1(int(m), r))
            s = apply_channel_noise(s, noise_p, rng_ch)
            records.append(bob_measure_p1(s, rng_b.bit(), rng_b))
        agree = [i for i, rec in enumerate(records) if rec.agree]
        transcript.send("bob", MessageType.AGREE_INDICES, phase=phase, indices=agree)
        agree_set = set(agree)
        disclosed = {i: choices[i] for i in range(n) if i not in agree_set}
        transcript.send(
            "alice", MessageType.BASIS_DISCLOSURE, phase=phase,
            pairs=[[i, r] for i, r in disclosed.items()],
        )
        decoded = decode_p1(records, disclosed)
        evan.finalize(phase, disclosed)
    else:
        choices = [rng_a.bit() for _ in range(n)]
        records = []
        for m, a in zip(bits, choices):
            s = evan.intercept(encode_bit_p2(int(m), a))
            s = apply_channel_noise(s, noise_p, rng_ch)
            records.append(bob_circuit_p2(s, rng_b.bit(), rng_b))
        # Alice speaks only after the last pair of the block has been measured
        transcript.send("alice", MessageType.RNG_DISCLOSURE_P2, phase=phase, a=choices, pairs_done=len(records))
        decoded = [decode_p2(rec, a) for rec, a in zip(records, choices)]
        evan.finalize(phase, choices)
    return np.array(decoded, dtype=np.uint8)


def run_session(cfg: SessionConfig) -> SessionResult:
    rng_a = RandomSource(cfg.seeds.alice)
    rng_b = RandomSource(cfg.seeds.bob)
    rng_e = RandomSource(cfg.seeds.evan)
    rng_ch = RandomSource(cfg.seeds.channel)
    transcript = Transcript()
    evan = Eavesdropper(cfg.attack, rng_e)

    m = cl.as_bits(cfg.message) if cfg.message is not None else rng_a.bits(cfg.message_bits)
    bundle = cl.prepare_packet(m, rng_a, cfg.redundancy_k)
    k = bundle.k

    bob_T = _transmit(cfg.protocol, bundle.T, "message", rng_a, rng_b, rng_ch, evan, cfg.noise_p, transcript)
    pairs = {"message": len(bundle.T)}

    est, certain = evan.record.estimates["message"]
    qber = compute_qber(bundle.T, bob_T)
    known = compute_iae(bundle.T, est)
    certain_frac = float(np.count_nonzero(certain & (est == bundle.T))) / len(bundle.T)
    shannon = shannon_iae(bundle.T, est)

    transcript.send(
        "alice", MessageType.REDUNDANCY_REVEAL,
        positions=list(bundle.redundancy_positions), values=[int(v) for v in bundle.redundancy_values],
    )
    bob_values = cl.extract_redundancy(bob_T, bundle.redundancy_positions)
    transcript.send("bob", MessageType.REDUNDANCY_REPORT, values=[int(v) for v in bob_values])
    verdict = cl.check_redundancy(bundle.redundancy_values, bob_values, k, cfg.abort_policy)
    detected = isinstance(verdict, cl.Abort)

    common = dict(
        qber_T=qber, evan_known_fraction=known, evan_certain_fraction=certain_frac,
        evan_shannon_iae=shannon, detected=detected, mismatch_fraction=verdict.mismatch_fraction,
        transcript=transcript, evan=evan.record, bundle=bundle, bob_T=bob_T, pairs_per_phase=pairs,
    )
    if detected and cfg.enforce_abort:
        transcript.send("alice", MessageType.ABORT, mismatch_fraction=verdict.mismatch_fraction)
        return SessionResult(delivered=Delivery.ABORTED, message=None, **common)

    transcript.send("alice", MessageType.KEY_PHASE_START, key_bits=int(bundle.K.size))
    bob_K = _transmit(cfg.protocol, bundle.K, "key", rng_a, rng_b, rng_ch, evan, cfg.noise_p, transcript)
    pairs["key"] = len(bundle.K)

    bob_P = cl.strip_redundancy(bob_T, bundle.redundancy_positions)
    bob_C = cl.otp_apply(bob_P, bob_K)
    try:
        received = cl.verify_packet(bob_C)
        status = Delivery.OK
    except cl.HashMismatch:
        received = None
        status = Delivery.HASH_MISMATCH
    transcript.send("bob", MessageType.DONE, status=status.value)
    return SessionResult(delivered=status, message=received, **common)


@dataclass(frozen=True)
class SweepRow:
    epsilon: float
    qber: float
    iae: float
    detected_fraction: float
    n_bits: int
    seed: int

    def to_csv(self) -> str:
        return (
            f"{self.epsilon:.6f},{self.qber:.6f},{self.iae:.6f},"
            f"{self.detected_fraction:.6f},{self.n_bits},{self.seed}"
        )


@dataclass
class SweepResult:
    rows: list[SweepRow]

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(CSV_HEADER + "\n")
        for row in self.rows:
            buf.write(row.to_csv() + "\n")
        return buf.getvalue()

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write(self.to_csv())

    def row(self, epsilon: float) -> SweepRow:
        return min(self.rows, key=lambda r: abs(r.epsilon - epsilon))


def _sweep_point(args) -> SweepRow:
    template, eps, seed, trials = args
    qbers, iaes, detected = [], [], 0
    for t in range(trials):
        cfg = replace(
            template,
            attack=replace(template.attack, epsilon=eps),
            seeds=Seeds.from_master(derive_seed(seed, "trial", t)),
            enforce_abort=False,
        )
        res = run_session(cfg)
        qbers.append(res.qber_T)
        iaes.append(res.evan_known_fraction)
        detected += res.detected
    return SweepRow(eps, float(np.mean(qbers)), float(np.mean(iaes)), detected / trials, template.message_bits, seed)


def run_sweep(template: SessionConfig, eps_grid, trials: int = 1, *, seed: int = 0, workers: int = 1) -> SweepResult:
    """Evaluate QBER and Evan's information over a grid of intervention rates.

    Aborts are recorded in ``detected_fraction`` but not enforced, so every
    grid point is measured on the whole transmission.
    """
    grid = [float(e) for e in eps_grid]
    if not grid:
        raise ValueError("epsilon grid is empty")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("epsilon grid must be strictly ascending")
    if trials < 1:
        raise ValueError("need at least one trial per grid point")
    jobs = [(template, eps, derive_seed(seed, "sweep", i), trials) for i, eps in enumerate(grid)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_sweep_point, jobs))
    else:
        rows = [_sweep_point(j) for j in jobs]
    return SweepResult(rows)


def calibrate_error_rate(protocol: int, noise_p: float, *, message_bits: int = 10000, seed: int = 0) -> float:
    """Honest-channel QBER under the depolarizing model, for AbortPolicy."""
    cfg = SessionConfig(
        protocol=protocol, message_bits=message_bits, noise_p=noise_p,
        seeds=Seeds.from_master(derive_seed(seed, "calibrate")), enforce_abort=False,
    )
    return run_session(cfg).qber_T


def fit_line(xs, ys) -> tuple[float, float]:
    """Least-squares ``(slope, intercept)``."""
    slope, intercept = np.polyfit(np.asarray(xs, float), np.asarray(ys, float), 1)
    return float(slope), float(intercept)
