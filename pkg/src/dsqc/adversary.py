"""Eavesdropper models on the quantum channel.

Evan intercepts each pair independently with probability ``epsilon``. Every
strategy returns the state he forwards plus whatever he kept; once the
classical exchange for a phase is over he turns his observations into
per-bit estimates.

Estimates are int8 arrays with ``UNKNOWN`` (-1) where Evan has nothing, plus
a boolean mask marking the estimates he holds with certainty. An uncertain
estimate is a guess produced by a strategy's decode rule (only the
first-qubit attack makes such guesses).
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .protocol1 import MeasurementRecordP1, bob_measure_p1, decode_disclosed_p1
from .protocol2 import MeasurementRecordP2, bob_circuit_p2, decode_p2, encode_bit_p2
from .qsim import (
    MINUS,
    RandomSource,
    TwoQubitState,
    apply_hadamard_both,
    measure_first_diagonal,
    prepare,
)

UNKNOWN = -1


class Variant(str, enum.Enum):
    NONE = "none"
    IR_P1 = "ir_p1"
    PNS_P1 = "pns_p1"
    IR_P2 = "ir_p2"
    FQ_P2 = "fq_p2"

    @property
    def protocol(self) -> int | None:
        if self in (Variant.IR_P1, Variant.PNS_P1):
            return 1
        if self in (Variant.IR_P2, Variant.FQ_P2):
            return 2
        return None


@dataclass(frozen=True)
class AttackStrategy:
    variant: Variant = Variant.NONE
    epsilon: float = 0.0
    p_dup: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "variant", Variant(self.variant))
        if not 0 <= self.epsilon <= 1:
            raise ValueError(f"epsilon must lie in [0, 1], got {self.epsilon}")
        if not 0 <= self.p_dup <= 1:
            raise ValueError(f"p_dup must lie in [0, 1], got {self.p_dup}")

    @property
    def active(self) -> bool:
        return self.variant is not Variant.NONE and self.epsilon > 0


NO_ATTACK = AttackStrategy()


def attack_ir_p1(s: TwoQubitState, rng: RandomSource) -> tuple[TwoQubitState, MeasurementRecordP1]:
    """Measure like Bob, then resend what was seen in the basis it was seen in."""
    obs = bob_measure_p1(s, rng.bit(), rng)
    # agreeing outcomes are |vv>; disagreeing ones are resent verbatim
    forwarded = prepare(obs.o1, obs.o2)
    if obs.b:
        forwarded = apply_hadamard_both(forwarded)
    return forwarded, obs


def attack_pns_p1(s: TwoQubitState, p_dup: float, rng: RandomSource) -> tuple[TwoQubitState, TwoQubitState | None]:
    """Keep a copy of the pair with probability ``p_dup``; forward it untouched."""
    copy = s if rng.bernoulli(p_dup) else None
    return s, copy


def pns_finalize(copies, disclosures: dict[int, int], rng: RandomSource) -> tuple[np.ndarray, np.ndarray]:
    """Measure stored copies once Alice's public answers are known.

    Pairs Alice answered for: read the qubit she left without a Hadamard.
    Others: measure like Bob in a random basis and keep agreeing outcomes.
    """
    n = len(copies)
    est = np.full(n, UNKNOWN, dtype=np.int8)
    certain = np.zeros(n, dtype=bool)
    for i, copy in enumerate(copies):
        if copy is None:
            continue
        if i in disclosures:
            rec = bob_measure_p1(copy, 0, rng)
            est[i] = decode_disclosed_p1(rec, disclosures[i])
            certain[i] = True
        else:
            rec = bob_measure_p1(copy, rng.bit(), rng)
            if rec.agree:
                est[i] = rec.o1
                certain[i] = True
    return est, certain


def attack_ir_p2(s: TwoQubitState, rng: RandomSource) -> tuple[TwoQubitState, MeasurementRecordP2]:
    """Run Bob's circuit with a random CZ choice, resend a random encoding."""
    obs = bob_circuit_p2(s, rng.bit(), rng)
    return encode_bit_p2(rng.bit(), rng.bit()), obs


def attack_fq_p2(s: TwoQubitState, rng: RandomSource) -> tuple[TwoQubitState, int]:
    """Measure qubit 1 in the {|+>, |->} basis and forward the collapsed pair."""
    sign, collapsed = measure_first_diagonal(s, rng)
    return collapsed, sign


@dataclass
class EvanEntry:
    intercepted: bool = False
    obs: object = None


@dataclass
class EvanRecord:
    strategy: AttackStrategy
    phases: dict[str, list[EvanEntry]] = field(default_factory=dict)
    estimates: dict[str, tuple[np.ndarray, np.ndarray]] = field(default_factory=dict)

    def intercepted_count(self, phase: str) -> int:
        return sum(e.intercepted for e in self.phases.get(phase, ()))

    def has_observations(self, phase: str) -> bool:
        return self.intercepted_count(phase) > 0


def finalize_estimates(strategy: AttackStrategy, entries, disclosures, rng: RandomSource) -> tuple[np.ndarray, np.ndarray]:
    """Turn one phase's observations into ``(estimates, certain)``.

    ``disclosures`` is ``{index: r}`` for protocol 1 and the full list of
    Alice's ``a`` bits for protocol 2.
    """
    n = len(entries)
    v = strategy.variant
    if v is Variant.PNS_P1:
        copies = [e.obs if e.intercepted else None for e in entries]
        return pns_finalize(copies, disclosures, rng)

    est = np.full(n, UNKNOWN, dtype=np.int8)
    certain = np.zeros(n, dtype=bool)
    for i, e in enumerate(entries):
        if not e.intercepted:
            continue
        if v is Variant.IR_P1:
            rec = e.obs
            if rec.agree:
                est[i], certain[i] = rec.o1, True
            elif i in disclosures:
                est[i], certain[i] = decode_disclosed_p1(rec, disclosures[i]), True
        elif v is Variant.IR_P2:
            est[i], certain[i] = decode_p2(e.obs, disclosures[i]), True
        elif v is Variant.FQ_P2:
            est[i] = 1 if e.obs == MINUS else 0
            # product encoding: qubit 1 is a sign eigenstate, so the reading is exact
            certain[i] = disclosures[i] == 1
    return est, certain


class Eavesdropper:
    """Evan in the quantum channel, keeping one record per session."""

    def __init__(self, strategy: AttackStrategy, rng: RandomSource):
        self.strategy = strategy
        self.rng = rng
        self.record = EvanRecord(strategy)
        self._phase: str | None = None

    def begin_phase(self, name: str) -> None:
        self._phase = name
        self.record.phases[name] = []

    def intercept(self, s: TwoQubitState) -> TwoQubitState:
        entries = self.record.phases[self._phase]
        st = self.strategy
        if not st.active or not self.rng.bernoulli(st.epsilon):
            entries.append(EvanEntry())
            return s
        v = st.variant
        if v is Variant.IR_P1:
            fwd, obs = attack_ir_p1(s, self.rng)
        elif v is Variant.PNS_P1:
            fwd, obs = attack_pns_p1(s, st.p_dup, self.rng)
            if obs is None:
                entries.append(EvanEntry())
                return fwd
        elif v is Variant.IR_P2:
            fwd, obs = attack_ir_p2(s, self.rng)
        elif v is Variant.FQ_P2:
            fwd, obs = attack_fq_p2(s, self.rng)
        else:  # pragma: no cover
            raise ValueError(f"unhandled attack {v}")
        entries.append(EvanEntry(True, obs))
        return fwd

    def finalize(self, phase: str, disclosures) -> tuple[np.ndarray, np.ndarray]:
        out = finalize_estimates(self.strategy, self.record.phases[phase], disclosures, self.rng)
        self.record.estimates[phase] = out
        return out
