"""Simulator for two deterministic secure quantum communication protocols."""
from .adversary import AttackStrategy, Variant
from .classical import AbortPolicy
from .harness import SessionConfig, Seeds, run_session, run_sweep
from .qsim import RandomSource, TwoQubitState

__all__ = [
    "AbortPolicy",
    "AttackStrategy",
    "RandomSource",
    "Seeds",
    "SessionConfig",
    "TwoQubitState",
    "Variant",
    "run_session",
    "run_sweep",
]
