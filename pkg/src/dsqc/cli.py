"""Command-line front end.

    dsqc sweep --protocol 1 --attack ir --eps 0:1:0.1 --out sweep.csv
    dsqc send --in file.bin --out received.bin --transcript log.jsonl
    dsqc selftest
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import classical as cl
from .adversary import AttackStrategy, Variant
from .harness import SessionConfig, Seeds, run_session, run_sweep
from .qsim import derive_seed
from .selftest import report, run_checks

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_FAILED = 3

ATTACKS = {
    ("none", 1): Variant.NONE, ("none", 2): Variant.NONE,
    ("ir", 1): Variant.IR_P1, ("ir", 2): Variant.IR_P2,
    ("pns", 1): Variant.PNS_P1,
    ("fq", 2): Variant.FQ_P2,
}


class CliError(Exception):
    pass


def parse_grid(spec: str) -> list[float]:
    """``"0.5"`` or ``"start:end:step"`` -> ascending list of floats."""
    parts = spec.split(":")
    try:
        nums = [float(p) for p in parts]
    except ValueError:
        raise CliError(f"bad epsilon spec {spec!r}") from None
    if len(nums) == 1:
        grid = nums
    elif len(nums) == 3:
        start, end, step = nums
        if step <= 0 or end < start:
            raise CliError(f"epsilon grid {spec!r} is not ascending")
        n = math.floor((end - start) / step + 1e-9) + 1
        grid = [round(start + i * step, 12) for i in range(n)]
    else:
        raise CliError(f"epsilon spec {spec!r} must be a value or start:end:step")
    if any(not 0 <= e <= 1 for e in grid):
        raise CliError("epsilon values must lie in [0, 1]")
    return grid


def _default_seed() -> int:
    return int(os.environ.get("DSQC_SEED", "0"))


def _strategy(args, epsilon: float) -> AttackStrategy:
    try:
        variant = ATTACKS[(args.attack, args.protocol)]
    except KeyError:
        raise CliError(f"attack {args.attack!r} is not defined for protocol {args.protocol}") from None
    return AttackStrategy(variant, epsilon, args.p_dup)


def _policy(args) -> cl.AbortPolicy:
    return cl.AbortPolicy(args.expected_error, args.sigma_margin)


def _check_writable(path: Path) -> None:
    parent = path.resolve().parent
    if not parent.is_dir() or not os.access(parent, os.W_OK):
        raise CliError(f"cannot write to {path}")


def cmd_sweep(args) -> int:
    grid = parse_grid(args.eps)
    out = Path(args.out)
    _check_writable(out)
    template = SessionConfig(
        protocol=args.protocol, message_bits=args.bits, redundancy_k=args.redundancy,
        attack=_strategy(args, 0.0), noise_p=args.noise, abort_policy=_policy(args),
    )
    result = run_sweep(template, grid, args.trials, seed=args.seed, workers=args.workers)
    result.write_csv(out)
    row = result.row(1.0)
    print(
        f"wrote {len(result.rows)} rows to {out}; "
        f"epsilon={row.epsilon:.2f}: qber={row.qber:.6f} iae={row.iae:.6f} detected={row.detected_fraction:.6f}"
    )
    return EXIT_OK


def _line(seq: int, sender: str, type_: str, payload: dict) -> str:
    return json.dumps({"seq": seq, "sender": sender, "type": type_, "payload": payload}, separators=(",", ":")) + "\n"


def cmd_send(args) -> int:
    src = Path(args.input)
    if not src.is_file():
        raise CliError(f"input file {src} does not exist")
    out, log = Path(args.out), Path(args.transcript)
    _check_writable(out)
    _check_writable(log)
    data = cl.bytes_to_bits(src.read_bytes())
    n_packets = max(1, math.ceil(data.size / args.bits))
    strategy = _strategy(args, float(args.eps))

    seq = 0
    lines = [_line(seq, "session", "Header", {
        "file_bits": int(data.size), "packet_bits": args.bits, "packets": n_packets,
        "protocol": args.protocol, "attack": strategy.variant.value, "epsilon": strategy.epsilon,
    })]
    received, status = [], EXIT_OK
    for i in range(n_packets):
        chunk = data[i * args.bits:(i + 1) * args.bits]
        packet = np.zeros(args.bits, dtype=np.uint8)
        packet[:chunk.size] = chunk
        cfg = SessionConfig(
            protocol=args.protocol, message_bits=args.bits, redundancy_k=args.redundancy,
            attack=strategy, noise_p=args.noise, abort_policy=_policy(args),
            seeds=Seeds.from_master(derive_seed(args.seed, "packet", i)), message=packet,
        )
        res = run_session(cfg)
        for msg in res.transcript:
            seq += 1
            lines.append(_line(seq, msg.sender, msg.type.value, {"packet": i, **msg.payload}))
        seq += 1
        lines.append(_line(seq, "monitor", "EvanSummary", {
            "packet": i, "known_fraction": round(res.evan_known_fraction, 6),
            "certain_fraction": round(res.evan_certain_fraction, 6), "qber": round(res.qber_T, 6),
        }))
        if not res.ok:
            print(f"packet {i}: {res.delivered.value} (check-bit mismatch {res.mismatch_fraction:.4f})", file=sys.stderr)
            status = EXIT_FAILED
            break
        received.append(res.message)
        print(f"packet {i}: Ok  qber={res.qber_T:.6f} evan_known={res.evan_known_fraction:.6f}")

    log.write_text("".join(lines))
    if status == EXIT_OK:
        bits = np.concatenate(received)[:data.size]
        out.write_bytes(cl.bits_to_bytes(bits))
    return status


def cmd_selftest(args) -> int:
    checks = run_checks(seed=args.seed, bits=args.bits)
    sys.stdout.write(report(checks))
    return EXIT_OK if all(c.passed for c in checks) else EXIT_FAILED


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dsqc", description="Deterministic secure quantum communication simulator")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, *, attack=True):
        sp.add_argument("--protocol", type=int, choices=(1, 2), default=1)
        sp.add_argument("--bits", type=int, default=10000, help="message bits per packet")
        sp.add_argument("--redundancy", type=int, default=None, help="check bits k (default max(16, 5%%))")
        sp.add_argument("--noise", type=float, default=0.0, help="per-qubit depolarizing probability")
        sp.add_argument("--seed", type=int, default=_default_seed())
        sp.add_argument("--expected-error", type=float, default=0.0)
        sp.add_argument("--sigma-margin", type=float, default=3.0)
        if attack:
            sp.add_argument("--attack", choices=("none", "ir", "pns", "fq"), default="none")
            sp.add_argument("--p-dup", type=float, default=1.0, help="PNS duplication probability")

    sw = sub.add_parser("sweep", help="QBER / I_AE over a grid of intervention rates")
    common(sw)
    sw.add_argument("--eps", default="0:1:0.1", help="value or start:end:step")
    sw.add_argument("--trials", type=int, default=1)
    sw.add_argument("--workers", type=int, default=1)
    sw.add_argument("--out", default="sweep.csv")
    sw.set_defaults(func=cmd_sweep)

    se = sub.add_parser("send", help="transmit a file packet by packet")
    common(se)
    se.add_argument("--eps", default="1")
    se.add_argument("--in", dest="input", required=True)
    se.add_argument("--out", required=True)
    se.add_argument("--transcript", default="transcript.jsonl")
    se.set_defaults(func=cmd_send)

    st = sub.add_parser("selftest", help="run the release checks")
    st.add_argument("--seed", type=int, default=_default_seed())
    st.add_argument("--bits", type=int, default=10000)
    st.set_defaults(func=cmd_selftest)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (CliError, ValueError) as exc:
        print(f"dsqc: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
